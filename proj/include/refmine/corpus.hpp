#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace refmine {

// A short, unstructured text record (classified ad, auction title, ...).
struct Post {
    std::string id;
    std::string raw;
    std::vector<std::string> tokens;  // tokenize(raw), possibly filtered by a stoplist
};

struct Corpus {
    std::vector<Post> posts;

    std::size_t size() const { return posts.size(); }
    bool empty() const { return posts.empty(); }

    // First n posts (n clamped to size). Prefix order is stable.
    Corpus prefix(std::size_t n) const;
};

// Lowercase, split on whitespace, strip leading/trailing punctuation from each
// token, drop empties. Interior punctuation and digits survive, so model
// numbers like "t41" or "e1405" come through intact. Deterministic and
// idempotent on its own output.
std::vector<std::string> tokenize(const std::string& raw);

// Split a space-joined term back into its constituent tokens.
std::vector<std::string> term_tokens(const std::string& term);

Corpus make_corpus(const std::vector<std::string>& lines,
                   const std::set<std::string>* stoplist = nullptr);

// One post per line, UTF-8. Empty lines become empty posts.
Corpus load_posts_text(const std::string& path,
                       const std::set<std::string>* stoplist = nullptr);

// JSON Lines with fields {id, text}.
Corpus load_posts_jsonl(const std::string& path,
                        const std::set<std::string>* stoplist = nullptr);

// One token per line; tokenized so the entries match corpus normalization.
std::set<std::string> load_stoplist(const std::string& path);

}  // namespace refmine
