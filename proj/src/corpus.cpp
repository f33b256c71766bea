#include "refmine/corpus.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace refmine {

namespace {

bool keep_char(unsigned char c) {
    // Alphanumerics and non-ASCII bytes survive at token edges; ASCII
    // punctuation gets stripped.
    return std::isalnum(c) || c >= 0x80;
}

std::string normalize_token(const std::string& word) {
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && !keep_char(static_cast<unsigned char>(word[begin]))) ++begin;
    while (end > begin && !keep_char(static_cast<unsigned char>(word[end - 1]))) --end;
    std::string out;
    out.reserve(end - begin);
    for (std::size_t i = begin; i < end; ++i) {
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(word[i]))));
    }
    return out;
}

Post make_post(std::string id, std::string raw, const std::set<std::string>* stoplist) {
    Post p;
    p.id = std::move(id);
    p.raw = std::move(raw);
    p.tokens = tokenize(p.raw);
    if (stoplist) {
        std::vector<std::string> kept;
        kept.reserve(p.tokens.size());
        for (auto& t : p.tokens) {
            if (!stoplist->count(t)) kept.push_back(std::move(t));
        }
        p.tokens = std::move(kept);
    }
    return p;
}

}  // namespace

std::vector<std::string> tokenize(const std::string& raw) {
    std::vector<std::string> tokens;
    std::istringstream in(raw);
    std::string word;
    while (in >> word) {
        std::string tok = normalize_token(word);
        if (!tok.empty()) tokens.push_back(std::move(tok));
    }
    return tokens;
}

std::vector<std::string> term_tokens(const std::string& term) {
    std::vector<std::string> out;
    std::istringstream in(term);
    std::string tok;
    while (in >> tok) out.push_back(std::move(tok));
    return out;
}

Corpus Corpus::prefix(std::size_t n) const {
    Corpus out;
    if (n > posts.size()) n = posts.size();
    out.posts.assign(posts.begin(), posts.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
}

Corpus make_corpus(const std::vector<std::string>& lines,
                   const std::set<std::string>* stoplist) {
    Corpus corpus;
    corpus.posts.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        corpus.posts.push_back(make_post(std::to_string(i), lines[i], stoplist));
    }
    return corpus;
}

Corpus load_posts_text(const std::string& path, const std::set<std::string>* stoplist) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open posts file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    return make_corpus(lines, stoplist);
}

Corpus load_posts_jsonl(const std::string& path, const std::set<std::string>* stoplist) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open posts file: " + path);
    Corpus corpus;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text")) {
            throw std::runtime_error("malformed posts jsonl at line " + std::to_string(lineno));
        }
        std::string id = j.contains("id") ? (j["id"].is_string()
                                                 ? j["id"].get<std::string>()
                                                 : j["id"].dump())
                                          : std::to_string(lineno - 1);
        corpus.posts.push_back(make_post(std::move(id), j["text"].get<std::string>(), stoplist));
    }
    return corpus;
}

std::set<std::string> load_stoplist(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stoplist: " + path);
    std::set<std::string> stoplist;
    std::string line;
    while (std::getline(in, line)) {
        for (auto& tok : tokenize(line)) stoplist.insert(std::move(tok));
    }
    return stoplist;
}

}  // namespace refmine
