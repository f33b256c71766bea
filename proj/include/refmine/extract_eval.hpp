#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refmine/forest.hpp"

namespace refmine {

// Half-open token index range within a post.
struct Span {
    std::size_t start = 0;
    std::size_t end = 0;

    auto operator<=>(const Span&) const = default;
};

struct GoldPost {
    Post post;
    std::map<std::size_t, std::vector<Span>> labels;  // column -> gold spans
};

struct ExtractionResult {
    std::optional<std::vector<std::string>> tuple;
    std::map<std::size_t, std::vector<Span>> spans;
};

// Token-overlap matcher: score is the number of tuple attribute-value tokens
// present in the post; ties go to the tuple matching more whole non-null
// columns, then to the lexicographically smallest tuple. Score 0 -> none.
std::optional<std::vector<std::string>> match_post(const Post& post,
                                                   const ReferenceSet& refset);

// Label spans of the post equal to each column value; when a multi-token
// value never occurs contiguously, its constituent tokens are labeled
// individually instead.
ExtractionResult extract(const Post& post, const std::vector<std::string>& tuple);

struct ColumnScore {
    std::size_t expected = 0;   // posts with a non-empty gold field
    std::size_t attempted = 0;  // posts with a non-empty extracted field
    std::size_t correct = 0;    // exact span-set matches
    double recall = 0;
    double precision = 0;
    double f1 = 0;
};

struct EvalReport {
    std::vector<ColumnScore> columns;
};

// Field-level scoring: a field is correct only when the extracted span set
// equals the gold span set exactly. Throws std::invalid_argument when gold
// is empty.
EvalReport evaluate(const std::vector<GoldPost>& gold, const ReferenceSet& refset);

// JSON Lines {id, text, labels: {"<column>": [[start, end], ...]}}.
std::vector<GoldPost> load_gold_jsonl(const std::string& path);

std::string report_to_csv(const EvalReport& report,
                          const std::vector<std::string>* columnNames = nullptr);
std::string report_to_text(const EvalReport& report,
                           const std::vector<std::string>* columnNames = nullptr);

}  // namespace refmine
