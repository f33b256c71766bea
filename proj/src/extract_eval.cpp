#include "refmine/extract_eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace refmine {

namespace {

std::set<std::string> post_token_set(const Post& post) {
    return {post.tokens.begin(), post.tokens.end()};
}

// (token score, whole-column matches) for one tuple against one post.
std::pair<std::size_t, std::size_t> score_tuple(const std::set<std::string>& postTokens,
                                                const std::vector<std::string>& tuple) {
    std::size_t tokenScore = 0;
    std::size_t columnsMatched = 0;
    for (const auto& value : tuple) {
        if (value.empty()) continue;
        auto tokens = term_tokens(value);
        std::size_t hit = 0;
        for (const auto& tok : tokens) {
            if (postTokens.count(tok)) ++hit;
        }
        tokenScore += hit;
        if (hit == tokens.size()) ++columnsMatched;
    }
    return {tokenScore, columnsMatched};
}

double safe_div(std::size_t num, std::size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string column_label(std::size_t i, const std::vector<std::string>* names) {
    if (names && i < names->size() && !(*names)[i].empty()) return (*names)[i];
    return "attribute" + std::to_string(i);
}

}  // namespace

std::optional<std::vector<std::string>> match_post(const Post& post,
                                                   const ReferenceSet& refset) {
    if (refset.tuples.empty()) throw std::invalid_argument("match_post: empty reference set");
    std::set<std::string> postTokens = post_token_set(post);
    const std::vector<std::string>* best = nullptr;
    std::pair<std::size_t, std::size_t> bestScore{0, 0};
    for (const auto& tuple : refset.tuples) {
        auto score = score_tuple(postTokens, tuple);
        if (score.first == 0) continue;
        // tuples are kept sorted, so the first tuple hitting a score wins ties
        if (!best || score.first > bestScore.first ||
            (score.first == bestScore.first && score.second > bestScore.second)) {
            best = &tuple;
            bestScore = score;
        }
    }
    if (!best) return std::nullopt;
    return *best;
}

ExtractionResult extract(const Post& post, const std::vector<std::string>& tuple) {
    ExtractionResult result;
    result.tuple = tuple;
    for (std::size_t col = 0; col < tuple.size(); ++col) {
        if (tuple[col].empty()) continue;
        auto valueTokens = term_tokens(tuple[col]);
        std::vector<Span> spans;
        // contiguous occurrences of the full value first
        for (std::size_t i = 0; i + valueTokens.size() <= post.tokens.size(); ++i) {
            bool match = true;
            for (std::size_t k = 0; k < valueTokens.size(); ++k) {
                if (post.tokens[i + k] != valueTokens[k]) { match = false; break; }
            }
            if (match) spans.push_back({i, i + valueTokens.size()});
        }
        if (spans.empty() && valueTokens.size() > 1) {
            // value never occurs contiguously: label constituent tokens alone
            for (std::size_t i = 0; i < post.tokens.size(); ++i) {
                for (const auto& tok : valueTokens) {
                    if (post.tokens[i] == tok) { spans.push_back({i, i + 1}); break; }
                }
            }
        }
        if (!spans.empty()) result.spans[col] = std::move(spans);
    }
    return result;
}

EvalReport evaluate(const std::vector<GoldPost>& gold, const ReferenceSet& refset) {
    if (gold.empty()) throw std::invalid_argument("evaluate: empty gold set");
    std::size_t numColumns = refset.columns;
    for (const auto& g : gold) {
        for (const auto& [col, spans] : g.labels) {
            numColumns = std::max(numColumns, col + 1);
        }
    }
    EvalReport report;
    report.columns.resize(numColumns);

    // Posts evaluated in id order so parallel callers would merge identically.
    std::vector<const GoldPost*> ordered;
    for (const auto& g : gold) ordered.push_back(&g);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const GoldPost* a, const GoldPost* b) {
                         return a->post.id < b->post.id;
                     });

    for (const GoldPost* g : ordered) {
        ExtractionResult extraction;
        auto tuple = refset.tuples.empty() ? std::nullopt : match_post(g->post, refset);
        if (tuple) extraction = extract(g->post, *tuple);

        for (std::size_t col = 0; col < numColumns; ++col) {
            std::vector<Span> goldSpans;
            if (auto it = g->labels.find(col); it != g->labels.end()) goldSpans = it->second;
            std::vector<Span> gotSpans;
            if (auto it = extraction.spans.find(col); it != extraction.spans.end()) {
                gotSpans = it->second;
            }
            std::sort(goldSpans.begin(), goldSpans.end());
            std::sort(gotSpans.begin(), gotSpans.end());

            auto& score = report.columns[col];
            if (!goldSpans.empty()) ++score.expected;
            if (!gotSpans.empty()) ++score.attempted;
            if (!goldSpans.empty() && goldSpans == gotSpans) ++score.correct;
        }
    }

    for (auto& score : report.columns) {
        score.recall = safe_div(score.correct, score.expected);
        score.precision = safe_div(score.correct, score.attempted);
        double pr = score.precision + score.recall;
        score.f1 = pr > 0 ? 2.0 * score.precision * score.recall / pr : 0.0;
    }
    return report;
}

std::vector<GoldPost> load_gold_jsonl(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open gold file: " + path);
    std::vector<GoldPost> gold;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("text") ||
            !j.contains("labels") || !j["labels"].is_object()) {
            throw std::runtime_error("malformed gold jsonl at line " + std::to_string(lineno));
        }
        GoldPost g;
        g.post.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>()
                                                            : j["id"].dump())
                                     : std::to_string(lineno - 1);
        g.post.raw = j["text"].get<std::string>();
        g.post.tokens = tokenize(g.post.raw);
        for (const auto& [key, value] : j["labels"].items()) {
            std::size_t col = std::stoul(key);
            for (const auto& pair : value) {
                if (!pair.is_array() || pair.size() != 2) {
                    throw std::runtime_error("malformed span at line " + std::to_string(lineno));
                }
                Span span{pair[0].get<std::size_t>(), pair[1].get<std::size_t>()};
                if (span.end <= span.start || span.end > g.post.tokens.size()) {
                    throw std::runtime_error("span out of range at line " +
                                             std::to_string(lineno));
                }
                g.labels[col].push_back(span);
            }
            std::sort(g.labels[col].begin(), g.labels[col].end());
            for (std::size_t i = 1; i < g.labels[col].size(); ++i) {
                if (g.labels[col][i].start < g.labels[col][i - 1].end) {
                    throw std::runtime_error("overlapping gold spans at line " +
                                             std::to_string(lineno));
                }
            }
        }
        gold.push_back(std::move(g));
    }
    return gold;
}

std::string report_to_csv(const EvalReport& report,
                          const std::vector<std::string>* columnNames) {
    std::ostringstream out;
    out << "column,expected,attempted,correct,recall,precision,f1\n";
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
        const auto& s = report.columns[c];
        out << column_label(c, columnNames) << ',' << s.expected << ',' << s.attempted
            << ',' << s.correct << ',' << fmt(s.recall) << ',' << fmt(s.precision) << ','
            << fmt(s.f1) << '\n';
    }
    return out.str();
}

std::string report_to_text(const EvalReport& report,
                           const std::vector<std::string>* columnNames) {
    std::ostringstream out;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-16s %8s %9s %7s %8s %9s %8s\n", "column",
                  "expected", "attempted", "correct", "recall", "precision", "f1");
    out << buf;
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
        const auto& s = report.columns[c];
        std::snprintf(buf, sizeof buf, "%-16s %8zu %9zu %7zu %8.4f %9.4f %8.4f\n",
                      column_label(c, columnNames).c_str(), s.expected, s.attempted,
                      s.correct, s.recall, s.precision, s.f1);
        out << buf;
    }
    return out.str();
}

}  // namespace refmine
