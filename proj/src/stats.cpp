#include "refmine/stats.hpp"

#include <algorithm>
#include <stdexcept>
#include <thread>

namespace refmine {

namespace {

struct Shard {
    std::map<std::string, std::vector<std::size_t>> postings;
    std::map<std::pair<std::string, std::string>, BigramInfo> bigrams;
};

void scan_range(const Corpus& corpus, std::size_t begin, std::size_t end, Shard& shard) {
    for (std::size_t p = begin; p < end; ++p) {
        const auto& tokens = corpus.posts[p].tokens;
        std::set<std::string> seen;
        for (const auto& t : tokens) {
            if (seen.insert(t).second) shard.postings[t].push_back(p);
        }
        for (std::size_t i = 0; i + 1 < tokens.size(); ++i) {
            if (tokens[i] == tokens[i + 1]) continue;
            auto& info = shard.bigrams[{tokens[i], tokens[i + 1]}];
            if (info.count == 0) info.first = {p, i};
            ++info.count;
        }
    }
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& a,
                                   const std::vector<std::size_t>& b) {
    std::vector<std::size_t> out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

}  // namespace

CooccurrenceStats build_stats(const Corpus& corpus, unsigned threads) {
    if (threads == 0) threads = 1;
    CooccurrenceStats stats;
    stats.numPosts_ = corpus.size();

    std::size_t n = corpus.size();
    std::size_t chunks = std::min<std::size_t>(threads, std::max<std::size_t>(n, 1));
    std::vector<Shard> shards(chunks);
    if (chunks <= 1) {
        scan_range(corpus, 0, n, shards[0]);
    } else {
        std::vector<std::thread> workers;
        std::size_t per = (n + chunks - 1) / chunks;
        for (std::size_t c = 0; c < chunks; ++c) {
            std::size_t begin = c * per;
            std::size_t end = std::min(n, begin + per);
            workers.emplace_back(scan_range, std::cref(corpus), begin, end,
                                 std::ref(shards[c]));
        }
        for (auto& w : workers) w.join();
    }

    // Merge shards in chunk order; postings stay sorted because chunks cover
    // disjoint, increasing post ranges.
    for (auto& shard : shards) {
        for (auto& [token, posts] : shard.postings) {
            auto& dst = stats.postings_[token];
            dst.insert(dst.end(), posts.begin(), posts.end());
        }
        for (auto& [pair, info] : shard.bigrams) {
            auto& dst = stats.bigrams_[pair];
            if (dst.count == 0 || info.first < dst.first) dst.first = info.first;
            dst.count += info.count;
        }
    }
    return stats;
}

std::vector<std::size_t> CooccurrenceStats::termPostings(const std::string& term) const {
    std::vector<std::string> tokens = term_tokens(term);
    if (tokens.empty()) return {};
    auto it = postings_.find(tokens[0]);
    if (it == postings_.end()) return {};
    std::vector<std::size_t> acc = it->second;
    for (std::size_t i = 1; i < tokens.size() && !acc.empty(); ++i) {
        auto jt = postings_.find(tokens[i]);
        if (jt == postings_.end()) return {};
        acc = intersect(acc, jt->second);
    }
    return acc;
}

std::size_t CooccurrenceStats::postCount(const std::string& term) const {
    return termPostings(term).size();
}

std::size_t CooccurrenceStats::pairPostCount(const std::string& x,
                                             const std::string& y) const {
    return intersect(termPostings(x), termPostings(y)).size();
}

std::size_t CooccurrenceStats::unionPostCount(const std::vector<std::string>& terms) const {
    if (terms.empty()) throw std::invalid_argument("unionPostCount: empty term set");
    std::set<std::size_t> acc;
    for (const auto& t : terms) {
        auto posts = termPostings(t);
        acc.insert(posts.begin(), posts.end());
    }
    return acc.size();
}

std::size_t CooccurrenceStats::unionPairPostCount(const std::vector<std::string>& terms,
                                                  const std::string& q) const {
    if (terms.empty()) throw std::invalid_argument("unionPairPostCount: empty term set");
    std::set<std::size_t> acc;
    for (const auto& t : terms) {
        auto posts = termPostings(t);
        acc.insert(posts.begin(), posts.end());
    }
    std::size_t hits = 0;
    for (std::size_t p : termPostings(q)) hits += acc.count(p);
    return hits;
}

std::size_t CooccurrenceStats::bigramCount(const std::string& x,
                                           const std::string& y) const {
    auto it = bigrams_.find({x, y});
    return it == bigrams_.end() ? 0 : it->second.count;
}

std::set<std::pair<std::string, std::string>> make_bigrams(const Corpus& corpus) {
    std::set<std::pair<std::string, std::string>> out;
    for (const auto& post : corpus.posts) {
        for (std::size_t i = 0; i + 1 < post.tokens.size(); ++i) {
            if (post.tokens[i] == post.tokens[i + 1]) continue;
            out.insert({post.tokens[i], post.tokens[i + 1]});
        }
    }
    return out;
}

double cond_prob(const CooccurrenceStats& stats, const std::string& x,
                 const std::string& y) {
    std::size_t denom = stats.postCount(y);
    if (denom == 0) return 0.0;
    return static_cast<double>(stats.pairPostCount(x, y)) / static_cast<double>(denom);
}

double union_cond_prob(const CooccurrenceStats& stats,
                       const std::vector<std::string>& parents, const std::string& q) {
    if (parents.empty()) throw std::invalid_argument("union_cond_prob: empty parent set");
    std::size_t denom = stats.postCount(q);
    if (denom == 0) return 0.0;
    return static_cast<double>(stats.unionPairPostCount(parents, q)) /
           static_cast<double>(denom);
}

double union_cond_prob_reverse(const CooccurrenceStats& stats,
                               const std::vector<std::string>& parents,
                               const std::string& q) {
    if (parents.empty()) throw std::invalid_argument("union_cond_prob: empty parent set");
    std::size_t denom = stats.unionPostCount(parents);
    if (denom == 0) return 0.0;
    return static_cast<double>(stats.unionPairPostCount(parents, q)) /
           static_cast<double>(denom);
}

}  // namespace refmine
