#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "refmine/corpus.hpp"

namespace refmine {

struct BigramInfo {
    std::size_t count = 0;                 // adjacency occurrences
    std::pair<std::size_t, std::size_t> first{0, 0};  // (post index, token index) of first sighting
};

// Post-level co-occurrence statistics. A term is a space-joined token
// sequence; a post "contains" a term when it contains every constituent
// token (a token appearing twice in one post still counts once).
class CooccurrenceStats {
public:
    CooccurrenceStats() = default;

    std::size_t numPosts() const { return numPosts_; }

    // Posts containing every token of term (sorted post indices).
    std::vector<std::size_t> termPostings(const std::string& term) const;

    std::size_t postCount(const std::string& term) const;
    std::size_t pairPostCount(const std::string& x, const std::string& y) const;

    // Posts containing at least one term of S (S non-empty).
    std::size_t unionPostCount(const std::vector<std::string>& terms) const;
    // Posts containing q and at least one term of S.
    std::size_t unionPairPostCount(const std::vector<std::string>& terms,
                                   const std::string& q) const;

    const std::map<std::pair<std::string, std::string>, BigramInfo>& orderedBigrams() const {
        return bigrams_;
    }

    // Adjacency count for the ordered pair (x, y); 0 if never adjacent.
    std::size_t bigramCount(const std::string& x, const std::string& y) const;

    const std::map<std::string, std::vector<std::size_t>>& postings() const {
        return postings_;
    }

    friend CooccurrenceStats build_stats(const Corpus& corpus, unsigned threads);

private:
    std::size_t numPosts_ = 0;
    std::map<std::string, std::vector<std::size_t>> postings_;
    std::map<std::pair<std::string, std::string>, BigramInfo> bigrams_;
};

// Parallel fold over posts with a deterministic merge: the result is
// identical for any thread count.
CooccurrenceStats build_stats(const Corpus& corpus, unsigned threads = 1);

// Adjacent ordered token pairs over the whole corpus; self-pairs excluded.
std::set<std::pair<std::string, std::string>> make_bigrams(const Corpus& corpus);

// pairPostCount(x, y) / postCount(y); 0 when postCount(y) = 0.
double cond_prob(const CooccurrenceStats& stats, const std::string& x,
                 const std::string& y);

// unionPairPostCount(S, q) / postCount(q); 0 when postCount(q) = 0.
// S must be non-empty.
double union_cond_prob(const CooccurrenceStats& stats,
                       const std::vector<std::string>& parents,
                       const std::string& q);

// The symmetric counterpart P(q | union of S).
double union_cond_prob_reverse(const CooccurrenceStats& stats,
                               const std::vector<std::string>& parents,
                               const std::string& q);

}  // namespace refmine
