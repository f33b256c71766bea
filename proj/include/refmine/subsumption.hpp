#pragma once

#include <optional>
#include <string>
#include <vector>

#include "refmine/stats.hpp"

namespace refmine {

struct SubsumptionConfig {
    double threshold = 0.75;
    std::size_t minCooccur = 1;
};

// x SUBSUMES y: co-occur at least minCooccur posts, P(x|y) >= threshold and
// P(y|x) <= P(x|y). Terms may be merged n-grams; counts are conjunctions.
bool subsumes(const CooccurrenceStats& stats, const std::string& x,
              const std::string& y, const SubsumptionConfig& cfg);

// Union variant: P(union parents | q) >= threshold, P(q | union) <= it,
// with the same min co-occurrence gate. parents must be non-empty.
bool set_subsumes(const CooccurrenceStats& stats,
                  const std::vector<std::string>& parents, const std::string& q,
                  const SubsumptionConfig& cfg);

// Surface form of merging term a with token b: b is appended or prepended
// according to the dominant observed adjacency order, ties broken by the
// earlier first sighting in the corpus scan, then by appending.
std::string merge_value(const CooccurrenceStats& stats, const std::string& a,
                        const std::string& b);

// Merged n-gram when x and y subsume each other, otherwise nothing.
std::optional<std::string> mutual_merge(const CooccurrenceStats& stats,
                                        const std::string& x,
                                        const std::string& y,
                                        const SubsumptionConfig& cfg);

}  // namespace refmine
