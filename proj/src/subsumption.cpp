#include "refmine/subsumption.hpp"

#include <stdexcept>

namespace refmine {

bool subsumes(const CooccurrenceStats& stats, const std::string& x,
              const std::string& y, const SubsumptionConfig& cfg) {
    if (stats.pairPostCount(x, y) < cfg.minCooccur) return false;
    double forward = cond_prob(stats, x, y);
    double backward = cond_prob(stats, y, x);
    return forward >= cfg.threshold && backward <= forward;
}

bool set_subsumes(const CooccurrenceStats& stats,
                  const std::vector<std::string>& parents, const std::string& q,
                  const SubsumptionConfig& cfg) {
    if (parents.empty()) throw std::invalid_argument("set_subsumes: empty parent set");
    if (stats.unionPairPostCount(parents, q) < cfg.minCooccur) return false;
    double forward = union_cond_prob(stats, parents, q);
    double backward = union_cond_prob_reverse(stats, parents, q);
    return forward >= cfg.threshold && backward <= forward;
}

std::string merge_value(const CooccurrenceStats& stats, const std::string& a,
                        const std::string& b) {
    std::vector<std::string> tokens = term_tokens(a);
    std::size_t appendCount = stats.bigramCount(tokens.back(), b);
    std::size_t prependCount = stats.bigramCount(b, tokens.front());
    bool append;
    if (appendCount != prependCount) {
        append = appendCount > prependCount;
    } else if (appendCount == 0) {
        append = true;
    } else {
        // tie: earlier first sighting in the corpus scan wins
        const auto& bigrams = stats.orderedBigrams();
        auto fwd = bigrams.find({tokens.back(), b});
        auto rev = bigrams.find({b, tokens.front()});
        append = fwd->second.first <= rev->second.first;
    }
    return append ? a + " " + b : b + " " + a;
}

std::optional<std::string> mutual_merge(const CooccurrenceStats& stats,
                                        const std::string& x, const std::string& y,
                                        const SubsumptionConfig& cfg) {
    if (subsumes(stats, x, y, cfg) && subsumes(stats, y, x, cfg)) {
        return merge_value(stats, x, y);
    }
    return std::nullopt;
}

}  // namespace refmine
