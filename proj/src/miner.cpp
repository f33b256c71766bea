#include "refmine/miner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace refmine {

SeedSet SeedSet::from_lines(const std::vector<std::string>& lines) {
    SeedSet out;
    for (const auto& line : lines) {
        auto tokens = tokenize(line);
        if (tokens.empty()) continue;
        std::string term = tokens[0];
        for (std::size_t i = 1; i < tokens.size(); ++i) term += " " + tokens[i];
        out.seeds.insert(std::move(term));
    }
    return out;
}

std::set<std::string> load_seeds(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open seeds file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return SeedSet::from_lines(lines).seeds;
}

namespace {

// Singleton-pruning variant that spares a keep set of root values (locked
// roots must survive even when a smaller snapshot gave them no children).
void prune_singletons_keeping(EntityForest& forest, const std::set<std::string>& keep) {
    EntityForest pruned;
    std::function<void(int, int)> copy = [&](int src, int dstParent) {
        int dst = dstParent < 0 ? pruned.addRoot(forest.node(src).value)
                                : pruned.attachChild(dstParent, forest.node(src).value);
        for (int c : forest.childrenOf(src)) copy(c, dst);
    };
    for (int r : forest.nodesAtDepth(0)) {
        if (!forest.childrenOf(r).empty() || keep.count(forest.node(r).value)) copy(r, -1);
    }
    forest = std::move(pruned);
}

}  // namespace

EntityForest build_forest(const CooccurrenceStats& stats, const SubsumptionConfig& cfg,
                          const MineOptions& opts) {
    EntityForest forest;
    std::set<std::string> skeletonRoots;
    if (opts.skeleton) {
        forest = *opts.skeleton;
        skeletonRoots = forest.valuesAtDepth(0);
    }
    GrowthLimits limits{opts.lockedLevels, opts.log};
    std::deque<int> frontier;

    if (opts.lockedLevels == 0) {
        // Which terms ever fire as subsumer / get strictly subsumed; a term
        // strictly below another never roots its own tree.
        std::set<std::string> firesAsParent;
        std::set<std::string> strictlySubsumed;
        for (const auto& [pair, info] : stats.orderedBigrams()) {
            const auto& [x, y] = pair;
            if (!subsumes(stats, x, y, cfg)) continue;
            firesAsParent.insert(x);
            if (!subsumes(stats, y, x, cfg)) strictlySubsumed.insert(y);
        }

        std::set<std::string> rootTokens;  // constituents of existing root values
        auto noteRoot = [&](int id) {
            for (const auto& tok : term_tokens(forest.node(id).value)) rootTokens.insert(tok);
        };
        for (int r : forest.nodesAtDepth(0)) noteRoot(r);

        for (const auto& [pair, info] : stats.orderedBigrams()) {
            const auto& [x, y] = pair;
            if (!subsumes(stats, x, y, cfg)) continue;
            bool mutual = subsumes(stats, y, x, cfg);

            int root;
            if (rootTokens.count(x)) {
                root = -1;  // locate the root whose value contains x
                for (int r : forest.nodesAtDepth(0)) {
                    for (const auto& tok : term_tokens(forest.node(r).value)) {
                        if (tok == x) { root = r; break; }
                    }
                    if (root >= 0) break;
                }
            } else {
                if (opts.seeds) {
                    if (!opts.seeds->count(x)) continue;
                } else {
                    if (!firesAsParent.count(x) || strictlySubsumed.count(x)) continue;
                }
                root = forest.addRoot(x);
                noteRoot(root);
            }
            if (root < 0) continue;

            if (mutual) {
                // Seeded roots keep their seed value; merged roots only
                // arise in unseeded mode.
                if (opts.seeds) continue;
                if (rootTokens.count(y)) continue;
                std::string merged = merge_value(stats, forest.node(root).value, y);
                root = forest.setValue(root, merged);
                noteRoot(root);
                frontier.push_back(root);
            } else {
                if (rootTokens.count(y)) continue;
                if (!forest.hasChild(root, y)) {
                    int child = forest.attachChild(root, y);
                    frontier.push_back(child);
                }
            }
        }
    } else {
        // Locked prefix is frozen; growth resumes under its deepest level.
        for (int id : forest.nodesAtDepth(opts.lockedLevels - 1)) frontier.push_back(id);
    }

    expand_children(forest, stats, cfg, std::move(frontier), limits);

    if (opts.iterateGeneral) {
        while (!general_token_pass(forest, stats, cfg, limits).empty()) {
        }
    }

    if (skeletonRoots.empty()) {
        prune_singletons(forest);
    } else {
        prune_singletons_keeping(forest, skeletonRoots);
    }
    return forest;
}

MineResult mine_seeded(const Corpus& corpus, const SeedSet& seeds,
                       const SubsumptionConfig& cfg, unsigned threads,
                       bool iterateGeneral) {
    if (seeds.seeds.empty()) throw std::invalid_argument("mine_seeded: empty seed set");
    CooccurrenceStats stats = build_stats(corpus, threads);
    MineOptions opts;
    opts.seeds = &seeds.seeds;
    opts.iterateGeneral = iterateGeneral;
    MineResult result;
    result.forest = build_forest(stats, cfg, opts);
    result.refset = flatten(result.forest);
    return result;
}

MineResult mine_unseeded(const Corpus& corpus, const SubsumptionConfig& cfg,
                         unsigned threads, bool iterateGeneral) {
    CooccurrenceStats stats = build_stats(corpus, threads);
    MineOptions opts;
    opts.iterateGeneral = iterateGeneral;
    MineResult result;
    result.forest = build_forest(stats, cfg, opts);
    result.refset = flatten(result.forest);
    return result;
}

std::map<std::string, double> label_distribution(const Corpus& prefix,
                                                 const ReferenceSet& refset,
                                                 std::size_t level) {
    std::set<std::string> labelTokens;
    for (const auto& tuple : refset.tuples) {
        if (level >= tuple.size() || tuple[level].empty()) continue;
        for (const auto& tok : term_tokens(tuple[level])) labelTokens.insert(tok);
    }
    std::map<std::string, double> counts;
    double total = 0;
    for (const auto& post : prefix.posts) {
        for (const auto& tok : post.tokens) {
            if (labelTokens.count(tok)) {
                counts[tok] += 1.0;
                total += 1.0;
            }
        }
    }
    if (total == 0) return {};
    for (auto& [tok, c] : counts) c /= total;
    return counts;
}

double entropy(const std::map<std::string, double>& dist) {
    if (dist.empty()) return 0.0;
    double sum = 0;
    for (const auto& [tok, p] : dist) {
        if (p < 0) throw std::invalid_argument("entropy: negative mass");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("entropy: distribution sums to " + std::to_string(sum));
    }
    double h = 0;
    for (const auto& [tok, p] : dist) {
        if (p > 0) h -= p * std::log(p);
    }
    return h;
}

double normalized_entropy(double h, std::size_t numPosts) {
    if (numPosts < 2) {
        throw std::invalid_argument("normalized_entropy: need at least 2 posts");
    }
    return h / std::log(static_cast<double>(numPosts));
}

double percent_diff(double a, double b) {
    if (a == 0.0 && b == 0.0) return 0.0;
    return std::abs(a - b) / ((a + b) / 2.0);
}

int LockState::lockedLevels() const {
    int n = 0;
    while (n < static_cast<int>(levels.size()) && levels[n].locked) ++n;
    return n;
}

LevelLockInfo& LockState::level(std::size_t i) {
    if (i >= levels.size()) levels.resize(i + 1);
    return levels[i];
}

LockDecision locking_step(std::size_t numLevels, const Corpus& postsI,
                          const Corpus& postsJ, const ReferenceSet& rsI,
                          const ReferenceSet& rsJ, LockState& state,
                          std::size_t iteration, std::vector<LockTraceEntry>* trace) {
    LockDecision decision;
    if (numLevels > state.levels.size()) state.levels.resize(numLevels);

    for (std::size_t level = 0; level < numLevels; ++level) {
        auto& info = state.levels[level];
        if (info.locked) continue;
        bool parentLocked = level == 0 || state.levels[level - 1].locked;
        if (!parentLocked) continue;

        auto distI = label_distribution(postsI, rsI, level);
        auto distJ = label_distribution(postsJ, rsJ, level);
        if (distI.empty() || distJ.empty()) continue;  // cannot evaluate yet

        double hI = entropy(distI);
        double hJ = entropy(distJ);
        double hnI = normalized_entropy(hI, postsI.size());
        double hnJ = normalized_entropy(hJ, postsJ.size());
        double pd = percent_diff(hnI, hnJ);

        bool lockNow = false;
        LockSource source = LockSource::None;
        if (pd == 0.0) {
            lockNow = true;
            source = LockSource::Prev;
        } else if (!info.pdHistory.empty() && pd > info.pdHistory.back()) {
            // the previous PD was a local minimum
            lockNow = true;
            source = LockSource::PrevPrev;
        }
        info.pdHistory.push_back(pd);

        if (trace) {
            trace->push_back(LockTraceEntry{iteration, postsJ.size(), level, hJ, hnJ,
                                            pd, lockNow});
        }
        if (lockNow) {
            info.locked = true;
            info.lockedAtPosts = postsI.size();  // refined by the ILA driver
            decision.level = static_cast<int>(level);
            decision.source = source;
            break;  // one lock per round keeps the skeleton snapshot unambiguous
        }
        break;  // only the boundary level is ever evaluable under prefix locking
    }
    return decision;
}

IlaResult ila_mine(const Corpus& stream, std::size_t batchStart, std::size_t batchStep,
                   const SubsumptionConfig& cfg, unsigned threads,
                   const SnapshotCallback& onSnapshot) {
    if (batchStart < 1 || batchStep < 1) {
        throw std::invalid_argument("ila_mine: batch sizes must be >= 1");
    }
    IlaResult res;
    if (stream.empty()) return res;  // empty reference set, not converged

    struct Snap {
        std::size_t n = 0;
        Corpus prefix;
        EntityForest forest;
        ReferenceSet refset;
    };
    std::deque<Snap> snaps;

    auto mineSnapshot = [&](std::size_t n, int lockedLevels,
                            const EntityForest* skeleton) -> Snap {
        Snap snap;
        snap.n = n;
        snap.prefix = stream.prefix(n);
        CooccurrenceStats stats = build_stats(snap.prefix, threads);
        MineOptions opts;
        opts.lockedLevels = lockedLevels;
        opts.skeleton = skeleton;
        snap.forest = build_forest(stats, cfg, opts);
        snap.refset = flatten(snap.forest);
        return snap;
    };

    std::size_t request = batchStart;
    int lockedLevels = 0;
    EntityForest skeleton;

    snaps.push_back(mineSnapshot(std::min(request, stream.size()), 0, nullptr));
    if (onSnapshot) onSnapshot(0, snaps.back().n, snaps.back().forest, snaps.back().refset);

    std::size_t iteration = 0;
    while (true) {
        if (snaps.back().n >= stream.size()) break;  // stream exhausted, not converged

        ++iteration;
        request += batchStep;
        std::size_t n = std::min(request, stream.size());
        Snap cur = mineSnapshot(n, lockedLevels,
                                lockedLevels > 0 ? &skeleton : nullptr);
        if (onSnapshot) onSnapshot(iteration, n, cur.forest, cur.refset);

        const Snap& prev = snaps.back();
        std::size_t numLevels = prev.refset.columns;
        LockDecision decision = locking_step(numLevels, prev.prefix, cur.prefix,
                                             prev.refset, cur.refset, res.lockState,
                                             iteration, &res.trace);
        snaps.push_back(std::move(cur));
        while (snaps.size() > 3) snaps.pop_front();

        if (decision.level >= 0) {
            lockedLevels = decision.level + 1;
            // Freeze the vocabulary from the earlier side of the minimal
            // comparison: the previous snapshot when PD hit 0 now, the one
            // before when the previous PD was the minimum.
            std::size_t idx = snaps.size() - 2;
            if (decision.source == LockSource::PrevPrev && snaps.size() >= 3) {
                idx = snaps.size() - 3;
            }
            res.lockState.levels[static_cast<std::size_t>(decision.level)].lockedAtPosts =
                snaps[idx].n;
            skeleton = snaps[idx].forest.truncated(lockedLevels - 1);
        }

        if (numLevels > 0 && lockedLevels >= static_cast<int>(numLevels)) {
            res.converged = true;
            res.forest = skeleton;
            res.refset = flatten(skeleton);
            res.postsConsumed = snaps.back().n;
            res.iterations = iteration;
            return res;
        }
    }

    res.converged = false;
    res.forest = snaps.back().forest;
    res.refset = snaps.back().refset;
    res.postsConsumed = snaps.back().n;
    res.iterations = iteration;
    return res;
}

std::string lock_trace_to_jsonl(const std::vector<LockTraceEntry>& trace) {
    std::ostringstream out;
    for (const auto& e : trace) {
        nlohmann::ordered_json j;
        j["iteration"] = e.iteration;
        j["postsConsumed"] = e.postsConsumed;
        j["level"] = e.level;
        j["H"] = e.h;
        j["H_N"] = e.hNorm;
        j["PD"] = e.pd;
        j["lockedNow"] = e.lockedNow;
        out << j.dump() << '\n';
    }
    return out.str();
}

}  // namespace refmine
