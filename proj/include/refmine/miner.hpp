#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "refmine/forest.hpp"

namespace refmine {

struct SeedSet {
    std::set<std::string> seeds;  // normalized via tokenize

    static SeedSet from_lines(const std::vector<std::string>& lines);
};

std::set<std::string> load_seeds(const std::string& path);

struct MineOptions {
    const std::set<std::string>* seeds = nullptr;  // null = unseeded
    bool iterateGeneral = true;                    // general-token fixpoint vs single pass
    int lockedLevels = 0;
    const EntityForest* skeleton = nullptr;        // frozen locked prefix, copied in
    std::vector<std::string>* log = nullptr;
};

// The full construction pipeline on fixed stats: roots and first-level
// children, child expansion to exhaustion, general-token fixpoint,
// singleton pruning. Deterministic.
EntityForest build_forest(const CooccurrenceStats& stats, const SubsumptionConfig& cfg,
                          const MineOptions& opts = {});

struct MineResult {
    EntityForest forest;
    ReferenceSet refset;
};

MineResult mine_seeded(const Corpus& corpus, const SeedSet& seeds,
                       const SubsumptionConfig& cfg, unsigned threads = 1,
                       bool iterateGeneral = true);

MineResult mine_unseeded(const Corpus& corpus, const SubsumptionConfig& cfg,
                         unsigned threads = 1, bool iterateGeneral = true);

// p_A(x) over tokens labeled by column `level` of the reference set; every
// constituent token of a multi-token value counts. Empty map means the level
// cannot be evaluated yet (no labeled occurrence in the prefix).
std::map<std::string, double> label_distribution(const Corpus& prefix,
                                                 const ReferenceSet& refset,
                                                 std::size_t level);

// Shannon entropy in nats. Empty distribution is 0 by convention. Throws
// std::invalid_argument on negative mass or sum off 1 beyond 1e-9.
double entropy(const std::map<std::string, double>& dist);

// H / ln N; N must be >= 2.
double normalized_entropy(double h, std::size_t numPosts);

// |a - b| / ((a + b) / 2), with PD(0, 0) defined as 0.
double percent_diff(double a, double b);

struct LevelLockInfo {
    bool locked = false;
    std::optional<std::size_t> lockedAtPosts;
    std::vector<double> pdHistory;
};

struct LockState {
    std::vector<LevelLockInfo> levels;

    // Locked levels always form the prefix 0..k-1 (parent-before-child).
    int lockedLevels() const;
    LevelLockInfo& level(std::size_t i);
};

struct LockTraceEntry {
    std::size_t iteration = 0;
    std::size_t postsConsumed = 0;
    std::size_t level = 0;
    double h = 0;
    double hNorm = 0;
    double pd = 0;
    bool lockedNow = false;
};

// Which mining snapshot supplies the frozen vocabulary for a fresh lock:
// the earlier side of the comparison that was the PD minimum.
enum class LockSource { None, Prev, PrevPrev };

struct LockDecision {
    int level = -1;  // -1: nothing locked this round
    LockSource source = LockSource::None;
};

// One locking round over prefix snapshots (postsI strictly inside postsJ).
// Evaluates each unlocked level whose parent is locked (or level 0), appends
// its PD, and locks at most one level: immediately on PD = 0, or when PD
// rises above the previous value (greedy minimum, two observations needed).
LockDecision locking_step(std::size_t numLevels, const Corpus& postsI,
                          const Corpus& postsJ, const ReferenceSet& rsI,
                          const ReferenceSet& rsJ, LockState& state,
                          std::size_t iteration,
                          std::vector<LockTraceEntry>* trace = nullptr);

struct IlaResult {
    EntityForest forest;
    ReferenceSet refset;
    bool converged = false;
    std::size_t postsConsumed = 0;
    std::size_t iterations = 0;
    LockState lockState;
    std::vector<LockTraceEntry> trace;
};

using SnapshotCallback =
    std::function<void(std::size_t iteration, std::size_t postsConsumed,
                       const EntityForest& forest, const ReferenceSet& refset)>;

// Iterative Locking Algorithm: batchwise unseeded mining over growing
// prefixes with entropy-driven level locking. Converges when every level of
// the previous snapshot's reference set is locked; if the stream runs out
// first, the last reference set comes back with converged = false.
IlaResult ila_mine(const Corpus& stream, std::size_t batchStart, std::size_t batchStep,
                   const SubsumptionConfig& cfg, unsigned threads = 1,
                   const SnapshotCallback& onSnapshot = nullptr);

std::string lock_trace_to_jsonl(const std::vector<LockTraceEntry>& trace);

}  // namespace refmine
