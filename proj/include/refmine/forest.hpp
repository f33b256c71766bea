#pragma once

#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "refmine/subsumption.hpp"

namespace refmine {

// Nodes live in an arena inside EntityForest; ids are stable, folded
// duplicates are tombstoned rather than erased.
struct EntityNode {
    std::string value;
    int parent = -1;  // -1 for roots
    int depth = 0;
    std::vector<int> children;
    bool alive = true;
};

class EntityForest {
public:
    const std::vector<int>& roots() const { return roots_; }
    const EntityNode& node(int id) const { return nodes_[id]; }
    std::size_t aliveCount() const;
    bool empty() const;

    // Find-or-create. Roots are unique by value.
    int addRoot(const std::string& value);
    int findRoot(const std::string& value) const;  // -1 if absent

    // Find-or-create a child; throws std::invalid_argument when any token of
    // value already occurs on the root path (cycle attempt).
    int attachChild(int parent, const std::string& value);

    bool hasChild(int parent, const std::string& value) const;
    // True when any token of value occurs in the values on the path from
    // node up to its root, node itself included.
    bool onRootPath(int node, const std::string& value) const;

    // Rewrite a node's value (n-gram merge). If a sibling already carries the
    // new value the two nodes are folded together, children deduplicated
    // recursively; returns the surviving id.
    int setValue(int node, const std::string& value);

    int maxDepth() const;
    std::vector<int> nodesAtDepth(int depth) const;  // sorted by value
    std::set<std::string> values() const;
    std::set<std::string> valueTokens() const;
    std::set<std::string> valuesAtDepth(int depth) const;

    // Copy of the forest cut off below maxDepth (inclusive).
    EntityForest truncated(int maxDepth) const;

    // Checks acyclicity, depth bookkeeping and sibling uniqueness;
    // throws std::logic_error on violation.
    void validate() const;

    std::vector<int> childrenOf(int id) const;  // alive children, sorted by value

private:
    int newNode(const std::string& value, int parent, int depth);
    void fold(int winner, int loser);

    std::vector<EntityNode> nodes_;
    std::vector<int> roots_;
};

// Flattened forest: one tuple per root-to-leaf path, column index = node
// depth, short paths right-padded with empty strings. Tuples sorted.
struct ReferenceSet {
    std::size_t columns = 0;
    std::vector<std::vector<std::string>> tuples;

    bool operator==(const ReferenceSet&) const = default;
};

// Knobs threaded through forest growth. Depths below lockedLevels are
// frozen: no new values and no merges there.
struct GrowthLimits {
    int lockedLevels = 0;
    std::vector<std::string>* log = nullptr;  // rejected attaches/merges, if wanted
};

// Breadth-first child expansion: repeatedly pops frontier nodes and attaches
// every bigram-adjacent term the subsumption rule admits; mutual subsumption
// merges into the frontier node instead. Returns ids added this call.
std::vector<int> expand_children(EntityForest& forest, const CooccurrenceStats& stats,
                                 const SubsumptionConfig& cfg, std::deque<int> frontier,
                                 const GrowthLimits& limits = {});

// One pass of general-token discovery: terms absent from every tree but
// bigram-adjacent to tree nodes are tested with the union rule and, on
// success, attached under every such parent node. Returns ids added.
std::vector<int> general_token_pass(EntityForest& forest, const CooccurrenceStats& stats,
                                    const SubsumptionConfig& cfg,
                                    const GrowthLimits& limits = {});

ReferenceSet flatten(const EntityForest& forest);

// Group-by-prefix inverse of flatten.
EntityForest reconstruct(const ReferenceSet& refset);

// Drop every tree that is only a root.
void prune_singletons(EntityForest& forest);

// Fraction of mined (value, column) placements whose value appears in gold
// but in a different column. Throws std::invalid_argument on empty gold.
double column_homogeneity(const ReferenceSet& mined, const ReferenceSet& gold);

// Serializations: CSV with attribute0..K header and empty string for null;
// JSON Lines with null for missing columns; indented text for the forest.
std::string refset_to_csv(const ReferenceSet& refset,
                          const std::vector<std::string>* columnNames = nullptr);
std::string refset_to_jsonl(const ReferenceSet& refset,
                            const std::vector<std::string>* columnNames = nullptr);
std::string forest_to_text(const EntityForest& forest);

ReferenceSet refset_from_csv(const std::string& text);

}  // namespace refmine
