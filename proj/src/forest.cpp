#include "refmine/forest.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace refmine {

namespace {

void append_log(const GrowthLimits& limits, const std::string& msg) {
    if (limits.log) limits.log->push_back(msg);
}

}  // namespace

std::size_t EntityForest::aliveCount() const {
    std::size_t n = 0;
    for (const auto& node : nodes_) {
        if (node.alive) ++n;
    }
    return n;
}

bool EntityForest::empty() const {
    for (int r : roots_) {
        if (nodes_[r].alive) return false;
    }
    return true;
}

int EntityForest::newNode(const std::string& value, int parent, int depth) {
    nodes_.push_back(EntityNode{value, parent, depth, {}, true});
    return static_cast<int>(nodes_.size()) - 1;
}

int EntityForest::findRoot(const std::string& value) const {
    for (int r : roots_) {
        if (nodes_[r].alive && nodes_[r].value == value) return r;
    }
    return -1;
}

int EntityForest::addRoot(const std::string& value) {
    int existing = findRoot(value);
    if (existing >= 0) return existing;
    int id = newNode(value, -1, 0);
    roots_.push_back(id);
    return id;
}

bool EntityForest::hasChild(int parent, const std::string& value) const {
    for (int c : nodes_[parent].children) {
        if (nodes_[c].alive && nodes_[c].value == value) return true;
    }
    return false;
}

bool EntityForest::onRootPath(int node, const std::string& value) const {
    std::vector<std::string> tokens = term_tokens(value);
    for (int cur = node; cur >= 0; cur = nodes_[cur].parent) {
        for (const auto& pathTok : term_tokens(nodes_[cur].value)) {
            for (const auto& tok : tokens) {
                if (tok == pathTok) return true;
            }
        }
    }
    return false;
}

int EntityForest::attachChild(int parent, const std::string& value) {
    for (int c : nodes_[parent].children) {
        if (nodes_[c].alive && nodes_[c].value == value) return c;
    }
    if (onRootPath(parent, value)) {
        throw std::invalid_argument("attachChild: cycle attempt, '" + value +
                                    "' already on the root path of '" +
                                    nodes_[parent].value + "'");
    }
    int id = newNode(value, parent, nodes_[parent].depth + 1);
    nodes_[parent].children.push_back(id);
    return id;
}

void EntityForest::fold(int winner, int loser) {
    // Move the loser's children under the winner, merging value collisions.
    std::vector<int> moved = nodes_[loser].children;
    nodes_[loser].children.clear();
    nodes_[loser].alive = false;
    for (int c : moved) {
        if (!nodes_[c].alive) continue;
        bool merged = false;
        for (int w : nodes_[winner].children) {
            if (nodes_[w].alive && nodes_[w].value == nodes_[c].value) {
                fold(w, c);
                merged = true;
                break;
            }
        }
        if (!merged) {
            nodes_[c].parent = winner;
            nodes_[winner].children.push_back(c);
            // subtree depths follow the new parent
            std::vector<int> stack{c};
            while (!stack.empty()) {
                int id = stack.back();
                stack.pop_back();
                nodes_[id].depth =
                    nodes_[id].parent < 0 ? 0 : nodes_[nodes_[id].parent].depth + 1;
                for (int k : nodes_[id].children) stack.push_back(k);
            }
        }
    }
}

int EntityForest::setValue(int node, const std::string& value) {
    int parent = nodes_[node].parent;
    int survivor = -1;
    if (parent < 0) {
        for (int r : roots_) {
            if (r != node && nodes_[r].alive && nodes_[r].value == value) survivor = r;
        }
    } else {
        for (int c : nodes_[parent].children) {
            if (c != node && nodes_[c].alive && nodes_[c].value == value) survivor = c;
        }
    }
    if (survivor >= 0) {
        fold(survivor, node);
        return survivor;
    }
    nodes_[node].value = value;
    return node;
}

int EntityForest::maxDepth() const {
    int maxd = 0;
    for (const auto& node : nodes_) {
        if (node.alive && node.depth > maxd) maxd = node.depth;
    }
    return maxd;
}

std::vector<int> EntityForest::childrenOf(int id) const {
    std::vector<int> out;
    for (int c : nodes_[id].children) {
        if (nodes_[c].alive) out.push_back(c);
    }
    std::sort(out.begin(), out.end(),
              [this](int a, int b) { return nodes_[a].value < nodes_[b].value; });
    return out;
}

std::vector<int> EntityForest::nodesAtDepth(int depth) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].alive && nodes_[i].depth == depth) out.push_back(static_cast<int>(i));
    }
    std::sort(out.begin(), out.end(),
              [this](int a, int b) { return nodes_[a].value < nodes_[b].value; });
    return out;
}

std::set<std::string> EntityForest::values() const {
    std::set<std::string> out;
    for (const auto& node : nodes_) {
        if (node.alive) out.insert(node.value);
    }
    return out;
}

std::set<std::string> EntityForest::valueTokens() const {
    std::set<std::string> out;
    for (const auto& node : nodes_) {
        if (!node.alive) continue;
        for (auto& tok : term_tokens(node.value)) out.insert(std::move(tok));
    }
    return out;
}

std::set<std::string> EntityForest::valuesAtDepth(int depth) const {
    std::set<std::string> out;
    for (const auto& node : nodes_) {
        if (node.alive && node.depth == depth) out.insert(node.value);
    }
    return out;
}

EntityForest EntityForest::truncated(int maxDepth) const {
    EntityForest out;
    std::function<void(int, int)> copy = [&](int src, int dstParent) {
        if (!nodes_[src].alive || nodes_[src].depth > maxDepth) return;
        int dst = dstParent < 0 ? out.addRoot(nodes_[src].value)
                                : out.attachChild(dstParent, nodes_[src].value);
        for (int c : childrenOf(src)) copy(c, dst);
    };
    std::vector<int> sortedRoots = nodesAtDepth(0);
    for (int r : sortedRoots) copy(r, -1);
    return out;
}

void EntityForest::validate() const {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const auto& node = nodes_[i];
        if (!node.alive) continue;
        if (node.parent >= 0) {
            if (!nodes_[node.parent].alive) throw std::logic_error("dead parent");
            if (node.depth != nodes_[node.parent].depth + 1) {
                throw std::logic_error("depth mismatch at node " + node.value);
            }
            if (onRootPath(node.parent, node.value)) {
                throw std::logic_error("cycle: " + node.value + " repeats on its root path");
            }
        } else if (node.depth != 0) {
            throw std::logic_error("root with nonzero depth");
        }
        std::set<std::string> seen;
        for (int c : node.children) {
            if (!nodes_[c].alive) continue;
            if (nodes_[c].parent != static_cast<int>(i)) {
                throw std::logic_error("child/parent link mismatch");
            }
            if (!seen.insert(nodes_[c].value).second) {
                throw std::logic_error("duplicate sibling value " + nodes_[c].value);
            }
        }
    }
    std::set<std::string> rootValues;
    for (int r : roots_) {
        if (nodes_[r].alive && !rootValues.insert(nodes_[r].value).second) {
            throw std::logic_error("duplicate root value " + nodes_[r].value);
        }
    }
}

std::vector<int> expand_children(EntityForest& forest, const CooccurrenceStats& stats,
                                 const SubsumptionConfig& cfg, std::deque<int> frontier,
                                 const GrowthLimits& limits) {
    std::vector<int> added;
    while (!frontier.empty()) {
        int s = frontier.front();
        frontier.pop_front();
        if (!forest.node(s).alive) continue;

        const std::string value = forest.node(s).value;
        std::set<std::string> own;
        for (auto& tok : term_tokens(value)) own.insert(std::move(tok));

        // Candidate children: ordered-bigram successors of any constituent token.
        std::set<std::string> candidates;
        for (const auto& [pair, info] : stats.orderedBigrams()) {
            if (own.count(pair.first) && !own.count(pair.second)) {
                candidates.insert(pair.second);
            }
        }

        bool merged = false;
        for (const auto& t : candidates) {
            if (forest.hasChild(s, t)) continue;
            if (forest.onRootPath(s, t)) {
                append_log(limits, "cycle rejected: " + t + " under " + value);
                continue;
            }
            if (!subsumes(stats, value, t, cfg)) continue;
            if (subsumes(stats, t, value, cfg)) {
                // mutual subsumption: merge into the node itself
                if (forest.node(s).depth < limits.lockedLevels) {
                    append_log(limits, "merge blocked by lock: " + value + " + " + t);
                    continue;
                }
                std::string mergedValue = merge_value(stats, value, t);
                if (forest.node(s).parent >= 0 &&
                    forest.onRootPath(forest.node(s).parent, mergedValue)) {
                    append_log(limits, "merge rejected (cycle): " + mergedValue);
                    continue;
                }
                int survivor = forest.setValue(s, mergedValue);
                frontier.push_back(survivor);
                merged = true;
                break;  // candidate set is stale now
            }
            if (forest.node(s).depth + 1 < limits.lockedLevels) {
                append_log(limits, "attach blocked by lock: " + t + " under " + value);
                continue;
            }
            int child = forest.attachChild(s, t);
            added.push_back(child);
            frontier.push_back(child);
        }
        (void)merged;
    }
    return added;
}

std::vector<int> general_token_pass(EntityForest& forest, const CooccurrenceStats& stats,
                                    const SubsumptionConfig& cfg,
                                    const GrowthLimits& limits) {
    std::vector<int> added;
    if (forest.empty()) return added;

    // Snapshot of the trees at pass start; chained general tokens need the
    // caller to run further passes.
    std::set<std::string> treeTokens = forest.valueTokens();
    std::map<std::string, std::set<std::string>> tokenToValues;
    for (const auto& v : forest.values()) {
        for (const auto& tok : term_tokens(v)) tokenToValues[tok].insert(v);
    }

    // Group each outside term q with the full set of tree values it follows.
    std::map<std::string, std::set<std::string>> parentsOf;
    for (const auto& [pair, info] : stats.orderedBigrams()) {
        const auto& [a, q] = pair;
        if (treeTokens.count(q)) continue;
        auto it = tokenToValues.find(a);
        if (it == tokenToValues.end()) continue;
        auto& parents = parentsOf[q];
        parents.insert(it->second.begin(), it->second.end());
    }

    for (const auto& [q, parentSet] : parentsOf) {
        std::vector<std::string> parents(parentSet.begin(), parentSet.end());
        if (!set_subsumes(stats, parents, q, cfg)) continue;
        // q becomes a child of every node carrying a parent value
        for (int depth = 0; depth <= forest.maxDepth(); ++depth) {
            for (int id : forest.nodesAtDepth(depth)) {
                if (!parentSet.count(forest.node(id).value)) continue;
                if (forest.hasChild(id, q)) continue;
                if (forest.onRootPath(id, q)) {
                    append_log(limits, "cycle rejected: " + q + " under " +
                                           forest.node(id).value);
                    continue;
                }
                if (forest.node(id).depth + 1 < limits.lockedLevels) {
                    append_log(limits, "attach blocked by lock: " + q + " under " +
                                           forest.node(id).value);
                    continue;
                }
                added.push_back(forest.attachChild(id, q));
            }
        }
    }
    return added;
}

ReferenceSet flatten(const EntityForest& forest) {
    ReferenceSet refset;
    int maxd = -1;
    std::vector<std::vector<std::string>> paths;
    std::vector<std::string> current;
    std::function<void(int)> walk = [&](int id) {
        current.push_back(forest.node(id).value);
        auto children = forest.childrenOf(id);
        if (children.empty()) {
            paths.push_back(current);
            maxd = std::max(maxd, static_cast<int>(current.size()) - 1);
        } else {
            for (int c : children) walk(c);
        }
        current.pop_back();
    };
    for (int r : forest.nodesAtDepth(0)) walk(r);
    if (paths.empty()) return refset;

    refset.columns = static_cast<std::size_t>(maxd) + 1;
    for (auto& path : paths) {
        path.resize(refset.columns);  // right-pad with empty strings
        refset.tuples.push_back(std::move(path));
    }
    std::sort(refset.tuples.begin(), refset.tuples.end());
    refset.tuples.erase(std::unique(refset.tuples.begin(), refset.tuples.end()),
                        refset.tuples.end());
    return refset;
}

EntityForest reconstruct(const ReferenceSet& refset) {
    EntityForest forest;
    for (const auto& tuple : refset.tuples) {
        int parent = -1;
        for (const auto& value : tuple) {
            if (value.empty()) break;
            parent = parent < 0 ? forest.addRoot(value) : forest.attachChild(parent, value);
        }
    }
    return forest;
}

void prune_singletons(EntityForest& forest) {
    // Rebuild without childless roots; ids are not stable across this call.
    EntityForest pruned;
    std::function<void(int, int)> copy = [&](int src, int dstParent) {
        int dst = dstParent < 0 ? pruned.addRoot(forest.node(src).value)
                                : pruned.attachChild(dstParent, forest.node(src).value);
        for (int c : forest.childrenOf(src)) copy(c, dst);
    };
    for (int r : forest.nodesAtDepth(0)) {
        if (!forest.childrenOf(r).empty()) copy(r, -1);
    }
    forest = std::move(pruned);
}

double column_homogeneity(const ReferenceSet& mined, const ReferenceSet& gold) {
    if (gold.tuples.empty()) throw std::invalid_argument("column_homogeneity: empty gold");
    std::map<std::string, std::set<std::size_t>> goldColumns;
    for (const auto& tuple : gold.tuples) {
        for (std::size_t c = 0; c < tuple.size(); ++c) {
            if (!tuple[c].empty()) goldColumns[tuple[c]].insert(c);
        }
    }
    std::set<std::pair<std::string, std::size_t>> placements;
    for (const auto& tuple : mined.tuples) {
        for (std::size_t c = 0; c < tuple.size(); ++c) {
            if (!tuple[c].empty()) placements.insert({tuple[c], c});
        }
    }
    std::size_t matchable = 0;
    std::size_t misplaced = 0;
    for (const auto& [value, column] : placements) {
        auto it = goldColumns.find(value);
        if (it == goldColumns.end()) continue;
        ++matchable;
        if (!it->second.count(column)) ++misplaced;
    }
    if (matchable == 0) return 0.0;
    return static_cast<double>(misplaced) / static_cast<double>(matchable);
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

std::string column_label(std::size_t i, const std::vector<std::string>* names) {
    if (names && i < names->size() && !(*names)[i].empty()) return (*names)[i];
    return "attribute" + std::to_string(i);
}

}  // namespace

std::string refset_to_csv(const ReferenceSet& refset,
                          const std::vector<std::string>* columnNames) {
    std::ostringstream out;
    for (std::size_t c = 0; c < refset.columns; ++c) {
        if (c) out << ',';
        out << csv_escape(column_label(c, columnNames));
    }
    out << '\n';
    for (const auto& tuple : refset.tuples) {
        for (std::size_t c = 0; c < refset.columns; ++c) {
            if (c) out << ',';
            out << csv_escape(tuple[c]);
        }
        out << '\n';
    }
    return out.str();
}

std::string refset_to_jsonl(const ReferenceSet& refset,
                            const std::vector<std::string>* columnNames) {
    std::ostringstream out;
    for (const auto& tuple : refset.tuples) {
        nlohmann::ordered_json j;
        for (std::size_t c = 0; c < refset.columns; ++c) {
            if (tuple[c].empty()) j[column_label(c, columnNames)] = nullptr;
            else j[column_label(c, columnNames)] = tuple[c];
        }
        out << j.dump() << '\n';
    }
    return out.str();
}

std::string forest_to_text(const EntityForest& forest) {
    std::ostringstream out;
    std::function<void(int)> walk = [&](int id) {
        for (int i = 0; i < forest.node(id).depth; ++i) out << "  ";
        out << forest.node(id).value << '\n';
        for (int c : forest.childrenOf(id)) walk(c);
    };
    for (int r : forest.nodesAtDepth(0)) walk(r);
    return out.str();
}

ReferenceSet refset_from_csv(const std::string& text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            row.push_back(std::move(field));
            field.clear();
        } else if (c == '\n') {
            row.push_back(std::move(field));
            field.clear();
            rows.push_back(std::move(row));
            row.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    if (!field.empty() || !row.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    ReferenceSet refset;
    if (rows.empty()) return refset;
    refset.columns = rows[0].size();  // header row
    for (std::size_t i = 1; i < rows.size(); ++i) {
        rows[i].resize(refset.columns);
        refset.tuples.push_back(std::move(rows[i]));
    }
    std::sort(refset.tuples.begin(), refset.tuples.end());
    return refset;
}

}  // namespace refmine
