#include "colink/entity.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <set>
#include <unordered_map>

#include "colink/error.hpp"

namespace colink {

AdjacencyMatrix::AdjacencyMatrix(std::vector<std::string> ids) : ids_(std::move(ids)), rows_(ids_.size()) {}

void AdjacencyMatrix::set(std::size_t i, std::size_t j, double value) {
    if (i == j) throw InvariantViolation("adjacency matrix: diagonal entries are not stored");
    if (i >= ids_.size() || j >= ids_.size()) throw InvariantViolation("adjacency matrix: index out of range");
    if (!(value >= 0.0 && value <= 1.0)) throw InvariantViolation("adjacency matrix: value outside [0, 1]");
    auto put = [](std::vector<std::pair<std::size_t, double>>& row, std::size_t col, double v) {
        auto it = std::lower_bound(row.begin(), row.end(), col,
                                   [](const auto& entry, std::size_t c) { return entry.first < c; });
        if (it != row.end() && it->first == col)
            it->second = v;
        else
            row.insert(it, {col, v});
    };
    put(rows_[i], j, value);
    put(rows_[j], i, value);
}

double AdjacencyMatrix::get(std::size_t i, std::size_t j) const {
    const auto& row = rows_.at(i);
    auto it = std::lower_bound(row.begin(), row.end(), j,
                               [](const auto& entry, std::size_t c) { return entry.first < c; });
    return it != row.end() && it->first == j ? it->second : 0.0;
}

std::size_t AdjacencyMatrix::num_entries() const {
    std::size_t total = 0;
    for (const auto& r : rows_) total += r.size();
    return total / 2;
}

AdjacencyMatrix build_adjacency(const KeySetIndex& index) {
    const std::size_t m = index.num_collections();
    AdjacencyMatrix matrix(index.collection_ids());

    struct Slot {
        CollectionIndex collection;
        std::uint32_t candidate;
    };
    std::vector<std::vector<Slot>> holders(index.num_keys());
    for (CollectionIndex i = 0; i < m; ++i) {
        const auto& cands = index.primary_sets(i);
        for (std::uint32_t a = 0; a < cands.size(); ++a)
            for (KeyId z : cands[a]) holders[z].push_back(Slot{i, a});
    }

    std::vector<double> best(m, 0.0);
    std::vector<CollectionIndex> touched;
    std::unordered_map<std::uint64_t, std::uint32_t> counts;
    for (CollectionIndex i = 0; i < m; ++i) {
        const auto& cands = index.primary_sets(i);
        touched.clear();
        for (std::uint32_t a = 0; a < cands.size(); ++a) {
            if (cands[a].empty()) continue;
            counts.clear();
            for (KeyId z : cands[a])
                for (const Slot& s : holders[z])
                    if (s.collection > i) ++counts[(static_cast<std::uint64_t>(s.collection) << 32) | s.candidate];
            for (const auto& [packed, shared] : counts) {
                const auto j = static_cast<CollectionIndex>(packed >> 32);
                const auto b = static_cast<std::uint32_t>(packed & 0xffffffffu);
                const auto size_b = index.primary_sets(j)[b].size();
                const double value = overlap_from_counts(shared, cands[a].size(), size_b);
                if (best[j] == 0.0) touched.push_back(j);
                best[j] = std::max(best[j], value);
            }
        }
        for (CollectionIndex j : touched) {
            matrix.set(i, j, best[j]);
            best[j] = 0.0;
        }
    }
    return matrix;
}

void EntityPartition::normalize() {
    for (auto& c : components) std::sort(c.begin(), c.end());
    components.erase(std::remove_if(components.begin(), components.end(), [](const auto& c) { return c.empty(); }),
                     components.end());
    std::sort(components.begin(), components.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    component_of.clear();
    for (std::size_t c = 0; c < components.size(); ++c)
        for (const auto& id : components[c]) component_of[id] = c;
}

EntityPartition threshold_components(const AdjacencyMatrix& matrix, double tau) {
    const std::size_t n = matrix.size();
    // Visit vertices in id order so components come out ordered by their
    // smallest member.
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return matrix.id(a) < matrix.id(b); });

    EntityPartition partition;
    std::vector<char> visited(n, 0);
    std::deque<std::size_t> queue;
    for (std::size_t start : order) {
        if (visited[start]) continue;
        std::vector<std::string> component;
        visited[start] = 1;
        queue.push_back(start);
        while (!queue.empty()) {
            const std::size_t v = queue.front();
            queue.pop_front();
            component.push_back(matrix.id(v));
            for (const auto& [w, value] : matrix.row(v)) {
                if (value >= tau && !visited[w]) {
                    visited[w] = 1;
                    queue.push_back(w);
                }
            }
        }
        partition.components.push_back(std::move(component));
    }
    partition.normalize();
    return partition;
}

EntityPartition incremental_add(const EntityPartition& partition, const std::string& new_id,
                                const std::vector<std::pair<std::string, double>>& row, double tau) {
    if (partition.component_of.count(new_id)) throw DuplicateCollection("collection already present: " + new_id);
    std::set<std::size_t> reached;
    for (const auto& [other, value] : row) {
        if (value < tau) continue;
        auto it = partition.component_of.find(other);
        if (it != partition.component_of.end()) reached.insert(it->second);
    }
    EntityPartition next;
    std::vector<std::string> merged{new_id};
    for (std::size_t c = 0; c < partition.components.size(); ++c) {
        if (reached.count(c))
            merged.insert(merged.end(), partition.components[c].begin(), partition.components[c].end());
        else
            next.components.push_back(partition.components[c]);
    }
    next.components.push_back(std::move(merged));
    next.normalize();
    return next;
}

std::vector<SweepPoint> threshold_sweep(const AdjacencyMatrix& matrix, std::span<const double> taus) {
    std::vector<SweepPoint> out;
    out.reserve(taus.size());
    for (double tau : taus) {
        const auto partition = threshold_components(matrix, tau);
        const std::size_t k = partition.components.size();
        out.push_back(SweepPoint{tau, k, k == 0 ? 0.0 : static_cast<double>(matrix.size()) / static_cast<double>(k)});
    }
    return out;
}

std::string normalize_collection_name(const std::string& name, const std::regex& version_suffix) {
    std::smatch match;
    if (std::regex_search(name, match, version_suffix) && match.position(0) > 0)
        return name.substr(0, static_cast<std::size_t>(match.position(0)));
    return name;
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string entity_name(const std::vector<std::string>& member_names, const EntityNamingOptions& naming,
                        const std::regex& version_suffix) {
    std::vector<std::string> parts;
    for (const auto& n : member_names) {
        auto norm = normalize_collection_name(n, version_suffix);
        if (std::find(parts.begin(), parts.end(), norm) == parts.end()) parts.push_back(std::move(norm));
    }
    std::string joined;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) joined += naming.separator;
        joined += parts[i];
    }
    if (naming.length_cap == 0 || joined.size() <= naming.length_cap) return joined;
    char suffix[18];
    std::snprintf(suffix, sizeof suffix, "~%08llx",
                  static_cast<unsigned long long>(fnv1a(joined) & 0xffffffffULL));
    const std::size_t keep = naming.length_cap > 9 ? naming.length_cap - 9 : 0;
    return joined.substr(0, keep) + suffix;
}

}  // namespace

EntityGraph build_entity_graph(const EntityPartition& partition, const CollectionGraph& filtered_graph,
                               const EntityNamingOptions& naming, EdgeAggregation aggregation) {
    const std::regex version_suffix(naming.version_suffix_pattern);
    std::unordered_map<std::string, const CollectionNode*> node_by_id;
    for (const auto& node : filtered_graph.nodes) node_by_id.emplace(node.id, &node);

    EntityGraph graph;
    graph.entities.reserve(partition.components.size());
    for (std::size_t c = 0; c < partition.components.size(); ++c) {
        const auto& members = partition.components[c];
        Entity e;
        e.id = "entity/" + members.front();
        e.members = members;
        std::vector<std::string> names;
        std::map<std::string, std::size_t> subsystem_votes;
        for (const auto& id : members) {
            auto it = node_by_id.find(id);
            names.push_back(it != node_by_id.end() ? it->second->name : id);
            if (it != node_by_id.end()) ++subsystem_votes[it->second->subsystem];
            graph.entity_of[id] = c;
        }
        e.name = entity_name(names, naming, version_suffix);
        std::size_t best_votes = 0;
        for (const auto& [sub, votes] : subsystem_votes) {
            if (votes > best_votes) {
                best_votes = votes;
                e.subsystem = sub;
            }
        }
        graph.entities.push_back(std::move(e));
    }

    std::map<std::pair<std::size_t, std::size_t>, EntityEdge> merged;
    for (const auto& link : filtered_graph.edges) {
        const auto& a = filtered_graph.nodes[link.u].id;
        const auto& b = filtered_graph.nodes[link.v].id;
        auto ia = graph.entity_of.find(a);
        auto ib = graph.entity_of.find(b);
        if (ia == graph.entity_of.end() || ib == graph.entity_of.end())
            throw InvariantViolation("entity graph: partition does not cover collection " +
                                     (ia == graph.entity_of.end() ? a : b));
        if (ia->second == ib->second) continue;
        const auto key = std::minmax(ia->second, ib->second);
        auto [it, inserted] = merged.try_emplace(key);
        auto& edge = it->second;
        if (inserted) {
            edge.u = key.first;
            edge.v = key.second;
            edge.jaccard = link.jaccard;
            edge.overlap = link.overlap;
            edge.pmi = link.pmi;
        } else {
            edge.jaccard = std::max(edge.jaccard, link.jaccard);
            edge.overlap = std::max(edge.overlap, link.overlap);
            edge.pmi = std::max(edge.pmi, link.pmi);
        }
        edge.n = aggregation == EdgeAggregation::SumMax ? edge.n + link.n : std::max(edge.n, link.n);
        ++edge.member_links;
    }
    graph.edges.reserve(merged.size());
    for (auto& [key, edge] : merged) graph.edges.push_back(edge);
    return graph;
}

std::string_view to_string(EdgeAggregation a) noexcept {
    return a == EdgeAggregation::SumMax ? "sum_max" : "max";
}

EdgeAggregation parse_edge_aggregation(std::string_view text) {
    if (text == "sum_max") return EdgeAggregation::SumMax;
    if (text == "max") return EdgeAggregation::Max;
    throw ValidationError("edge_aggregation", "expected sum_max or max, got '" + std::string(text) + "'");
}

}  // namespace colink
