#pragma once

// Merging collections that describe the same entity: primary-key overlap
// matrix, thresholded connected components, incremental insertion and the
// contracted entity graph.

#include <map>
#include <optional>
#include <regex>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "colink/key_index.hpp"
#include "colink/link_discovery.hpp"

namespace colink {

// Sparse symmetric matrix over collection ids with values in [0, 1]; the
// diagonal is never stored.
class AdjacencyMatrix {
public:
    AdjacencyMatrix() = default;
    explicit AdjacencyMatrix(std::vector<std::string> ids);

    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::string& id(std::size_t i) const { return ids_[i]; }

    // Throws InvariantViolation for i == j or a value outside [0, 1].
    void set(std::size_t i, std::size_t j, double value);
    double get(std::size_t i, std::size_t j) const;
    // Neighbours of i sorted by index.
    const std::vector<std::pair<std::size_t, double>>& row(std::size_t i) const { return rows_[i]; }
    std::size_t num_entries() const;

private:
    std::vector<std::string> ids_;
    std::vector<std::vector<std::pair<std::size_t, double>>> rows_;
};

// a[i][j] = max over candidate primary-key set pairs of the overlap
// coefficient; only pairs with a non-empty intersection get an entry.
AdjacencyMatrix build_adjacency(const KeySetIndex& index);

struct EntityPartition {
    // Each component sorted by id; components ordered by their smallest id.
    std::vector<std::vector<std::string>> components;
    std::unordered_map<std::string, std::size_t> component_of;

    std::size_t num_collections() const noexcept { return component_of.size(); }
    // Sorts members and components and rebuilds `component_of`.
    void normalize();
    friend bool operator==(const EntityPartition& a, const EntityPartition& b) {
        return a.components == b.components;
    }
};

// Connected components over edges with a[i][j] >= tau, found by BFS.
EntityPartition threshold_components(const AdjacencyMatrix& matrix, double tau);

// Adds one collection given its matrix entries towards already-present
// collections; every component it reaches at >= tau is merged with it.
// Throws DuplicateCollection.
EntityPartition incremental_add(const EntityPartition& partition, const std::string& new_id,
                                const std::vector<std::pair<std::string, double>>& row, double tau);

struct SweepPoint {
    double tau = 0.0;
    std::size_t num_components = 0;
    double avg_component_size = 0.0;
};

std::vector<SweepPoint> threshold_sweep(const AdjacencyMatrix& matrix, std::span<const double> taus);

struct EntityNamingOptions {
    std::string separator = "+";
    std::size_t length_cap = 64;
    std::string version_suffix_pattern = R"(([_-]\d{4}-?\d{2}-?\d{2}|[_-]v?\d+)$)";
};

// Strips one trailing version suffix ("orders_v2" -> "orders").
std::string normalize_collection_name(const std::string& name, const std::regex& version_suffix);

struct Entity {
    std::string id;
    std::string name;
    std::string subsystem;             // most common member subsystem
    std::vector<std::string> members;  // collection ids, sorted
    friend bool operator==(const Entity&, const Entity&) = default;
};

struct EntityEdge {
    std::size_t u = 0;  // entity indices, u < v
    std::size_t v = 0;
    std::size_t n = 0;  // summed over member links
    double jaccard = 0.0;
    double overlap = 0.0;
    double pmi = 0.0;  // per-metric maximum over member links
    std::size_t member_links = 0;
    friend bool operator==(const EntityEdge&, const EntityEdge&) = default;
};

struct EntityGraph {
    std::vector<Entity> entities;
    std::vector<EntityEdge> edges;  // sorted by (u, v)
    std::unordered_map<std::string, std::size_t> entity_of;  // collection id -> entity index
};

// How member links between two entities combine into one edge: SumMax adds
// n and keeps the largest ratio metrics, Max keeps the largest of each.
enum class EdgeAggregation { SumMax, Max };
std::string_view to_string(EdgeAggregation a) noexcept;
EdgeAggregation parse_edge_aggregation(std::string_view text);

// Contracts each component to one entity; links between members of
// different components are aggregated, links inside a component dropped.
// The partition must cover every node of the graph.
EntityGraph build_entity_graph(const EntityPartition& partition, const CollectionGraph& filtered_graph,
                               const EntityNamingOptions& naming = {},
                               EdgeAggregation aggregation = EdgeAggregation::SumMax);

}  // namespace colink
