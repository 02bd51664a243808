#pragma once

// Pairwise collection links from shared key values: intersection count,
// Jaccard, overlap coefficient and frequency-discounted PMI, plus edge
// filtering and coverage-curve evaluation.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "colink/key_index.hpp"

namespace colink {

enum class Metric : std::uint8_t { N, Jaccard, Overlap, Pmi };

std::string_view to_string(Metric m) noexcept;
// Accepts "n", "jaccard"/"j", "overlap"/"i", "pmi". Throws ValidationError.
Metric parse_metric(std::string_view text);

// --- plain set metrics over sorted, duplicate-free key id ranges ---------

std::size_t metric_n(std::span<const KeyId> u, std::span<const KeyId> v);
// nullopt when both sets are empty.
std::optional<double> metric_jaccard(std::span<const KeyId> u, std::span<const KeyId> v);
// nullopt when either set is empty.
std::optional<double> metric_overlap(std::span<const KeyId> u, std::span<const KeyId> v);
// log(p(U,V) / (p(U) p(V))) with p(S) = sum_{z in S} (1/c(z)) / T', where
// T' = sum over all keys of 1/c(z). nullopt when U and V share no key.
std::optional<double> metric_pmi(std::span<const KeyId> u, std::span<const KeyId> v, const KeySetIndex& index);

// Metric values from precomputed parts; shared by the index traversal.
double jaccard_from_counts(std::size_t n, std::size_t size_u, std::size_t size_v);
double overlap_from_counts(std::size_t n, std::size_t size_u, std::size_t size_v);
double pmi_from_weights(double shared_weight, double weight_u, double weight_v, double total_weight);

struct LinkEdge {
    CollectionIndex u = 0;  // u < v
    CollectionIndex v = 0;
    std::size_t n = 0;
    double jaccard = 0.0;
    double overlap = 0.0;
    double pmi = 0.0;
    std::vector<KeyId> witness;  // up to witness_sample_k shared keys, ascending

    double value(Metric m) const noexcept;
    friend bool operator==(const LinkEdge&, const LinkEdge&) = default;
};

struct CollectionNode {
    std::string id;
    std::string name;
    std::string subsystem;
    friend bool operator==(const CollectionNode&, const CollectionNode&) = default;
};

struct CollectionGraph {
    std::vector<CollectionNode> nodes;  // indexed like the key index
    std::vector<LinkEdge> edges;        // sorted by (u, v)

    std::vector<std::size_t> degrees() const;
};

struct LinkOptions {
    // Keys held by more than frequent_key_cap * m collections are skipped
    // during pair generation (they still count in c(z) and T' and in the
    // metrics of any pair that shares another key). Only applied when
    // m >= frequent_key_min_collections; a cap >= 1 disables it.
    double frequent_key_cap = 0.5;
    std::size_t frequent_key_min_collections = 10;
    std::size_t witness_sample_k = 3;
    std::size_t workers = 1;
};

struct LinkReport {
    std::size_t capped_keys = 0;
    std::size_t pair_updates = 0;
};

// Emits one edge per collection pair sharing at least one uncapped key,
// by walking the inverted index; never enumerates all pairs.
CollectionGraph pairwise_links(const KeySetIndex& index, const LinkOptions& options = {},
                               LinkReport* report = nullptr);

struct FilterCriterion {
    std::size_t min_n = 2;
    Metric metric = Metric::Pmi;
    double threshold = -std::numeric_limits<double>::infinity();
};

// Keeps edges with n >= min_n and metric >= threshold. Nodes are kept.
CollectionGraph filter_edges(const CollectionGraph& graph, const FilterCriterion& criterion);

struct CurvePoint {
    double threshold = 0.0;
    std::size_t num_edges = 0;
    double covered_fraction = 0.0;  // nodes with degree >= 1 / all nodes
};

// `thresholds` must be sorted descending. Edges are first restricted to
// n >= min_n.
std::vector<CurvePoint> coverage_curve(const CollectionGraph& graph, Metric metric,
                                       std::span<const double> thresholds, std::size_t min_n = 1);

// Every distinct metric value among edges with n >= min_n (descending),
// preceded by one value above the maximum so the curve starts at zero edges.
std::vector<double> curve_thresholds(const CollectionGraph& graph, Metric metric, std::size_t min_n = 1);

// Trapezoidal area under covered_fraction over num_edges, divided by the
// num_edges range. Throws DegenerateRange for fewer than two distinct edge
// counts.
double curve_auc(std::span<const CurvePoint> curve);

}  // namespace colink
