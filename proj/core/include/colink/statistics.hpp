#pragma once

// Corpus profiling (document counts, nesting, value and key types, fill
// rates, key occurrence) and result-quality figures for the produced graphs.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colink/document.hpp"
#include "colink/entity.hpp"
#include "colink/key_index.hpp"
#include "colink/key_inference.hpp"
#include "colink/link_discovery.hpp"

namespace colink {

struct Quartiles {
    double q1 = 0.0, q2 = 0.0, q3 = 0.0;
    friend bool operator==(const Quartiles&, const Quartiles&) = default;
};

// Median of halves; for odd sizes the median is excluded from both halves.
// Empty input yields zeros.
Quartiles quartiles(std::vector<double> values);

// Named anomaly counters.
namespace warning {
inline constexpr const char* kDuplicateFields = "duplicate_field_names";
inline constexpr const char* kHashFallbackPrimary = "hash_fallback_primary";
inline constexpr const char* kCappedFrequentKeys = "capped_frequent_keys";
inline constexpr const char* kEmptyProfile = "empty_profile_collections";
inline constexpr const char* kBooleanKeyValues = "boolean_key_values";
inline constexpr const char* kEmptyCollections = "empty_collections";
inline constexpr const char* kNoSchemaDocument = "no_schema_document";
inline constexpr const char* kMalformedDocuments = "malformed_documents";
inline constexpr const char* kSourceErrors = "source_errors";
}  // namespace warning

// Mergeable per-document accumulator (counters are commutative sums).
class StatsAccumulator {
public:
    // `payload` is the profiled object (the envelope's data field when
    // envelope mode applies); `envelope_data_nonempty` is set only for
    // envelope-mode collections.
    void add_document(const Object& payload, std::optional<bool> envelope_data_nonempty = std::nullopt,
                      std::size_t duplicate_fields = 0);
    void add_collection_size(std::size_t documents);
    void warn(const std::string& name, std::size_t count = 1);
    void merge(const StatsAccumulator& other);

    std::size_t documents() const noexcept { return documents_; }
    const std::vector<std::size_t>& collection_sizes() const noexcept { return collection_sizes_; }
    const std::map<std::size_t, std::size_t>& nesting_hist() const noexcept { return nesting_hist_; }
    const std::map<std::string, std::size_t>& value_types() const noexcept { return value_types_; }
    std::size_t fields_total() const noexcept { return fields_total_; }
    std::size_t fields_empty() const noexcept { return fields_empty_; }
    std::size_t envelope_documents() const noexcept { return envelope_docs_; }
    std::size_t envelope_filled() const noexcept { return envelope_filled_; }
    const std::map<std::string, std::size_t>& warnings() const noexcept { return warnings_; }

private:
    void count_types(const Value& v);

    std::size_t documents_ = 0;
    std::vector<std::size_t> collection_sizes_;
    std::map<std::size_t, std::size_t> nesting_hist_;
    std::map<std::string, std::size_t> value_types_;
    std::size_t fields_total_ = 0;
    std::size_t fields_empty_ = 0;
    std::size_t envelope_docs_ = 0;
    std::size_t envelope_filled_ = 0;
    std::map<std::string, std::size_t> warnings_;
};

struct KeyTypeCounts {
    std::map<std::string, std::size_t> all;     // per descriptor
    std::map<std::string, std::size_t> unique;  // per distinct (path, type)
};

struct CorpusStats {
    std::size_t collections = 0;
    std::size_t documents = 0;
    std::map<std::string, std::size_t> docs_per_collection_hist;  // power-of-two buckets "[lo,hi)"
    Quartiles docs_per_collection_quartiles;
    std::map<std::size_t, std::size_t> nesting_depth_hist;  // per document
    std::map<std::string, std::size_t> value_type_hist;     // every non-root node
    KeyTypeCounts key_type_hist;
    double data_field_fill_rate = 1.0;  // envelope documents with a non-empty data field
    double empty_field_rate = 0.0;      // empty top-level payload fields
    std::map<std::size_t, std::size_t> key_occurrence;  // c(z) -> number of keys
    std::size_t distinct_keys = 0;
    std::map<std::string, std::size_t> warnings;

    nlohmann::ordered_json to_json() const;
};

// Key type of one descriptor: many, composite, or the schema value's scalar type.
std::string key_type_name(const KeyDescriptor& descriptor, const Value* schema_value);

CorpusStats finalize_stats(const StatsAccumulator& acc, const std::vector<CollectionKeyProfile>& profiles,
                           const std::vector<const Object*>& schema_payloads, const KeySetIndex& index);

// One-pass statistics over in-memory collections (no envelope handling).
CorpusStats collect_stats(const std::vector<Collection>& collections,
                          const std::vector<CollectionKeyProfile>& profiles, const KeySetIndex& index);

// --- graph quality -------------------------------------------------------

struct GraphView {
    std::size_t num_nodes = 0;
    std::vector<std::pair<std::size_t, std::size_t>> edges;

    static GraphView of(const CollectionGraph& g);
    static GraphView of(const EntityGraph& g);
};

// 2|E| / |V|; 0 for an empty graph.
double average_degree(const GraphView& graph);
double density(const GraphView& graph);

// Newman modularity of the given grouping (group label per node) on the
// unweighted simple graph. Throws NoEdges.
double modularity(const GraphView& graph, const std::vector<std::string>& group_of_node);

struct SubsystemCoverage {
    std::size_t covered = 0;
    std::size_t total = 0;
    friend bool operator==(const SubsystemCoverage&, const SubsystemCoverage&) = default;
};

// covered: subsystems owning a collection whose entity has at least one
// edge; total: subsystems with at least one collection in the map.
SubsystemCoverage subsystem_coverage(const EntityGraph& graph,
                                     const std::map<std::string, std::string>& subsystem_of_collection);

struct GraphSummary {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    double average_degree = 0.0;
    double density = 0.0;
    std::optional<double> modularity;  // by subsystem; absent without edges
    nlohmann::ordered_json to_json() const;
};

GraphSummary summarize(const CollectionGraph& graph);
GraphSummary summarize(const EntityGraph& graph);

}  // namespace colink
