#pragma once

// Stage orchestration: ingest -> key index -> pairwise links -> filter ->
// adjacency -> components -> entity graph -> statistics -> export.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colink/config.hpp"
#include "colink/entity.hpp"
#include "colink/graph_io.hpp"
#include "colink/key_index.hpp"
#include "colink/link_discovery.hpp"
#include "colink/source.hpp"
#include "colink/statistics.hpp"

namespace colink {

// A collection with its inferred key profile, schema document and partial
// statistics; documents themselves are not retained.
struct AbstractCollection {
    CollectionRef ref;
    std::size_t documents = 0;
    bool envelope = false;
    std::optional<Document> schema;  // full root, envelope included
    CollectionKeyProfile profile;    // paths relative to the document root
    CollectionKeys keys;
    StatsAccumulator stats;
};

// Reads one collection in two streaming passes: the first picks the
// envelope mode and schema document, the second extracts key values and
// statistics. Returns nullopt for a collection without documents.
std::optional<AbstractCollection> profile_collection(SourceAdapter& source, const CollectionRef& ref,
                                                     const IngestConfig& ingest,
                                                     const KeyInferenceConfig& inference);

struct IngestResult {
    std::vector<AbstractCollection> collections;  // non-empty, sorted by id
    std::vector<std::string> empty_collections;
    std::vector<std::string> source_errors;
    StatsAccumulator stats;  // merged over collections, plus ingest warnings
};

// Throws SourceUnavailable when `strict` is set and a source fails, or when
// every source fails; DuplicateCollection on clashing ids across sources.
IngestResult ingest(const Config& config);

enum class Stage { Ingest, Index, Link, Filter, Adjacency, Components, EntityGraph, Stats };
std::string_view to_string(Stage s) noexcept;

struct RunResult {
    Stage completed = Stage::Ingest;
    IngestResult ingest;
    KeySetIndex index;
    LinkReport link_report;
    CollectionGraph raw_graph;         // every pair sharing at least one key
    CollectionGraph curve_graph;       // raw graph over the coverage-curve key types
    CollectionGraph collection_graph;  // after filter_edges
    AdjacencyMatrix adjacency;
    EntityPartition partition;
    EntityGraph entity_graph;
    CorpusStats stats;
    // subsystem/normalized-name -> collections whose names only differ by a
    // version suffix
    std::map<std::string, std::vector<std::string>> version_groups;

    std::vector<CollectionKeyProfile> profiles() const;
    std::map<std::string, std::string> subsystem_map() const;
};

// Runs the stages in order up to and including `until`. Errors leave the
// failing stage as a nested StageError.
RunResult run_pipeline(const Config& config, Stage until = Stage::Stats);

// Corpus statistics from the ingest and index stages.
CorpusStats compute_stats(const RunResult& result);

// Graph documents with run parameters and summary figures in `meta`.
// Worker counts never appear, so documents are identical across them.
GraphDocument entity_graph_document(const RunResult& result, const Config& config);
GraphDocument collection_graph_document(const RunResult& result, const Config& config);

struct FieldMappingRow {
    std::string entity_id;
    std::string entity_name;
    std::string collection;
    std::string field_path;
    std::string role;
    std::string id_type;
    friend bool operator==(const FieldMappingRow&, const FieldMappingRow&) = default;
};

std::vector<FieldMappingRow> field_mapping(const EntityGraph& entities,
                                           const std::vector<CollectionKeyProfile>& profiles);
std::string field_mapping_csv(const std::vector<FieldMappingRow>& rows);
nlohmann::ordered_json field_mapping_json(const std::vector<FieldMappingRow>& rows);
// Format follows the extension (.csv or .json). Throws IoError, UnknownFormat.
void export_field_mapping(const EntityGraph& entities, const std::vector<CollectionKeyProfile>& profiles,
                          const std::filesystem::path& path);

std::string coverage_csv(const std::vector<CurvePoint>& curve);
std::string threshold_sweep_csv(const std::vector<SweepPoint>& sweep);
std::vector<double> default_tau_grid();

nlohmann::ordered_json run_report(const RunResult& result, const Config& config);

// Writes every artifact available for the completed stage into `dir`.
void write_outputs(const RunResult& result, const Config& config, const std::filesystem::path& dir);

}  // namespace colink
