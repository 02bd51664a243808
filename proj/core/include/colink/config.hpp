#pragma once

// Run configuration: sources, hyperparameters and output settings, loaded
// from YAML with defaults applied and unknown keys rejected.

#include <filesystem>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "colink/entity.hpp"
#include "colink/key_inference.hpp"
#include "colink/link_discovery.hpp"

namespace colink {

struct SourceConfig {
    std::string kind = "directory";  // directory | mongodb
    std::string location;            // directory path or connection URI
    std::string credentials;         // reference only, never resolved here
    std::string subsystem;           // overrides directory-derived labels when set
    friend bool operator==(const SourceConfig&, const SourceConfig&) = default;
};

enum class EnvelopeMode { Auto, On, Off };
std::string_view to_string(EnvelopeMode m) noexcept;

struct IngestConfig {
    std::size_t schema_scan_limit = 100;
    EnvelopeMode envelope = EnvelopeMode::Auto;
    double envelope_threshold = 0.9;  // share of documents with a `data` object
    bool strict = false;              // fail instead of skipping unavailable sources
    std::size_t workers = 1;
};

struct LinkingConfig {
    std::size_t min_n = 2;
    Metric metric = Metric::Pmi;
    double threshold = 0.0;  // PMI above independence
    double frequent_key_cap = 0.5;
    std::size_t frequent_key_min_collections = 10;
    std::size_t witness_sample_k = 3;
    // Key kinds the coverage curves are computed over; empty means all.
    std::vector<KeyValue::Kind> curve_key_types;

    FilterCriterion criterion() const { return FilterCriterion{min_n, metric, threshold}; }
    LinkOptions options(std::size_t workers) const {
        return LinkOptions{frequent_key_cap, frequent_key_min_collections, witness_sample_k, workers};
    }
};

struct EntityConfig {
    double tau = 0.85;
    EntityNamingOptions naming;
    EdgeAggregation aggregation = EdgeAggregation::SumMax;
};

struct OutputConfig {
    std::vector<std::string> formats = {"json", "graphml", "dot", "csv"};
    std::string directory = "out";
    bool include_field_mapping = true;
    bool include_stats = true;
};

struct Config {
    std::vector<SourceConfig> sources;
    IngestConfig ingest;
    KeyInferenceConfig key_inference;
    LinkingConfig linking;
    EntityConfig entity;
    OutputConfig output;
};

// Parses YAML text. Missing keys take their defaults; unknown keys and bad
// values throw ValidationError naming the key path, malformed YAML throws
// ParseError. `validate` additionally runs validate_config.
Config config_from_yaml(std::string_view text, bool validate = true);
Config load_config(const std::filesystem::path& path, bool validate = true);

// Checks cross-field invariants (at least one source, non-empty locations,
// known kinds and formats, ranges).
void validate_config(const Config& config);

// Defaults with a single example directory source.
Config default_config();

std::string config_to_yaml(const Config& config);
nlohmann::ordered_json config_to_json(const Config& config);

}  // namespace colink
