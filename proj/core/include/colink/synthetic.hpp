#pragma once

// Seeded corpus generator with planted ground truth, and scoring of
// pipeline output against that truth.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "colink/graph_io.hpp"

namespace colink {

struct NoiseSpec {
    double small_int_collision_rate = 0.02; // collections with a small-integer code field
    std::int64_t small_int_range = 4;       // codes drawn from [0, range)
    std::vector<std::string> frequent_key_values = {"0"};
    double frequent_key_rate = 0.3;         // collections carrying the frequent values
    double unfilled_field_rate = 0.29;      // data fields left null
    double zero_based_int_primary_rate = 0.0;  // int-keyed entities numbering from 0
};

struct CorpusSpec {
    std::uint64_t seed = 1;
    std::size_t num_subsystems = 11;
    std::vector<std::string> subsystem_names;  // optional; defaults to a fixed list
    std::pair<std::size_t, std::size_t> collections_per_subsystem = {6, 10};
    std::pair<std::size_t, std::size_t> docs_per_collection = {1, 5000};  // log-uniform
    std::size_t total_documents = 0;  // rescale counts to this total when non-zero
    double planted_link_degree = 2.5;  // mean entity degree
    double intra_subsystem_link_rate = 0.7;
    double hash_key_share = 0.5;
    double int_key_share = 0.3;
    double composite_key_share = 0.2;
    double multi_ref_rate = 0.2;  // links to hash-keyed targets written as id arrays
    double version_group_rate = 0.1;
    double version_primary_overlap = 0.9;
    double link_value_fraction = 0.5;  // share of the target's keys a link references
    double envelope_rate = 0.15;       // collections written in the data-envelope layout
    NoiseSpec noise;

    // Heavier frequent-key noise used to compare ranking metrics.
    static CorpusSpec frequent_key_noise(std::uint64_t seed);
};

// Throws ValidationError naming the offending field.
void validate_spec(const CorpusSpec& spec);
CorpusSpec spec_from_yaml(std::string_view text);
CorpusSpec load_spec(const std::filesystem::path& path);
std::string spec_to_yaml(const CorpusSpec& spec);

struct GroundTruth {
    std::uint64_t seed = 0;
    std::map<std::string, std::string> subsystem_of;          // collection id -> subsystem
    std::vector<std::pair<std::string, std::string>> true_links;  // (referencing, referenced), sorted
    std::vector<std::vector<std::string>> entity_groups;      // disjoint, each sorted
    std::map<std::string, std::size_t> documents;             // collection id -> document count

    nlohmann::ordered_json to_json() const;
    static GroundTruth from_json(const nlohmann::json& j);
};

GroundTruth read_ground_truth(const std::filesystem::path& path);

// Writes <out>/<subsystem>/<collection>.jsonl and <out>/ground_truth.json.
// Output is a pure function of the spec. Throws IoError.
GroundTruth generate_corpus(const CorpusSpec& spec, const std::filesystem::path& out);

struct Evaluation {
    double link_precision = 0.0;
    double link_recall = 0.0;
    double link_f1 = 0.0;
    double pairwise_precision = 0.0;
    double pairwise_recall = 0.0;
    double pairwise_f1 = 0.0;
    std::size_t subsystems_covered = 0;
    std::size_t subsystems_total = 0;
    double average_degree = 0.0;
    std::size_t predicted_links = 0;
    std::size_t true_links = 0;  // after projection onto the predicted partition

    nlohmann::ordered_json to_json() const;
};

// Scores a graph document (entity or collection graph) against the truth.
// True links are projected onto the predicted partition; links that fall
// inside one predicted node are left to the partition score. Precision and
// recall over an empty set are 1. Throws CorpusMismatch when the result
// holds collections the truth does not know.
Evaluation evaluate_against_truth(const GraphDocument& result, const GroundTruth& truth);

// The truth expressed as an entity graph document.
GraphDocument truth_as_graph(const GroundTruth& truth);

}  // namespace colink
