#include "colink/config.hpp"

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "colink/error.hpp"
#include "yaml_util.hpp"

namespace colink {

std::string_view to_string(EnvelopeMode m) noexcept {
    switch (m) {
        case EnvelopeMode::Auto: return "auto";
        case EnvelopeMode::On: return "on";
        case EnvelopeMode::Off: return "off";
    }
    return "?";
}

namespace {

using namespace yaml_util;

const std::set<std::string> kSourceKinds = {"directory", "mongodb"};
const std::set<std::string> kFormats = {"json", "graphml", "dot", "csv"};

void read_sources(const YAML::Node& node, Config& cfg) {
    if (!node.IsSequence()) throw ValidationError("sources", "expected a list");
    for (std::size_t i = 0; i < node.size(); ++i) {
        const auto path = "sources[" + std::to_string(i) + "]";
        const auto& s = node[i];
        check_keys(s, path, {"kind", "location", "credentials", "subsystem"});
        SourceConfig src;
        if (s["kind"]) src.kind = read_scalar<std::string>(s["kind"], path + ".kind", "a string");
        if (s["location"]) src.location = read_scalar<std::string>(s["location"], path + ".location", "a string");
        if (s["credentials"])
            src.credentials = read_scalar<std::string>(s["credentials"], path + ".credentials", "a string");
        if (s["subsystem"]) src.subsystem = read_scalar<std::string>(s["subsystem"], path + ".subsystem", "a string");
        cfg.sources.push_back(std::move(src));
    }
}

void read_ingest(const YAML::Node& node, IngestConfig& out) {
    const std::string p = "hyperparameters.ingest";
    check_keys(node, p, {"schema_scan_limit", "envelope", "envelope_threshold", "strict", "workers"});
    if (node["schema_scan_limit"]) out.schema_scan_limit = read_count(node["schema_scan_limit"], p + ".schema_scan_limit");
    if (node["envelope"]) {
        const auto mode = read_scalar<std::string>(node["envelope"], p + ".envelope", "auto, on or off");
        if (mode == "auto")
            out.envelope = EnvelopeMode::Auto;
        else if (mode == "on" || mode == "true")
            out.envelope = EnvelopeMode::On;
        else if (mode == "off" || mode == "false")
            out.envelope = EnvelopeMode::Off;
        else
            throw ValidationError(p + ".envelope", "expected auto, on or off");
    }
    if (node["envelope_threshold"]) out.envelope_threshold = read_real(node["envelope_threshold"], p + ".envelope_threshold");
    if (node["strict"]) out.strict = read_scalar<bool>(node["strict"], p + ".strict", "a boolean");
    if (node["workers"]) out.workers = read_count(node["workers"], p + ".workers");
}

void read_key_inference(const YAML::Node& node, KeyInferenceConfig& out) {
    const std::string p = "hyperparameters.key_inference";
    check_keys(node, p,
               {"keywords", "hash_pattern", "date_formats", "epoch_min_seconds", "epoch_max_seconds", "name_fields"});
    if (node["keywords"]) {
        try {
            out.keywords = KeywordSet(read_strings(node["keywords"], p + ".keywords"));
        } catch (const ValidationError& e) {
            if (e.key().rfind(p, 0) == 0) throw;
            throw ValidationError(p + ".keywords", e.what());
        }
    }
    if (node["hash_pattern"]) {
        const auto pattern = read_scalar<std::string>(node["hash_pattern"], p + ".hash_pattern", "a regular expression");
        try {
            out.hashes = HashMatcher(pattern);
        } catch (const ValidationError&) {
            throw ValidationError(p + ".hash_pattern", "invalid regular expression");
        }
    }
    if (node["date_formats"]) out.dates.formats = read_strings(node["date_formats"], p + ".date_formats");
    if (node["epoch_min_seconds"])
        out.dates.epoch_min_seconds = read_scalar<std::int64_t>(node["epoch_min_seconds"], p + ".epoch_min_seconds", "an integer");
    if (node["epoch_max_seconds"])
        out.dates.epoch_max_seconds = read_scalar<std::int64_t>(node["epoch_max_seconds"], p + ".epoch_max_seconds", "an integer");
    if (node["name_fields"]) out.name_fields = read_strings(node["name_fields"], p + ".name_fields");
}

void read_linking(const YAML::Node& node, LinkingConfig& out) {
    const std::string p = "hyperparameters.linking";
    check_keys(node, p,
               {"min_n", "metric", "threshold", "frequent_key_cap", "frequent_key_min_collections", "witness_sample_k",
                "curve_key_types"});
    if (node["min_n"]) out.min_n = read_count(node["min_n"], p + ".min_n");
    if (node["metric"]) {
        const auto text = read_scalar<std::string>(node["metric"], p + ".metric", "a metric name");
        try {
            out.metric = parse_metric(text);
        } catch (const ValidationError& e) {
            throw ValidationError(p + ".metric", "unknown metric '" + text + "'");
        }
    }
    if (node["threshold"]) out.threshold = read_real(node["threshold"], p + ".threshold");
    if (node["frequent_key_cap"]) out.frequent_key_cap = read_real(node["frequent_key_cap"], p + ".frequent_key_cap");
    if (node["frequent_key_min_collections"])
        out.frequent_key_min_collections = read_count(node["frequent_key_min_collections"], p + ".frequent_key_min_collections");
    if (node["witness_sample_k"]) out.witness_sample_k = read_count(node["witness_sample_k"], p + ".witness_sample_k");
    if (node["curve_key_types"]) {
        out.curve_key_types.clear();
        for (const auto& name : read_strings(node["curve_key_types"], p + ".curve_key_types")) {
            if (name == "int") out.curve_key_types.push_back(KeyValue::Kind::Int);
            else if (name == "str") out.curve_key_types.push_back(KeyValue::Kind::Str);
            else if (name == "composite") out.curve_key_types.push_back(KeyValue::Kind::Composite);
            else throw ValidationError(p + ".curve_key_types", "unknown key type '" + name + "' (int, str, composite)");
        }
    }
}

void read_entity(const YAML::Node& node, EntityConfig& out) {
    const std::string p = "hyperparameters.entity";
    check_keys(node, p, {"tau", "name_join_separator", "name_length_cap", "version_suffix_pattern", "edge_aggregation"});
    if (node["tau"]) out.tau = read_real(node["tau"], p + ".tau");
    if (node["name_join_separator"])
        out.naming.separator = read_scalar<std::string>(node["name_join_separator"], p + ".name_join_separator", "a string");
    if (node["name_length_cap"]) out.naming.length_cap = read_count(node["name_length_cap"], p + ".name_length_cap");
    if (node["version_suffix_pattern"])
        out.naming.version_suffix_pattern =
            read_scalar<std::string>(node["version_suffix_pattern"], p + ".version_suffix_pattern", "a regular expression");
    if (node["edge_aggregation"]) {
        const auto text = read_scalar<std::string>(node["edge_aggregation"], p + ".edge_aggregation", "a string");
        try {
            out.aggregation = parse_edge_aggregation(text);
        } catch (const ValidationError&) {
            throw ValidationError(p + ".edge_aggregation", "expected sum_max or max, got '" + text + "'");
        }
    }
}

void read_output(const YAML::Node& node, OutputConfig& out) {
    const std::string p = "output";
    check_keys(node, p, {"formats", "directory", "include_field_mapping", "include_stats"});
    if (node["formats"]) out.formats = read_strings(node["formats"], p + ".formats");
    if (node["directory"]) out.directory = read_scalar<std::string>(node["directory"], p + ".directory", "a path");
    if (node["include_field_mapping"])
        out.include_field_mapping = read_scalar<bool>(node["include_field_mapping"], p + ".include_field_mapping", "a boolean");
    if (node["include_stats"]) out.include_stats = read_scalar<bool>(node["include_stats"], p + ".include_stats", "a boolean");
}

}  // namespace

Config config_from_yaml(std::string_view text, bool validate) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("malformed YAML: ") + e.what());
    }
    Config cfg;
    if (root.IsNull()) {
        if (validate) validate_config(cfg);
        return cfg;
    }
    check_keys(root, "", {"sources", "hyperparameters", "output"});
    if (root["sources"]) read_sources(root["sources"], cfg);
    if (const auto hp = root["hyperparameters"]) {
        check_keys(hp, "hyperparameters", {"ingest", "key_inference", "linking", "entity"});
        if (hp["ingest"]) read_ingest(hp["ingest"], cfg.ingest);
        if (hp["key_inference"]) read_key_inference(hp["key_inference"], cfg.key_inference);
        if (hp["linking"]) read_linking(hp["linking"], cfg.linking);
        if (hp["entity"]) read_entity(hp["entity"], cfg.entity);
    }
    if (root["output"]) read_output(root["output"], cfg.output);
    if (validate) validate_config(cfg);
    return cfg;
}

Config load_config(const std::filesystem::path& path, bool validate) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot read config file " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return config_from_yaml(buffer.str(), validate);
}

void validate_config(const Config& cfg) {
    if (cfg.sources.empty()) throw ValidationError("sources", "at least one source is required");
    for (std::size_t i = 0; i < cfg.sources.size(); ++i) {
        const auto path = "sources[" + std::to_string(i) + "]";
        if (!kSourceKinds.count(cfg.sources[i].kind))
            throw ValidationError(path + ".kind", "unknown source kind '" + cfg.sources[i].kind + "'");
        if (cfg.sources[i].location.empty()) throw ValidationError(path + ".location", "must not be empty");
    }
    const auto& in = cfg.ingest;
    if (in.schema_scan_limit == 0)
        throw ValidationError("hyperparameters.ingest.schema_scan_limit", "must be at least 1");
    if (!(in.envelope_threshold >= 0.0 && in.envelope_threshold <= 1.0))
        throw ValidationError("hyperparameters.ingest.envelope_threshold", "must lie in [0, 1]");
    if (in.workers == 0) throw ValidationError("hyperparameters.ingest.workers", "must be at least 1");
    const auto& dates = cfg.key_inference.dates;
    if (dates.epoch_min_seconds >= dates.epoch_max_seconds)
        throw ValidationError("hyperparameters.key_inference.epoch_min_seconds", "must be below epoch_max_seconds");
    if (!(cfg.linking.frequent_key_cap > 0.0))
        throw ValidationError("hyperparameters.linking.frequent_key_cap", "must be positive");
    if (!(cfg.entity.tau >= 0.0 && cfg.entity.tau <= 1.0))
        throw ValidationError("hyperparameters.entity.tau", "must lie in [0, 1]");
    try {
        std::regex check(cfg.entity.naming.version_suffix_pattern);
    } catch (const std::regex_error&) {
        throw ValidationError("hyperparameters.entity.version_suffix_pattern", "invalid regular expression");
    }
    if (cfg.output.formats.empty()) throw ValidationError("output.formats", "at least one format is required");
    for (const auto& f : cfg.output.formats)
        if (!kFormats.count(f)) throw ValidationError("output.formats", "unknown format '" + f + "'");
    if (cfg.output.directory.empty()) throw ValidationError("output.directory", "must not be empty");
}

Config default_config() {
    Config cfg;
    cfg.sources.push_back(SourceConfig{"directory", "corpus", "", ""});
    return cfg;
}

nlohmann::ordered_json config_to_json(const Config& cfg) {
    nlohmann::ordered_json j;
    j["sources"] = nlohmann::ordered_json::array();
    for (const auto& s : cfg.sources)
        j["sources"].push_back(
            {{"kind", s.kind}, {"location", s.location}, {"credentials", s.credentials}, {"subsystem", s.subsystem}});
    auto& hp = j["hyperparameters"];
    hp["ingest"] = {{"schema_scan_limit", cfg.ingest.schema_scan_limit},
                    {"envelope", std::string(to_string(cfg.ingest.envelope))},
                    {"envelope_threshold", cfg.ingest.envelope_threshold},
                    {"strict", cfg.ingest.strict},
                    {"workers", cfg.ingest.workers}};
    const auto& ki = cfg.key_inference;
    hp["key_inference"] = {{"keywords", ki.keywords.words()},
                           {"hash_pattern", ki.hashes.pattern()},
                           {"date_formats", ki.dates.formats},
                           {"epoch_min_seconds", ki.dates.epoch_min_seconds},
                           {"epoch_max_seconds", ki.dates.epoch_max_seconds},
                           {"name_fields", ki.name_fields}};
    const auto& l = cfg.linking;
    hp["linking"] = {{"min_n", l.min_n},
                     {"metric", std::string(to_string(l.metric))},
                     {"threshold", yaml_util::real_json(l.threshold)},
                     {"frequent_key_cap", yaml_util::real_json(l.frequent_key_cap)},
                     {"frequent_key_min_collections", l.frequent_key_min_collections},
                     {"witness_sample_k", l.witness_sample_k}};
    auto kinds = nlohmann::ordered_json::array();
    for (auto k : l.curve_key_types) kinds.push_back(std::string(to_string(k)));
    hp["linking"]["curve_key_types"] = kinds;
    hp["entity"] = {{"tau", cfg.entity.tau},
                    {"name_join_separator", cfg.entity.naming.separator},
                    {"name_length_cap", cfg.entity.naming.length_cap},
                    {"version_suffix_pattern", cfg.entity.naming.version_suffix_pattern},
                    {"edge_aggregation", std::string(to_string(cfg.entity.aggregation))}};
    j["output"] = {{"formats", cfg.output.formats},
                   {"directory", cfg.output.directory},
                   {"include_field_mapping", cfg.output.include_field_mapping},
                   {"include_stats", cfg.output.include_stats}};
    return j;
}

std::string config_to_yaml(const Config& cfg) {
    YAML::Emitter out;
    yaml_util::emit(out, config_to_json(cfg));
    return std::string(out.c_str()) + "\n";
}

}  // namespace colink
