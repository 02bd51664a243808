#include "colink/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <exception>
#include <regex>
#include <sstream>

#include <spdlog/spdlog.h>

#include "colink/error.hpp"
#include "colink/json_io.hpp"
#include "colink/parallel.hpp"

namespace colink {

namespace {

const Object kEmptyObject;

const Object& payload_of(const Document& doc, bool envelope) {
    if (!envelope) return doc.root;
    const Value* data = doc.root.find("data");
    return data && data->is_object() ? data->as_object() : kEmptyObject;
}

bool has_envelope(const Document& doc) {
    const Value* data = doc.root.find("data");
    return data && data->is_object();
}

void prefix_profile(CollectionKeyProfile& profile, const FieldPath& prefix) {
    auto shift = [&](std::vector<KeyDescriptor>& list) {
        for (auto& d : list) d.path = d.path.prefixed(prefix);
    };
    if (profile.primary) profile.primary->path = profile.primary->path.prefixed(prefix);
    shift(profile.foreign);
    shift(profile.names);
    shift(profile.dates);
    for (auto& p : profile.primary_alternates) p = p.prefixed(prefix);
}

std::string number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

nlohmann::ordered_json real_json(double v) {
    if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
    return v;
}

template <typename F>
void run_stage(Stage stage, F&& body) {
    const auto start = std::chrono::steady_clock::now();
    try {
        body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        std::throw_with_nested(StageError(std::string(to_string(stage)), e.what()));
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    spdlog::info("stage {} done in {} ms", to_string(stage), ms);
}

}  // namespace

std::optional<AbstractCollection> profile_collection(SourceAdapter& source, const CollectionRef& ref,
                                                     const IngestConfig& ingest,
                                                     const KeyInferenceConfig& inference) {
    AbstractCollection ac;
    ac.ref = ref;
    std::vector<Document> head;
    std::size_t enveloped = 0;
    std::size_t malformed = 0;

    source.stream(ref, [&](std::string_view record, std::size_t ordinal) {
        try {
            Document doc = parse_document(record, ordinal);
            ++ac.documents;
            if (has_envelope(doc)) ++enveloped;
            if (head.size() < ingest.schema_scan_limit) head.push_back(std::move(doc));
        } catch (const SyntaxError&) {
            ++malformed;
        } catch (const NotAnObject&) {
            ++malformed;
        }
    });
    if (malformed) {
        if (ingest.strict)
            throw ParseError(ref.id + ": " + std::to_string(malformed) + " malformed document(s)");
        spdlog::warn("{}: skipped {} malformed document(s)", ref.id, malformed);
        ac.stats.warn(warning::kMalformedDocuments, malformed);
    }
    if (ac.documents == 0) return std::nullopt;

    switch (ingest.envelope) {
        case EnvelopeMode::On: ac.envelope = true; break;
        case EnvelopeMode::Off: ac.envelope = false; break;
        case EnvelopeMode::Auto:
            ac.envelope = static_cast<double>(enveloped) > ingest.envelope_threshold * static_cast<double>(ac.documents);
            break;
    }

    for (auto& doc : head) {
        if (!payload_of(doc, ac.envelope).empty()) {
            ac.schema = std::move(doc);
            break;
        }
    }
    head.clear();

    if (ac.schema) {
        ac.profile = find_keys(payload_of(*ac.schema, ac.envelope), true, inference);
        if (ac.envelope) {
            prefix_profile(ac.profile, FieldPath({PathSegment{std::string("data")}}));
            for (const auto& [name, value] : ac.schema->root) {
                if (name == "data" || !is_date(value, inference.dates)) continue;
                KeyDescriptor d;
                d.path = FieldPath().child(name);
                d.role = KeyRole::Date;
                ac.profile.dates.push_back(std::move(d));
            }
        }
    } else {
        spdlog::warn("{}: no non-empty document among the first {}", ref.id, ingest.schema_scan_limit);
        ac.stats.warn(warning::kNoSchemaDocument);
    }
    ac.profile.collection_id = ref.id;
    ac.keys = CollectionKeys(ac.profile.primary ? 1 + ac.profile.primary_alternates.size() : 0);

    ac.stats.add_collection_size(ac.documents);
    source.stream(ref, [&](std::string_view record, std::size_t ordinal) {
        Document doc;
        try {
            doc = parse_document(record, ordinal);
        } catch (const SyntaxError&) {
            return;
        } catch (const NotAnObject&) {
            return;
        }
        const Object& payload = payload_of(doc, ac.envelope);
        ac.stats.add_document(payload, ac.envelope ? std::optional<bool>(!payload.empty()) : std::nullopt,
                              doc.duplicate_fields);
        extract_keys(doc.root, ac.profile, inference.hashes, ac.keys);
    });
    return ac;
}

IngestResult ingest(const Config& config) {
    IngestResult result;
    std::vector<std::pair<SourceAdapter*, CollectionRef>> work;
    std::vector<std::unique_ptr<SourceAdapter>> sources;
    for (const auto& sc : config.sources) {
        auto source = make_source(sc);
        try {
            for (auto& ref : source->collections()) work.emplace_back(source.get(), std::move(ref));
        } catch (const SourceUnavailable& e) {
            if (config.ingest.strict) throw;
            spdlog::warn("source {} unavailable: {}", source->describe(), e.what());
            result.source_errors.push_back(source->describe() + ": " + e.what());
        }
        sources.push_back(std::move(source));
    }
    if (work.empty() && !result.source_errors.empty())
        throw SourceUnavailable("no source could be read: " + result.source_errors.front());
    std::sort(work.begin(), work.end(), [](const auto& a, const auto& b) { return a.second.id < b.second.id; });
    for (std::size_t i = 1; i < work.size(); ++i)
        if (work[i].second.id == work[i - 1].second.id)
            throw DuplicateCollection("collection id provided by two sources: " + work[i].second.id);

    std::vector<std::optional<AbstractCollection>> slots(work.size());
    parallel_for(work.size(), config.ingest.workers, [&](std::size_t i) {
        slots[i] = profile_collection(*work[i].first, work[i].second, config.ingest, config.key_inference);
    });
    for (std::size_t i = 0; i < work.size(); ++i) {
        if (!slots[i]) {
            result.empty_collections.push_back(work[i].second.id);
            continue;
        }
        result.stats.merge(slots[i]->stats);
        result.collections.push_back(std::move(*slots[i]));
    }
    if (!result.empty_collections.empty()) {
        spdlog::warn("skipped {} empty collection(s)", result.empty_collections.size());
        result.stats.warn(warning::kEmptyCollections, result.empty_collections.size());
    }
    if (!result.source_errors.empty()) result.stats.warn(warning::kSourceErrors, result.source_errors.size());
    return result;
}

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::Ingest: return "ingest";
        case Stage::Index: return "index";
        case Stage::Link: return "link";
        case Stage::Filter: return "filter";
        case Stage::Adjacency: return "adjacency";
        case Stage::Components: return "components";
        case Stage::EntityGraph: return "entity_graph";
        case Stage::Stats: return "stats";
    }
    return "?";
}

std::vector<CollectionKeyProfile> RunResult::profiles() const {
    std::vector<CollectionKeyProfile> out;
    out.reserve(ingest.collections.size());
    for (const auto& c : ingest.collections) out.push_back(c.profile);
    return out;
}

std::map<std::string, std::string> RunResult::subsystem_map() const {
    std::map<std::string, std::string> out;
    for (const auto& c : ingest.collections) out[c.ref.id] = c.ref.subsystem;
    return out;
}

CorpusStats compute_stats(const RunResult& r) {
    std::vector<const Object*> roots;
    for (const auto& c : r.ingest.collections) roots.push_back(c.schema ? &c.schema->root : nullptr);
    return finalize_stats(r.ingest.stats, r.profiles(), roots, r.index);
}

RunResult run_pipeline(const Config& config, Stage until) {
    RunResult r;
    auto reached = [&](Stage s) { return static_cast<int>(s) <= static_cast<int>(until); };

    run_stage(Stage::Ingest, [&] {
        r.ingest = ingest(config);
        spdlog::info("ingested {} collection(s)", r.ingest.collections.size());
    });
    r.completed = Stage::Ingest;
    if (!reached(Stage::Index)) return r;

    run_stage(Stage::Index, [&] {
        std::vector<std::string> ids;
        std::vector<CollectionKeys> keys;
        ids.reserve(r.ingest.collections.size());
        keys.reserve(r.ingest.collections.size());
        std::size_t booleans = 0, hash_fallback = 0, empty_profiles = 0;
        for (const auto& c : r.ingest.collections) {
            ids.push_back(c.ref.id);
            keys.push_back(c.keys);
            booleans += c.keys.boolean_values();
            if (c.profile.low_confidence_primary) ++hash_fallback;
            if (c.profile.key_descriptors().empty()) ++empty_profiles;
        }
        r.index = KeySetIndex::build(std::move(ids), keys);
        if (booleans) r.ingest.stats.warn(warning::kBooleanKeyValues, booleans);
        if (hash_fallback) r.ingest.stats.warn(warning::kHashFallbackPrimary, hash_fallback);
        if (empty_profiles) r.ingest.stats.warn(warning::kEmptyProfile, empty_profiles);
    });
    r.completed = Stage::Index;
    if (!reached(Stage::Link)) return r;

    run_stage(Stage::Link, [&] {
        r.raw_graph = pairwise_links(r.index, config.linking.options(config.ingest.workers), &r.link_report);
        for (std::size_t i = 0; i < r.raw_graph.nodes.size(); ++i) {
            r.raw_graph.nodes[i].name = r.ingest.collections[i].ref.name;
            r.raw_graph.nodes[i].subsystem = r.ingest.collections[i].ref.subsystem;
        }
        if (r.link_report.capped_keys) r.ingest.stats.warn(warning::kCappedFrequentKeys, r.link_report.capped_keys);
        const auto& kinds = config.linking.curve_key_types;
        if (kinds.empty()) {
            r.curve_graph = r.raw_graph;
        } else {
            std::vector<CollectionKeys> restricted;
            for (const auto& c : r.ingest.collections) restricted.push_back(c.keys.restricted_to(kinds));
            const auto index = KeySetIndex::build(r.index.collection_ids(), restricted);
            r.curve_graph = pairwise_links(index, config.linking.options(config.ingest.workers));
        }
        spdlog::info("{} candidate link(s), {} capped key(s)", r.raw_graph.edges.size(), r.link_report.capped_keys);
    });
    r.completed = Stage::Link;
    if (!reached(Stage::Filter)) return r;

    run_stage(Stage::Filter, [&] {
        r.collection_graph = filter_edges(r.raw_graph, config.linking.criterion());
        spdlog::info("{} link(s) after filtering", r.collection_graph.edges.size());
    });
    r.completed = Stage::Filter;
    if (!reached(Stage::Adjacency)) return r;

    run_stage(Stage::Adjacency, [&] { r.adjacency = build_adjacency(r.index); });
    r.completed = Stage::Adjacency;
    if (!reached(Stage::Components)) return r;

    run_stage(Stage::Components, [&] {
        r.partition = threshold_components(r.adjacency, config.entity.tau);
        const std::regex suffix(config.entity.naming.version_suffix_pattern);
        std::map<std::string, std::vector<std::string>> groups;
        for (const auto& c : r.ingest.collections)
            groups[c.ref.subsystem + "/" + normalize_collection_name(c.ref.name, suffix)].push_back(c.ref.id);
        for (auto& [key, members] : groups)
            if (members.size() > 1) r.version_groups.emplace(key, std::move(members));
    });
    r.completed = Stage::Components;
    if (!reached(Stage::EntityGraph)) return r;

    run_stage(Stage::EntityGraph, [&] {
        r.entity_graph = build_entity_graph(r.partition, r.collection_graph, config.entity.naming, config.entity.aggregation);
        spdlog::info("{} entit(ies), {} entity link(s)", r.entity_graph.entities.size(), r.entity_graph.edges.size());
    });
    r.completed = Stage::EntityGraph;
    if (!reached(Stage::Stats)) return r;

    run_stage(Stage::Stats, [&] { r.stats = compute_stats(r); });
    r.completed = Stage::Stats;
    return r;
}

// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json graph_params(const Config& config) {
    const auto& l = config.linking;
    return {{"min_n", l.min_n},
            {"metric", std::string(to_string(l.metric))},
            {"threshold", real_json(l.threshold)},
            {"frequent_key_cap", real_json(l.frequent_key_cap)},
            {"frequent_key_min_collections", l.frequent_key_min_collections},
            {"tau", config.entity.tau},
            {"edge_aggregation", std::string(to_string(config.entity.aggregation))}};
}

std::size_t total_documents(const RunResult& r) {
    std::size_t total = 0;
    for (const auto& c : r.ingest.collections) total += c.documents;
    return total;
}

}  // namespace

GraphDocument entity_graph_document(const RunResult& result, const Config& config) {
    auto doc = GraphDocument::from(result.entity_graph);
    auto summary = summarize(result.entity_graph).to_json();
    summary["collections"] = result.ingest.collections.size();
    summary["documents"] = total_documents(result);
    const auto coverage = subsystem_coverage(result.entity_graph, result.subsystem_map());
    summary["subsystems_covered"] = coverage.covered;
    summary["subsystems_total"] = coverage.total;
    doc.meta = {{"kind", "entity"}, {"params", graph_params(config)}, {"summary", summary}};
    return doc;
}

GraphDocument collection_graph_document(const RunResult& result, const Config& config) {
    auto doc = GraphDocument::from(result.collection_graph);
    auto summary = summarize(result.collection_graph).to_json();
    summary["candidate_links"] = result.raw_graph.edges.size();
    doc.meta = {{"kind", "collection"}, {"params", graph_params(config)}, {"summary", summary}};
    return doc;
}

std::vector<FieldMappingRow> field_mapping(const EntityGraph& entities,
                                           const std::vector<CollectionKeyProfile>& profiles) {
    std::map<std::string, const CollectionKeyProfile*> by_id;
    for (const auto& p : profiles) by_id[p.collection_id] = &p;
    std::vector<FieldMappingRow> rows;
    for (const auto& e : entities.entities) {
        for (const auto& member : e.members) {
            auto it = by_id.find(member);
            if (it == by_id.end()) continue;
            const auto& p = *it->second;
            auto add = [&](const KeyDescriptor& d) {
                rows.push_back(FieldMappingRow{e.id, e.name, member, d.path.to_string(),
                                               std::string(to_string(d.role)), std::string(to_string(d.id_type))});
            };
            if (p.primary) add(*p.primary);
            for (const auto& d : p.foreign) add(d);
            for (const auto& d : p.names) add(d);
            for (const auto& d : p.dates) add(d);
        }
    }
    return rows;
}

std::string field_mapping_csv(const std::vector<FieldMappingRow>& rows) {
    auto field = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char c : s) {
            if (c == '"') out += '"';
            out += c;
        }
        return out + "\"";
    };
    std::string out = "entity_id,entity_name,collection,field_path,role,id_type\n";
    for (const auto& r : rows)
        out += field(r.entity_id) + ',' + field(r.entity_name) + ',' + field(r.collection) + ',' +
               field(r.field_path) + ',' + r.role + ',' + r.id_type + '\n';
    return out;
}

nlohmann::ordered_json field_mapping_json(const std::vector<FieldMappingRow>& rows) {
    auto out = nlohmann::ordered_json::array();
    for (const auto& r : rows)
        out.push_back({{"entity_id", r.entity_id},
                       {"entity_name", r.entity_name},
                       {"collection", r.collection},
                       {"field_path", r.field_path},
                       {"role", r.role},
                       {"id_type", r.id_type}});
    return out;
}

void export_field_mapping(const EntityGraph& entities, const std::vector<CollectionKeyProfile>& profiles,
                          const std::filesystem::path& path) {
    const auto rows = field_mapping(entities, profiles);
    const auto ext = path.extension().string();
    if (ext == ".csv")
        write_text_file(path, field_mapping_csv(rows));
    else if (ext == ".json")
        write_text_file(path, field_mapping_json(rows).dump(2) + "\n");
    else
        throw UnknownFormat("field mapping format must be .csv or .json, got '" + ext + "'");
}

std::string coverage_csv(const std::vector<CurvePoint>& curve) {
    std::string out = "threshold,num_edges,covered_fraction\n";
    for (const auto& p : curve) out += number(p.threshold) + ',' + std::to_string(p.num_edges) + ',' + number(p.covered_fraction) + '\n';
    return out;
}

std::string threshold_sweep_csv(const std::vector<SweepPoint>& sweep) {
    std::string out = "tau,num_components,avg_component_size\n";
    for (const auto& p : sweep)
        out += number(p.tau) + ',' + std::to_string(p.num_components) + ',' + number(p.avg_component_size) + '\n';
    return out;
}

std::vector<double> default_tau_grid() {
    std::vector<double> taus;
    for (int i = 0; i <= 20; ++i) taus.push_back(i / 20.0);
    return taus;
}

nlohmann::ordered_json run_report(const RunResult& r, const Config& config) {
    nlohmann::ordered_json j;
    j["config"] = config_to_json(config);
    j["completed_stage"] = std::string(to_string(r.completed));
    j["collections"] = r.ingest.collections.size();
    j["documents"] = total_documents(r);
    j["empty_collections"] = r.ingest.empty_collections;
    j["source_errors"] = r.ingest.source_errors;
    j["warnings"] = r.ingest.stats.warnings();
    auto low = nlohmann::ordered_json::array();
    for (const auto& c : r.ingest.collections)
        if (c.profile.low_confidence_primary) low.push_back(c.ref.id);
    j["low_confidence_primaries"] = low;
    if (static_cast<int>(r.completed) >= static_cast<int>(Stage::Link)) {
        j["distinct_keys"] = r.index.num_keys();
        j["capped_keys"] = r.link_report.capped_keys;
        j["candidate_links"] = r.raw_graph.edges.size();
    }
    if (static_cast<int>(r.completed) >= static_cast<int>(Stage::Filter)) {
        j["filtered_links"] = r.collection_graph.edges.size();
        nlohmann::ordered_json auc;
        for (Metric m : {Metric::N, Metric::Jaccard, Metric::Overlap, Metric::Pmi}) {
            const auto thresholds = curve_thresholds(r.curve_graph, m, config.linking.min_n);
            const auto curve = coverage_curve(r.curve_graph, m, thresholds, config.linking.min_n);
            try {
                auc[std::string(to_string(m))] = curve_auc(curve);
            } catch (const DegenerateRange&) {
                auc[std::string(to_string(m))] = nullptr;
            }
        }
        j["coverage_auc"] = auc;
    }
    if (static_cast<int>(r.completed) >= static_cast<int>(Stage::EntityGraph)) {
        j["entities"] = r.entity_graph.entities.size();
        j["entity_links"] = r.entity_graph.edges.size();
        j["version_groups"] = r.version_groups;
    }
    return j;
}

void write_outputs(const RunResult& r, const Config& config, const std::filesystem::path& dir) {
    const auto& out = config.output;
    auto wants = [&](const std::string& f) { return std::find(out.formats.begin(), out.formats.end(), f) != out.formats.end(); };
    const int done = static_cast<int>(r.completed);

    if (done >= static_cast<int>(Stage::Filter)) {
        const auto doc = collection_graph_document(r, config);
        for (const auto& f : out.formats) {
            const auto ext = ExporterRegistry::instance().create(f)->extension();
            export_graph(doc, f, dir / ("collection_graph." + ext));
        }
        for (Metric m : {Metric::N, Metric::Jaccard, Metric::Overlap, Metric::Pmi}) {
            const auto thresholds = curve_thresholds(r.curve_graph, m, config.linking.min_n);
            write_text_file(dir / ("coverage_" + std::string(to_string(m)) + ".csv"),
                            coverage_csv(coverage_curve(r.curve_graph, m, thresholds, config.linking.min_n)));
        }
    }
    if (done >= static_cast<int>(Stage::Components)) {
        const auto taus = default_tau_grid();
        write_text_file(dir / "threshold_sweep.csv", threshold_sweep_csv(threshold_sweep(r.adjacency, taus)));
    }
    if (done >= static_cast<int>(Stage::EntityGraph)) {
        const auto doc = entity_graph_document(r, config);
        for (const auto& f : out.formats) {
            const auto ext = ExporterRegistry::instance().create(f)->extension();
            export_graph(doc, f, dir / ("graph." + ext));
        }
        if (!wants("json")) export_graph(doc, "json", dir / "graph.json");
        if (out.include_field_mapping) {
            const auto profiles = r.profiles();
            export_field_mapping(r.entity_graph, profiles, dir / "field_mapping.csv");
            export_field_mapping(r.entity_graph, profiles, dir / "field_mapping.json");
        }
    }
    if (done >= static_cast<int>(Stage::Stats) && out.include_stats)
        write_text_file(dir / "stats.json", r.stats.to_json().dump(2) + "\n");
    write_text_file(dir / "run_report.json", run_report(r, config).dump(2) + "\n");
}

}  // namespace colink
