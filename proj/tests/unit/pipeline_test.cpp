#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

#include "colink/config.hpp"
#include "colink/error.hpp"
#include "colink/graph_io.hpp"
#include "colink/json_io.hpp"
#include "colink/pipeline.hpp"
#include "colink/source.hpp"
#include "colink/synthetic.hpp"

using namespace colink;
namespace fs = std::filesystem;

namespace {

class TempDir {
public:
    TempDir() {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        path_ = fs::temp_directory_path() / ("colink_" + std::string(info->test_suite_name()) + "_" + info->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }
    fs::path operator/(const std::string& s) const { return path_ / s; }

private:
    fs::path path_;
};

void write_file(const fs::path& p, const std::string& content) {
    fs::create_directories(p.parent_path());
    std::ofstream(p) << content;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Config config_for(const fs::path& corpus) {
    Config c;
    c.sources.push_back(SourceConfig{"directory", corpus.string(), "", ""});
    return c;
}

GraphDocument two_node_graph() {
    GraphDocument g;
    g.nodes = {{"s/a", "a", "s", {"s/a"}}, {"s/b", "b", "s", {"s/b"}}};
    g.edges = {{"s/a", "s/b", 3, 0.5, 0.75, 1.25}};
    return g;
}

}  // namespace

// --- configuration ------------------------------------------------------------

TEST(Config, MinimalUsesDefaults) {
    auto c = config_from_yaml("sources:\n  - kind: directory\n    location: corpus\n");
    ASSERT_EQ(c.sources.size(), 1u);
    EXPECT_EQ(c.sources[0].location, "corpus");
    EXPECT_EQ(c.linking.min_n, 2u);
    EXPECT_EQ(c.linking.metric, Metric::Pmi);
    EXPECT_DOUBLE_EQ(c.entity.tau, 0.85);
    EXPECT_EQ(c.key_inference.keywords.words(), KeywordSet::defaults().words());
    EXPECT_EQ(c.ingest.schema_scan_limit, 100u);
    EXPECT_EQ(c.output.formats, (std::vector<std::string>{"json", "graphml", "dot", "csv"}));
}

TEST(Config, UnknownKeyNamed) {
    try {
        config_from_yaml("sources:\n  - location: x\nhyperparameterz: {}\n");
        FAIL() << "no error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "hyperparameterz");
    }
    try {
        config_from_yaml("sources:\n  - location: x\nhyperparameters:\n  linking:\n    min_m: 3\n");
        FAIL() << "no error";
    } catch (const ValidationError& e) {
        EXPECT_NE(e.key().find("min_m"), std::string::npos);
    }
}

TEST(Config, BadValues) {
    EXPECT_THROW(config_from_yaml("sources: []\n"), ValidationError);
    EXPECT_THROW(config_from_yaml("sources:\n  - location: \"\"\n"), ValidationError);
    EXPECT_THROW(config_from_yaml("sources:\n  - location: x\n    kind: ftp\n"), ValidationError);
    EXPECT_THROW(config_from_yaml("sources:\n  - location: x\nhyperparameters:\n  entity:\n    tau: 1.5\n"),
                 ValidationError);
    EXPECT_THROW(config_from_yaml("sources:\n  - location: x\noutput:\n  formats: [pdf]\n"), ValidationError);
    EXPECT_THROW(config_from_yaml("sources: [\n"), ParseError);
    try {
        config_from_yaml("sources:\n  - location: x\nhyperparameters:\n  entity:\n    edge_aggregation: avg\n");
        FAIL() << "no error";
    } catch (const ValidationError& e) {
        EXPECT_EQ(e.key(), "hyperparameters.entity.edge_aggregation");
    }
}

TEST(Config, TauOverrideReachesEntityStage) {
    TempDir dir;
    write_file(dir / "s/a.jsonl", "{\"id\":1}\n{\"id\":2}\n{\"id\":3}\n{\"id\":4}\n{\"id\":5}\n");
    write_file(dir / "s/b.jsonl", "{\"id\":1}\n{\"id\":2}\n{\"id\":3}\n{\"id\":4}\n{\"id\":9}\n");
    auto c = config_from_yaml("sources:\n  - location: " + dir.path().string() +
                              "\nhyperparameters:\n  entity:\n    tau: 0.9\n");
    EXPECT_DOUBLE_EQ(c.entity.tau, 0.9);
    auto r = run_pipeline(c, Stage::EntityGraph);
    EXPECT_EQ(r.partition.components.size(), 2u);  // overlap 0.8 < 0.9
    c.entity.tau = 0.8;
    EXPECT_EQ(run_pipeline(c, Stage::EntityGraph).partition.components.size(), 1u);
    auto report = run_report(r, config_from_yaml("sources:\n  - location: x\nhyperparameters:\n  entity:\n    tau: 0.9\n"));
    EXPECT_DOUBLE_EQ(report["config"]["hyperparameters"]["entity"]["tau"].get<double>(), 0.9);
}

TEST(Config, YamlRoundTripAndCompleteness) {
    auto c = default_config();
    c.linking.curve_key_types = {KeyValue::Kind::Int};
    c.entity.aggregation = EdgeAggregation::Max;
    auto text = config_to_yaml(c);
    auto back = config_from_yaml(text);
    EXPECT_EQ(config_to_yaml(back), text);
    for (const char* key : {"schema_scan_limit", "envelope", "envelope_threshold", "strict", "workers", "keywords",
                            "hash_pattern", "date_formats", "epoch_min_seconds", "epoch_max_seconds", "name_fields",
                            "min_n", "metric", "threshold", "frequent_key_cap", "frequent_key_min_collections",
                            "witness_sample_k", "curve_key_types", "tau", "name_join_separator", "name_length_cap",
                            "version_suffix_pattern", "edge_aggregation", "formats", "directory",
                            "include_field_mapping", "include_stats", "credentials", "subsystem"}) {
        EXPECT_NE(text.find(std::string(key) + ":"), std::string::npos) << key;
    }
}

// --- sources and ingest ---------------------------------------------------------

TEST(Ingest, ThreeFilesThreeCollections) {
    TempDir dir;
    write_file(dir / "s1/a.jsonl", "{\"id\":1}\n");
    write_file(dir / "s1/b.jsonl", "{\"id\":2}\n");
    write_file(dir / "s2/c.jsonl", "{\"id\":3}\n");
    auto r = ingest(config_for(dir.path()));
    ASSERT_EQ(r.collections.size(), 3u);
    EXPECT_EQ(r.collections[0].ref.id, "s1/a");
    EXPECT_EQ(r.collections[2].ref.subsystem, "s2");
}

TEST(Ingest, BlankFileSkipped) {
    TempDir dir;
    write_file(dir / "s/a.jsonl", "{\"id\":1}\n");
    write_file(dir / "s/blank.jsonl", "\n  \n\n");
    auto r = ingest(config_for(dir.path()));
    EXPECT_EQ(r.collections.size(), 1u);
    EXPECT_EQ(r.empty_collections, std::vector<std::string>{"s/blank"});
    EXPECT_EQ(r.stats.warnings().at(warning::kEmptyCollections), 1u);
}

TEST(Ingest, EnvelopeProfilesPayload) {
    TempDir dir;
    std::string text;
    for (int i = 0; i < 10; ++i)
        text += "{\"createdAt\":\"2021-01-0" + std::to_string(i % 9 + 1) + "\",\"data\":{\"orderId\":" +
                std::to_string(i) + ",\"title\":\"t\"}}\n";
    write_file(dir / "s/env.jsonl", text);
    auto r = ingest(config_for(dir.path()));
    ASSERT_EQ(r.collections.size(), 1u);
    const auto& c = r.collections[0];
    EXPECT_TRUE(c.envelope);
    ASSERT_TRUE(c.profile.primary);
    EXPECT_EQ(c.profile.primary->path.to_string(), "data.orderId");
    EXPECT_EQ(c.keys.keys().size(), 10u);
    bool meta_date = false;
    for (const auto& d : c.profile.dates) meta_date |= d.path.to_string() == "createdAt";
    EXPECT_TRUE(meta_date);

    auto off = config_for(dir.path());
    off.ingest.envelope = EnvelopeMode::Off;
    auto r2 = ingest(off);
    EXPECT_FALSE(r2.collections[0].envelope);
}

TEST(Ingest, ManifestOverridesDiscovery) {
    TempDir dir;
    write_file(dir / "raw/x.jsonl", "{\"id\":1}\n");
    write_file(dir / "raw/y.jsonl", "{\"id\":2}\n");
    write_file(dir / "manifest.yaml", "collections:\n  - file: raw/x.jsonl\n    name: orders\n    subsystem: sales\n");
    auto r = ingest(config_for(dir.path()));
    ASSERT_EQ(r.collections.size(), 1u);
    EXPECT_EQ(r.collections[0].ref.id, "sales/orders");
}

TEST(Ingest, MalformedLinesCounted) {
    TempDir dir;
    write_file(dir / "s/a.jsonl", "{\"id\":1}\n{oops\n[1]\n{\"id\":2}\n");
    auto r = ingest(config_for(dir.path()));
    ASSERT_EQ(r.collections.size(), 1u);
    EXPECT_EQ(r.collections[0].documents, 2u);
    EXPECT_EQ(r.stats.warnings().at(warning::kMalformedDocuments), 2u);
}

TEST(Ingest, UnavailableSources) {
    TempDir dir;
    write_file(dir / "s/a.jsonl", "{\"id\":1}\n");
    auto c = config_for(dir.path());
    c.sources.push_back(SourceConfig{"directory", (dir / "missing").string(), "", ""});
    c.sources.push_back(SourceConfig{"mongodb", "mongodb://localhost:1", "env:PW", ""});
    auto r = ingest(c);
    EXPECT_EQ(r.collections.size(), 1u);
    EXPECT_EQ(r.source_errors.size(), 2u);
    c.ingest.strict = true;
    EXPECT_THROW(ingest(c), SourceUnavailable);
    EXPECT_THROW(ingest(config_for(dir / "missing")), SourceUnavailable);
}

TEST(Ingest, StageErrorCarriesStage) {
    try {
        run_pipeline(config_for("/nonexistent/colink"));
        FAIL() << "no error";
    } catch (const StageError& e) {
        EXPECT_EQ(e.stage(), "ingest");
        EXPECT_THROW(std::rethrow_if_nested(e), SourceUnavailable);
    }
}

TEST(Ingest, SubsystemLabelOverride) {
    TempDir dir;
    write_file(dir / "top.jsonl", "{\"id\":1}\n");
    auto c = config_for(dir.path());
    c.sources[0].subsystem = "billing";
    auto r = ingest(c);
    ASSERT_EQ(r.collections.size(), 1u);
    EXPECT_EQ(r.collections[0].ref.subsystem, "billing");
}

// --- exporters --------------------------------------------------------------------

TEST(Export, JsonSchema) {
    auto j = nlohmann::json::parse(export_graph_text(two_node_graph(), "json"));
    EXPECT_EQ(j["version"], kGraphSchemaVersion);
    ASSERT_EQ(j["nodes"].size(), 2u);
    ASSERT_EQ(j["edges"].size(), 1u);
    for (const char* k : {"u", "v", "n", "jaccard", "overlap", "pmi"}) EXPECT_TRUE(j["edges"][0].contains(k)) << k;
    for (const char* k : {"id", "name", "subsystem", "collections"}) EXPECT_TRUE(j["nodes"][0].contains(k)) << k;
    EXPECT_TRUE(j.contains("meta"));
    EXPECT_EQ(GraphDocument::from_json(j), two_node_graph());
}

TEST(Export, DotStructure) {
    auto dot = export_graph_text(two_node_graph(), "dot");
    EXPECT_EQ(dot.rfind("graph", 0), 0u);
    EXPECT_NE(dot.find("\"s/a\" -- \"s/b\""), std::string::npos);
    EXPECT_EQ(std::count(dot.begin(), dot.end(), '{'), std::count(dot.begin(), dot.end(), '}'));
}

TEST(Export, GraphmlKeysDeclaredOnce) {
    auto xml = export_graph_text(two_node_graph(), "graphml");
    for (const char* k : {"name", "subsystem", "n", "jaccard", "overlap", "pmi"}) {
        std::string decl = std::string("<key id=\"") + k + "\"";
        auto first = xml.find(decl);
        ASSERT_NE(first, std::string::npos) << k;
        EXPECT_EQ(xml.find(decl, first + 1), std::string::npos) << k;
    }
    EXPECT_LT(xml.find("<key "), xml.find("<graph "));
}

TEST(Export, UnknownFormatAndIo) {
    EXPECT_THROW(export_graph_text(two_node_graph(), "pdf"), UnknownFormat);
    EXPECT_THROW(export_graph(two_node_graph(), "json", "/proc/colink/x.json"), IoError);
}

TEST(Export, RegistryIsPluggable) {
    struct Lines : GraphExporter {
        std::string extension() const override { return "txt"; }
        void write(const GraphDocument& g, std::ostream& out) const override { out << g.edges.size(); }
    };
    ExporterRegistry::instance().add("lines", [] { return std::make_unique<Lines>(); });
    EXPECT_EQ(export_graph_text(two_node_graph(), "lines"), "1");
}

// --- field mapping ----------------------------------------------------------------

TEST(FieldMapping, RowsPerField) {
    EntityGraph eg;
    eg.entities = {{"e0", "orders", "s", {"s/a", "s/b"}}};
    eg.entity_of = {{"s/a", 0}, {"s/b", 0}};
    KeyInferenceConfig cfg;
    auto pa = find_keys(parse_document(R"({"id":1,"userId":2})"), true, cfg);
    pa.collection_id = "s/a";
    auto pb = find_keys(parse_document(R"({"id":1})"), true, cfg);
    pb.collection_id = "s/b";
    auto rows = field_mapping(eg, {pa, pb});
    EXPECT_EQ(rows.size(), 3u);
    auto csv = field_mapping_csv(rows);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(field_mapping_json(rows).size(), 3u);
}

TEST(FieldMapping, NoPrimary) {
    EntityGraph eg;
    eg.entities = {{"e0", "x", "s", {"s/a"}}};
    eg.entity_of = {{"s/a", 0}};
    auto p = find_keys(parse_document(R"({"info":{"name":"n","when":"2021-01-01"}})"), false, KeyInferenceConfig{});
    p.collection_id = "s/a";
    auto rows = field_mapping(eg, {p});
    ASSERT_EQ(rows.size(), 2u);
    for (const auto& r : rows) EXPECT_NE(r.role, "primary");
}

// --- end to end ---------------------------------------------------------------------

class PipelineRun : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        root_ = fs::temp_directory_path() / "colink_pipeline_run";
        fs::remove_all(root_);
        CorpusSpec spec;
        spec.seed = 5;
        spec.collections_per_subsystem = {3, 4};
        spec.total_documents = 4000;
        truth_ = generate_corpus(spec, root_ / "corpus");
    }
    static void TearDownTestSuite() { fs::remove_all(root_); }

    static Config config() {
        auto c = config_for(root_ / "corpus");
        return c;
    }

    static inline fs::path root_;
    static inline GroundTruth truth_;
};

TEST_F(PipelineRun, WritesAllOutputs) {
    auto c = config();
    auto r = run_pipeline(c);
    write_outputs(r, c, root_ / "out");
    for (const char* f : {"graph.json", "graph.graphml", "graph.dot", "graph.csv", "collection_graph.json",
                          "field_mapping.csv", "field_mapping.json", "stats.json", "run_report.json",
                          "coverage_pmi.csv", "coverage_jaccard.csv", "coverage_overlap.csv", "coverage_n.csv",
                          "threshold_sweep.csv"}) {
        EXPECT_TRUE(fs::exists(root_ / "out" / f)) << f;
    }
    EXPECT_EQ(read_file(root_ / "out/coverage_pmi.csv").substr(0, 35), "threshold,num_edges,covered_fractio");
    auto doc = read_graph_document(root_ / "out/graph.json");
    EXPECT_EQ(doc.nodes.size(), r.entity_graph.entities.size());
    auto eval = evaluate_against_truth(doc, truth_);
    EXPECT_GE(eval.link_recall, 0.9);
}

TEST_F(PipelineRun, RerunIsByteIdentical) {
    auto c = config();
    auto a = run_pipeline(c);
    write_outputs(a, c, root_ / "out_a");
    c.ingest.workers = 4;
    auto b = run_pipeline(c);
    write_outputs(b, c, root_ / "out_b");
    for (const char* f : {"graph.json", "graph.graphml", "graph.dot", "collection_graph.json", "field_mapping.csv",
                          "stats.json", "coverage_pmi.csv", "threshold_sweep.csv"}) {
        EXPECT_EQ(read_file(root_ / "out_a" / f), read_file(root_ / "out_b" / f)) << f;
    }
}

TEST_F(PipelineRun, UnfilteredHasAtLeastAsManyEdges) {
    auto c = config();
    auto filtered = run_pipeline(c, Stage::Filter);
    c.linking.min_n = 1;
    c.linking.threshold = -std::numeric_limits<double>::infinity();
    auto open = run_pipeline(c, Stage::Filter);
    EXPECT_GE(open.collection_graph.edges.size(), filtered.collection_graph.edges.size());
    EXPECT_EQ(open.collection_graph.edges.size(), open.raw_graph.edges.size());
}

TEST_F(PipelineRun, FieldMappingResolvesInSchema) {
    auto r = run_pipeline(config(), Stage::EntityGraph);
    auto rows = field_mapping(r.entity_graph, r.profiles());
    ASSERT_FALSE(rows.empty());
    std::map<std::string, const AbstractCollection*> by_id;
    for (const auto& c : r.ingest.collections) by_id[c.ref.id] = &c;
    for (const auto& row : rows) {
        const auto* c = by_id.at(row.collection);
        ASSERT_TRUE(c->schema);
        EXPECT_NE(resolve(c->schema->root, FieldPath::parse(row.field_path)), nullptr) << row.field_path;
        EXPECT_EQ(r.entity_graph.entities[r.entity_graph.entity_of.at(row.collection)].id, row.entity_id);
    }
}

TEST_F(PipelineRun, GraphDocumentReloads) {
    auto c = config();
    auto r = run_pipeline(c);
    for (const auto& doc : {entity_graph_document(r, c), collection_graph_document(r, c)}) {
        auto back = GraphDocument::from_json(nlohmann::json::parse(to_json_text(doc)));
        EXPECT_EQ(nlohmann::json::parse(to_json_text(back)), nlohmann::json::parse(to_json_text(doc)));
    }
}

TEST_F(PipelineRun, StagesStopWhereAsked) {
    auto r = run_pipeline(config(), Stage::Link);
    EXPECT_EQ(r.completed, Stage::Link);
    EXPECT_FALSE(r.raw_graph.nodes.empty());
    EXPECT_TRUE(r.entity_graph.entities.empty());
}

TEST_F(PipelineRun, StatsReport) {
    auto r = run_pipeline(config());
    EXPECT_EQ(r.stats.collections, r.ingest.collections.size());
    std::size_t docs = 0;
    for (const auto& [c, n] : truth_.documents) docs += n;
    EXPECT_EQ(r.stats.documents, docs);
    // only data fields go unfilled; keys and names are always present
    EXPECT_GT(r.stats.empty_field_rate, 0.05);
    EXPECT_LT(r.stats.empty_field_rate, 0.29);
}
