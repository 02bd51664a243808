#include "colink/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "colink/error.hpp"

namespace colink {

GraphDocument GraphDocument::from(const CollectionGraph& graph) {
    GraphDocument doc;
    for (const auto& n : graph.nodes) doc.nodes.push_back(GraphNode{n.id, n.name, n.subsystem, {n.id}});
    for (const auto& e : graph.edges)
        doc.edges.push_back(
            GraphEdge{graph.nodes[e.u].id, graph.nodes[e.v].id, e.n, e.jaccard, e.overlap, e.pmi});
    return doc;
}

GraphDocument GraphDocument::from(const EntityGraph& graph) {
    GraphDocument doc;
    for (const auto& e : graph.entities) doc.nodes.push_back(GraphNode{e.id, e.name, e.subsystem, e.members});
    for (const auto& e : graph.edges)
        doc.edges.push_back(
            GraphEdge{graph.entities[e.u].id, graph.entities[e.v].id, e.n, e.jaccard, e.overlap, e.pmi});
    return doc;
}

nlohmann::ordered_json GraphDocument::to_json() const {
    nlohmann::ordered_json j;
    j["version"] = version;
    auto& nodes_json = j["nodes"] = nlohmann::ordered_json::array();
    for (const auto& n : nodes)
        nodes_json.push_back({{"id", n.id}, {"name", n.name}, {"subsystem", n.subsystem}, {"collections", n.collections}});
    auto& edges_json = j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : edges)
        edges_json.push_back(
            {{"u", e.u}, {"v", e.v}, {"n", e.n}, {"jaccard", e.jaccard}, {"overlap", e.overlap}, {"pmi", e.pmi}});
    j["meta"] = meta;
    return j;
}

GraphDocument GraphDocument::from_json(const nlohmann::json& j) {
    try {
        GraphDocument doc;
        doc.version = j.at("version").get<int>();
        if (doc.version != kGraphSchemaVersion)
            throw ParseError("unsupported graph schema version " + std::to_string(doc.version));
        for (const auto& n : j.at("nodes")) {
            doc.nodes.push_back(GraphNode{n.at("id").get<std::string>(), n.at("name").get<std::string>(),
                                          n.at("subsystem").get<std::string>(),
                                          n.at("collections").get<std::vector<std::string>>()});
        }
        for (const auto& e : j.at("edges")) {
            doc.edges.push_back(GraphEdge{e.at("u").get<std::string>(), e.at("v").get<std::string>(),
                                          e.at("n").get<std::size_t>(), e.at("jaccard").get<double>(),
                                          e.at("overlap").get<double>(), e.at("pmi").get<double>()});
        }
        if (j.contains("meta")) doc.meta = nlohmann::ordered_json::parse(j.at("meta").dump());
        return doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed graph document: ") + e.what());
    }
}

std::string to_json_text(const GraphDocument& graph) { return graph.to_json().dump(2) + "\n"; }

GraphDocument read_graph_document(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read graph file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("graph file " + path.string() + " is not valid JSON: " + e.what());
    }
    return GraphDocument::from_json(j);
}

namespace {

std::string number(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& parts, char sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out += c;
    }
    return out + "\"";
}

std::string csv_field(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

class JsonExporter : public GraphExporter {
public:
    std::string extension() const override { return "json"; }
    void write(const GraphDocument& graph, std::ostream& out) const override { out << to_json_text(graph); }
};

class GraphmlExporter : public GraphExporter {
public:
    std::string extension() const override { return "graphml"; }
    void write(const GraphDocument& graph, std::ostream& out) const override {
        out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
            << "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n"
            << "  <key id=\"name\" for=\"node\" attr.name=\"name\" attr.type=\"string\"/>\n"
            << "  <key id=\"subsystem\" for=\"node\" attr.name=\"subsystem\" attr.type=\"string\"/>\n"
            << "  <key id=\"collections\" for=\"node\" attr.name=\"collections\" attr.type=\"string\"/>\n"
            << "  <key id=\"n\" for=\"edge\" attr.name=\"n\" attr.type=\"long\"/>\n"
            << "  <key id=\"jaccard\" for=\"edge\" attr.name=\"jaccard\" attr.type=\"double\"/>\n"
            << "  <key id=\"overlap\" for=\"edge\" attr.name=\"overlap\" attr.type=\"double\"/>\n"
            << "  <key id=\"pmi\" for=\"edge\" attr.name=\"pmi\" attr.type=\"double\"/>\n"
            << "  <graph id=\"G\" edgedefault=\"undirected\">\n";
        for (const auto& n : graph.nodes) {
            out << "    <node id=\"" << xml_escape(n.id) << "\">"
                << "<data key=\"name\">" << xml_escape(n.name) << "</data>"
                << "<data key=\"subsystem\">" << xml_escape(n.subsystem) << "</data>"
                << "<data key=\"collections\">" << xml_escape(join(n.collections, ';')) << "</data>"
                << "</node>\n";
        }
        for (const auto& e : graph.edges) {
            out << "    <edge source=\"" << xml_escape(e.u) << "\" target=\"" << xml_escape(e.v) << "\">"
                << "<data key=\"n\">" << e.n << "</data>"
                << "<data key=\"jaccard\">" << number(e.jaccard) << "</data>"
                << "<data key=\"overlap\">" << number(e.overlap) << "</data>"
                << "<data key=\"pmi\">" << number(e.pmi) << "</data>"
                << "</edge>\n";
        }
        out << "  </graph>\n</graphml>\n";
    }
};

class DotExporter : public GraphExporter {
public:
    std::string extension() const override { return "dot"; }
    void write(const GraphDocument& graph, std::ostream& out) const override {
        out << "graph colink {\n";
        for (const auto& n : graph.nodes) {
            out << "  " << dot_quote(n.id) << " [label=" << dot_quote(n.name)
                << ", subsystem=" << dot_quote(n.subsystem) << ", collections=" << dot_quote(join(n.collections, ';'))
                << "];\n";
        }
        for (const auto& e : graph.edges) {
            out << "  " << dot_quote(e.u) << " -- " << dot_quote(e.v) << " [n=" << e.n
                << ", jaccard=" << number(e.jaccard) << ", overlap=" << number(e.overlap)
                << ", pmi=" << number(e.pmi) << "];\n";
        }
        out << "}\n";
    }
};

class CsvExporter : public GraphExporter {
public:
    std::string extension() const override { return "csv"; }
    void write(const GraphDocument& graph, std::ostream& out) const override {
        out << "u,v,n,jaccard,overlap,pmi\n";
        for (const auto& e : graph.edges) {
            out << csv_field(e.u) << ',' << csv_field(e.v) << ',' << e.n << ',' << number(e.jaccard) << ','
                << number(e.overlap) << ',' << number(e.pmi) << '\n';
        }
    }
};

}  // namespace

ExporterRegistry::ExporterRegistry() {
    add("json", [] { return std::make_unique<JsonExporter>(); });
    add("graphml", [] { return std::make_unique<GraphmlExporter>(); });
    add("dot", [] { return std::make_unique<DotExporter>(); });
    add("csv", [] { return std::make_unique<CsvExporter>(); });
}

ExporterRegistry& ExporterRegistry::instance() {
    static ExporterRegistry registry;
    return registry;
}

void ExporterRegistry::add(const std::string& format, Factory factory) { factories_[format] = std::move(factory); }

std::unique_ptr<GraphExporter> ExporterRegistry::create(const std::string& format) const {
    auto it = factories_.find(format);
    if (it == factories_.end()) throw UnknownFormat("unknown export format '" + format + "'");
    return it->second();
}

std::vector<std::string> ExporterRegistry::formats() const {
    std::vector<std::string> out;
    for (const auto& [name, factory] : factories_) out.push_back(name);
    return out;
}

std::string export_graph_text(const GraphDocument& graph, const std::string& format) {
    std::ostringstream out;
    ExporterRegistry::instance().create(format)->write(graph, out);
    return out.str();
}

void export_graph(const GraphDocument& graph, const std::string& format, const std::filesystem::path& path) {
    write_text_file(path, export_graph_text(graph, format));
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace colink
