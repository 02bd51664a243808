#pragma once

// Canonical graph document (the stable JSON schema shared by collection and
// entity graphs) and the pluggable exporters that write it.

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "colink/entity.hpp"
#include "colink/link_discovery.hpp"

namespace colink {

inline constexpr int kGraphSchemaVersion = 1;

struct GraphNode {
    std::string id;
    std::string name;
    std::string subsystem;
    std::vector<std::string> collections;
    friend bool operator==(const GraphNode&, const GraphNode&) = default;
};

struct GraphEdge {
    std::string u;  // node ids
    std::string v;
    std::size_t n = 0;
    double jaccard = 0.0;
    double overlap = 0.0;
    double pmi = 0.0;
    friend bool operator==(const GraphEdge&, const GraphEdge&) = default;
};

struct GraphDocument {
    int version = kGraphSchemaVersion;
    std::vector<GraphNode> nodes;
    std::vector<GraphEdge> edges;
    nlohmann::ordered_json meta = nlohmann::ordered_json::object();

    static GraphDocument from(const CollectionGraph& graph);
    static GraphDocument from(const EntityGraph& graph);

    nlohmann::ordered_json to_json() const;
    // Throws ParseError on a document that does not follow the schema.
    static GraphDocument from_json(const nlohmann::json& j);
    friend bool operator==(const GraphDocument& a, const GraphDocument& b) {
        return a.version == b.version && a.nodes == b.nodes && a.edges == b.edges && a.meta == b.meta;
    }
};

std::string to_json_text(const GraphDocument& graph);
// Throws IoError or ParseError.
GraphDocument read_graph_document(const std::filesystem::path& path);

class GraphExporter {
public:
    virtual ~GraphExporter() = default;
    virtual std::string extension() const = 0;
    virtual void write(const GraphDocument& graph, std::ostream& out) const = 0;
};

class ExporterRegistry {
public:
    using Factory = std::function<std::unique_ptr<GraphExporter>()>;

    // Pre-populated with json, graphml, dot and csv.
    static ExporterRegistry& instance();

    void add(const std::string& format, Factory factory);
    // Throws UnknownFormat.
    std::unique_ptr<GraphExporter> create(const std::string& format) const;
    std::vector<std::string> formats() const;

private:
    ExporterRegistry();
    std::map<std::string, Factory> factories_;
};

// Writes `graph` in `format` to `path`. Throws IoError, UnknownFormat.
void export_graph(const GraphDocument& graph, const std::string& format, const std::filesystem::path& path);
std::string export_graph_text(const GraphDocument& graph, const std::string& format);

// Writes `content` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace colink
