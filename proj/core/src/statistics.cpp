#include "colink/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "colink/error.hpp"

namespace colink {

namespace {

double median_sorted(const std::vector<double>& v, std::size_t begin, std::size_t end) {
    const std::size_t n = end - begin;
    if (n == 0) return 0.0;
    const std::size_t mid = begin + n / 2;
    return n % 2 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

bool is_empty_value(const Value& v) {
    switch (v.type()) {
        case ValueType::Null: return true;
        case ValueType::Str: return v.as_str().empty();
        case ValueType::Array: return v.as_array().empty();
        case ValueType::Object: return v.as_object().empty();
        default: return false;
    }
}

std::string size_bucket(std::size_t n) {
    std::size_t lo = 1;
    while (lo * 2 <= n) lo *= 2;
    return "[" + std::to_string(lo) + "," + std::to_string(lo * 2) + ")";
}

}  // namespace

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) return {};
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n == 1) return {values[0], values[0], values[0]};
    const std::size_t half = n / 2;
    return Quartiles{median_sorted(values, 0, half), median_sorted(values, 0, n), median_sorted(values, n - half, n)};
}

// ---------------------------------------------------------------------------

void StatsAccumulator::count_types(const Value& v) {
    ++value_types_[std::string(to_string(v.type()))];
    if (v.is_array()) {
        for (const auto& el : v.as_array()) count_types(el);
    } else if (v.is_object()) {
        for (const auto& [name, field] : v.as_object()) count_types(field);
    }
}

void StatsAccumulator::add_document(const Object& payload, std::optional<bool> envelope_data_nonempty,
                                    std::size_t duplicate_fields) {
    ++documents_;
    ++nesting_hist_[nesting_depth(payload)];
    for (const auto& [name, field] : payload) {
        ++fields_total_;
        if (is_empty_value(field)) ++fields_empty_;
        count_types(field);
    }
    if (envelope_data_nonempty) {
        ++envelope_docs_;
        if (*envelope_data_nonempty) ++envelope_filled_;
    }
    if (duplicate_fields) warn(warning::kDuplicateFields, duplicate_fields);
}

void StatsAccumulator::add_collection_size(std::size_t documents) { collection_sizes_.push_back(documents); }

void StatsAccumulator::warn(const std::string& name, std::size_t count) { warnings_[name] += count; }

void StatsAccumulator::merge(const StatsAccumulator& other) {
    documents_ += other.documents_;
    collection_sizes_.insert(collection_sizes_.end(), other.collection_sizes_.begin(), other.collection_sizes_.end());
    for (const auto& [k, v] : other.nesting_hist_) nesting_hist_[k] += v;
    for (const auto& [k, v] : other.value_types_) value_types_[k] += v;
    fields_total_ += other.fields_total_;
    fields_empty_ += other.fields_empty_;
    envelope_docs_ += other.envelope_docs_;
    envelope_filled_ += other.envelope_filled_;
    for (const auto& [k, v] : other.warnings_) warnings_[k] += v;
}

std::string key_type_name(const KeyDescriptor& descriptor, const Value* schema_value) {
    if (descriptor.id_type == IdType::Many) return "multi";
    if (descriptor.id_type == IdType::Composite) return "composite";
    if (!schema_value) return "unknown";
    switch (schema_value->type()) {
        case ValueType::Int: return "int";
        case ValueType::Str: return "str";
        case ValueType::Bool: return "bool";
        default: return std::string(to_string(schema_value->type()));
    }
}

CorpusStats finalize_stats(const StatsAccumulator& acc, const std::vector<CollectionKeyProfile>& profiles,
                           const std::vector<const Object*>& schema_roots, const KeySetIndex& index) {
    CorpusStats stats;
    stats.collections = acc.collection_sizes().size();
    stats.documents = acc.documents();
    std::vector<double> sizes;
    for (auto s : acc.collection_sizes()) {
        ++stats.docs_per_collection_hist[size_bucket(std::max<std::size_t>(s, 1))];
        sizes.push_back(static_cast<double>(s));
    }
    stats.docs_per_collection_quartiles = quartiles(std::move(sizes));
    stats.nesting_depth_hist = acc.nesting_hist();
    stats.value_type_hist = acc.value_types();
    stats.data_field_fill_rate = acc.envelope_documents() == 0
                                     ? 1.0
                                     : static_cast<double>(acc.envelope_filled()) /
                                           static_cast<double>(acc.envelope_documents());
    stats.empty_field_rate = acc.fields_total() == 0 ? 0.0
                                                     : static_cast<double>(acc.fields_empty()) /
                                                           static_cast<double>(acc.fields_total());
    stats.warnings = acc.warnings();

    std::set<std::pair<std::string, std::string>> unique_keys;
    for (std::size_t i = 0; i < profiles.size(); ++i) {
        const Object* root = i < schema_roots.size() ? schema_roots[i] : nullptr;
        for (const KeyDescriptor* d : profiles[i].key_descriptors()) {
            const Value* v = root ? resolve(*root, d->path) : nullptr;
            auto type = key_type_name(*d, v);
            ++stats.key_type_hist.all[type];
            if (unique_keys.emplace(d->path.wildcard_string(), type).second) ++stats.key_type_hist.unique[type];
        }
    }
    for (KeyId z = 0; z < index.num_keys(); ++z) ++stats.key_occurrence[index.count(z)];
    stats.distinct_keys = index.num_keys();
    return stats;
}

CorpusStats collect_stats(const std::vector<Collection>& collections,
                          const std::vector<CollectionKeyProfile>& profiles, const KeySetIndex& index) {
    StatsAccumulator acc;
    std::vector<const Object*> roots;
    for (const auto& c : collections) {
        acc.add_collection_size(c.documents.size());
        for (const auto& d : c.documents) acc.add_document(d.root, std::nullopt, d.duplicate_fields);
        const Document* schema = schema_document(c);
        roots.push_back(schema ? &schema->root : nullptr);
    }
    for (const auto& p : profiles) {
        if (p.low_confidence_primary) acc.warn(warning::kHashFallbackPrimary);
        if (p.key_descriptors().empty()) acc.warn(warning::kEmptyProfile);
    }
    return finalize_stats(acc, profiles, roots, index);
}

nlohmann::ordered_json CorpusStats::to_json() const {
    nlohmann::ordered_json j;
    j["collections"] = collections;
    j["documents"] = documents;
    j["docs_per_collection"] = {{"histogram", docs_per_collection_hist},
                                {"quartiles",
                                 {{"q1", docs_per_collection_quartiles.q1},
                                  {"q2", docs_per_collection_quartiles.q2},
                                  {"q3", docs_per_collection_quartiles.q3}}}};
    nlohmann::ordered_json nesting = nlohmann::ordered_json::object();
    for (const auto& [depth, count] : nesting_depth_hist) nesting[std::to_string(depth)] = count;
    j["nesting_depth_hist"] = nesting;
    j["value_type_hist"] = value_type_hist;
    j["key_type_hist"] = {{"all", key_type_hist.all}, {"unique", key_type_hist.unique}};
    j["data_field_fill_rate"] = data_field_fill_rate;
    j["empty_field_rate"] = empty_field_rate;
    nlohmann::ordered_json occurrence = nlohmann::ordered_json::object();
    for (const auto& [c, count] : key_occurrence) occurrence[std::to_string(c)] = count;
    j["key_occurrence"] = occurrence;
    j["distinct_keys"] = distinct_keys;
    j["warnings"] = warnings;
    return j;
}

// ---------------------------------------------------------------------------

GraphView GraphView::of(const CollectionGraph& g) {
    GraphView view;
    view.num_nodes = g.nodes.size();
    for (const auto& e : g.edges) view.edges.emplace_back(e.u, e.v);
    return view;
}

GraphView GraphView::of(const EntityGraph& g) {
    GraphView view;
    view.num_nodes = g.entities.size();
    for (const auto& e : g.edges) view.edges.emplace_back(e.u, e.v);
    return view;
}

double average_degree(const GraphView& graph) {
    if (graph.num_nodes == 0) return 0.0;
    return 2.0 * static_cast<double>(graph.edges.size()) / static_cast<double>(graph.num_nodes);
}

double density(const GraphView& graph) {
    if (graph.num_nodes < 2) return 0.0;
    const double n = static_cast<double>(graph.num_nodes);
    return 2.0 * static_cast<double>(graph.edges.size()) / (n * (n - 1.0));
}

double modularity(const GraphView& graph, const std::vector<std::string>& group_of_node) {
    if (graph.edges.empty()) throw NoEdges("modularity is undefined for a graph without edges");
    if (group_of_node.size() != graph.num_nodes)
        throw InvariantViolation("modularity: grouping must cover every node");
    std::map<std::string, double> inside, degree;
    for (const auto& [u, v] : graph.edges) {
        degree[group_of_node[u]] += 1.0;
        degree[group_of_node[v]] += 1.0;
        if (group_of_node[u] == group_of_node[v]) inside[group_of_node[u]] += 1.0;
    }
    const double m = static_cast<double>(graph.edges.size());
    double q = 0.0;
    for (const auto& [group, deg] : degree) {
        const double share = deg / (2.0 * m);
        q += inside[group] / m - share * share;
    }
    return q;
}

SubsystemCoverage subsystem_coverage(const EntityGraph& graph,
                                     const std::map<std::string, std::string>& subsystem_of_collection) {
    std::vector<char> has_edge(graph.entities.size(), 0);
    for (const auto& e : graph.edges) has_edge[e.u] = has_edge[e.v] = 1;
    std::set<std::string> all, covered;
    for (const auto& [collection, subsystem] : subsystem_of_collection) {
        all.insert(subsystem);
        auto it = graph.entity_of.find(collection);
        if (it != graph.entity_of.end() && has_edge[it->second]) covered.insert(subsystem);
    }
    return SubsystemCoverage{covered.size(), all.size()};
}

nlohmann::ordered_json GraphSummary::to_json() const {
    nlohmann::ordered_json j;
    j["nodes"] = nodes;
    j["edges"] = edges;
    j["average_degree"] = average_degree;
    j["density"] = density;
    j["modularity"] = modularity ? nlohmann::ordered_json(*modularity) : nlohmann::ordered_json(nullptr);
    return j;
}

namespace {

GraphSummary summarize_view(const GraphView& view, const std::vector<std::string>& groups) {
    GraphSummary s;
    s.nodes = view.num_nodes;
    s.edges = view.edges.size();
    s.average_degree = average_degree(view);
    s.density = density(view);
    if (!view.edges.empty()) s.modularity = modularity(view, groups);
    return s;
}

}  // namespace

GraphSummary summarize(const CollectionGraph& graph) {
    std::vector<std::string> groups;
    for (const auto& n : graph.nodes) groups.push_back(n.subsystem);
    return summarize_view(GraphView::of(graph), groups);
}

GraphSummary summarize(const EntityGraph& graph) {
    std::vector<std::string> groups;
    for (const auto& e : graph.entities) groups.push_back(e.subsystem);
    return summarize_view(GraphView::of(graph), groups);
}

}  // namespace colink
