#include "colink/link_discovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "colink/error.hpp"
#include "colink/parallel.hpp"

namespace colink {

std::string_view to_string(Metric m) noexcept {
    switch (m) {
        case Metric::N: return "n";
        case Metric::Jaccard: return "jaccard";
        case Metric::Overlap: return "overlap";
        case Metric::Pmi: return "pmi";
    }
    return "?";
}

Metric parse_metric(std::string_view text) {
    std::string t(text);
    std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (t == "n") return Metric::N;
    if (t == "jaccard" || t == "j") return Metric::Jaccard;
    if (t == "overlap" || t == "i") return Metric::Overlap;
    if (t == "pmi") return Metric::Pmi;
    throw ValidationError("metric", "unknown metric '" + std::string(text) + "' (expected n, jaccard, overlap, pmi)");
}

std::size_t metric_n(std::span<const KeyId> u, std::span<const KeyId> v) {
    std::size_t n = 0;
    auto a = u.begin();
    auto b = v.begin();
    while (a != u.end() && b != v.end()) {
        if (*a < *b) {
            ++a;
        } else if (*b < *a) {
            ++b;
        } else {
            ++n;
            ++a;
            ++b;
        }
    }
    return n;
}

double jaccard_from_counts(std::size_t n, std::size_t size_u, std::size_t size_v) {
    return static_cast<double>(n) / static_cast<double>(size_u + size_v - n);
}

double overlap_from_counts(std::size_t n, std::size_t size_u, std::size_t size_v) {
    return static_cast<double>(n) / static_cast<double>(std::min(size_u, size_v));
}

double pmi_from_weights(double shared_weight, double weight_u, double weight_v, double total_weight) {
    return std::log(shared_weight * total_weight / (weight_u * weight_v));
}

std::optional<double> metric_jaccard(std::span<const KeyId> u, std::span<const KeyId> v) {
    if (u.empty() && v.empty()) return std::nullopt;
    return jaccard_from_counts(metric_n(u, v), u.size(), v.size());
}

std::optional<double> metric_overlap(std::span<const KeyId> u, std::span<const KeyId> v) {
    if (u.empty() || v.empty()) return std::nullopt;
    return overlap_from_counts(metric_n(u, v), u.size(), v.size());
}

std::optional<double> metric_pmi(std::span<const KeyId> u, std::span<const KeyId> v, const KeySetIndex& index) {
    double shared = 0.0, wu = 0.0, wv = 0.0;
    for (KeyId z : u) wu += index.weight(z);
    for (KeyId z : v) wv += index.weight(z);
    std::size_t n = 0;
    auto a = u.begin();
    auto b = v.begin();
    while (a != u.end() && b != v.end()) {
        if (*a < *b) {
            ++a;
        } else if (*b < *a) {
            ++b;
        } else {
            shared += index.weight(*a);
            ++n;
            ++a;
            ++b;
        }
    }
    if (n == 0) return std::nullopt;
    return pmi_from_weights(shared, wu, wv, index.total_weight());
}

double LinkEdge::value(Metric m) const noexcept {
    switch (m) {
        case Metric::N: return static_cast<double>(n);
        case Metric::Jaccard: return jaccard;
        case Metric::Overlap: return overlap;
        case Metric::Pmi: return pmi;
    }
    return 0.0;
}

std::vector<std::size_t> CollectionGraph::degrees() const {
    std::vector<std::size_t> deg(nodes.size(), 0);
    for (const auto& e : edges) {
        ++deg[e.u];
        ++deg[e.v];
    }
    return deg;
}

namespace {

struct RowScratch {
    std::vector<std::uint32_t> counts;
    std::vector<double> weights;
    std::vector<std::vector<KeyId>> witness;
    std::vector<CollectionIndex> touched;

    void ensure(std::size_t m) {
        if (counts.size() < m) {
            counts.assign(m, 0);
            weights.assign(m, 0.0);
            witness.assign(m, {});
        }
    }
};

}  // namespace

CollectionGraph pairwise_links(const KeySetIndex& index, const LinkOptions& options, LinkReport* report) {
    const std::size_t m = index.num_collections();
    CollectionGraph graph;
    graph.nodes.reserve(m);
    for (CollectionIndex i = 0; i < m; ++i)
        graph.nodes.push_back(CollectionNode{index.collection_id(i), index.collection_id(i), {}});

    const bool cap_active = options.frequent_key_cap < 1.0 && m >= options.frequent_key_min_collections;
    const double cap_count = options.frequent_key_cap * static_cast<double>(m);
    std::vector<char> capped(index.num_keys(), 0);
    std::size_t capped_total = 0;
    if (cap_active) {
        for (KeyId z = 0; z < index.num_keys(); ++z) {
            if (static_cast<double>(index.count(z)) > cap_count) {
                capped[z] = 1;
                ++capped_total;
            }
        }
    }
    std::vector<std::vector<KeyId>> capped_of(m);
    if (capped_total > 0) {
        for (CollectionIndex i = 0; i < m; ++i)
            for (KeyId z : index.set(i))
                if (capped[z]) capped_of[i].push_back(z);
    }

    const std::size_t k = options.witness_sample_k;
    std::vector<std::vector<LinkEdge>> rows(m);
    std::vector<std::size_t> row_updates(m, 0);

    parallel_for(m, options.workers, [&](std::size_t row) {
        thread_local RowScratch s;
        s.ensure(m);
        const auto i = static_cast<CollectionIndex>(row);
        s.touched.clear();
        std::size_t updates = 0;
        for (KeyId z : index.set(i)) {
            if (capped[z]) continue;
            const auto holders = index.holders(z);
            const double w = index.weight(z);
            for (auto it = std::upper_bound(holders.begin(), holders.end(), i); it != holders.end(); ++it) {
                const CollectionIndex j = *it;
                if (s.counts[j] == 0) s.touched.push_back(j);
                ++s.counts[j];
                s.weights[j] += w;
                if (s.witness[j].size() < k) s.witness[j].push_back(z);
                ++updates;
            }
        }
        std::sort(s.touched.begin(), s.touched.end());
        auto& out = rows[row];
        out.reserve(s.touched.size());
        const auto size_i = index.set(i).size();
        for (CollectionIndex j : s.touched) {
            std::size_t n = s.counts[j];
            double shared = s.weights[j];
            auto& wit = s.witness[j];
            if (!capped_of[i].empty() && !capped_of[j].empty()) {
                const auto& a = capped_of[i];
                const auto& b = capped_of[j];
                std::size_t x = 0, y = 0;
                while (x < a.size() && y < b.size()) {
                    if (a[x] < b[y]) {
                        ++x;
                    } else if (b[y] < a[x]) {
                        ++y;
                    } else {
                        ++n;
                        shared += index.weight(a[x]);
                        if (wit.size() < k) wit.push_back(a[x]);
                        ++x;
                        ++y;
                    }
                }
                std::sort(wit.begin(), wit.end());
            }
            const auto size_j = index.set(j).size();
            LinkEdge e;
            e.u = i;
            e.v = j;
            e.n = n;
            e.jaccard = jaccard_from_counts(n, size_i, size_j);
            e.overlap = overlap_from_counts(n, size_i, size_j);
            e.pmi = pmi_from_weights(shared, index.set_weight(i), index.set_weight(j), index.total_weight());
            e.witness = std::move(wit);
            out.push_back(std::move(e));
            s.counts[j] = 0;
            s.weights[j] = 0.0;
            s.witness[j].clear();
        }
        row_updates[row] = updates;
    });

    std::size_t total_edges = 0;
    for (const auto& r : rows) total_edges += r.size();
    graph.edges.reserve(total_edges);
    std::size_t updates = 0;
    for (std::size_t r = 0; r < m; ++r) {
        for (auto& e : rows[r]) graph.edges.push_back(std::move(e));
        updates += row_updates[r];
    }
    if (report) {
        report->capped_keys = capped_total;
        report->pair_updates = updates;
    }
    return graph;
}

CollectionGraph filter_edges(const CollectionGraph& graph, const FilterCriterion& criterion) {
    CollectionGraph out;
    out.nodes = graph.nodes;
    for (const auto& e : graph.edges)
        if (e.n >= criterion.min_n && e.value(criterion.metric) >= criterion.threshold) out.edges.push_back(e);
    return out;
}

std::vector<CurvePoint> coverage_curve(const CollectionGraph& graph, Metric metric,
                                       std::span<const double> thresholds, std::size_t min_n) {
    std::vector<const LinkEdge*> edges;
    for (const auto& e : graph.edges)
        if (e.n >= min_n) edges.push_back(&e);
    std::stable_sort(edges.begin(), edges.end(),
                     [metric](const LinkEdge* a, const LinkEdge* b) { return a->value(metric) > b->value(metric); });

    const std::size_t total_nodes = graph.nodes.size();
    std::vector<std::size_t> degree(total_nodes, 0);
    std::size_t covered = 0;
    std::size_t next = 0;
    std::vector<CurvePoint> curve;
    curve.reserve(thresholds.size());
    double previous = std::numeric_limits<double>::infinity();
    for (double t : thresholds) {
        if (t > previous) throw ValidationError("thresholds", "coverage thresholds must be sorted descending");
        previous = t;
        while (next < edges.size() && edges[next]->value(metric) >= t) {
            const auto* e = edges[next++];
            if (degree[e->u]++ == 0) ++covered;
            if (degree[e->v]++ == 0) ++covered;
        }
        const double fraction =
            total_nodes == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total_nodes);
        curve.push_back(CurvePoint{t, next, fraction});
    }
    return curve;
}

std::vector<double> curve_thresholds(const CollectionGraph& graph, Metric metric, std::size_t min_n) {
    std::vector<double> values;
    for (const auto& e : graph.edges)
        if (e.n >= min_n) values.push_back(e.value(metric));
    std::sort(values.begin(), values.end(), std::greater<>());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    const double top = values.empty() ? 0.0 : values.front();
    values.insert(values.begin(), std::nextafter(top, std::numeric_limits<double>::infinity()));
    return values;
}

double curve_auc(std::span<const CurvePoint> curve) {
    if (curve.size() < 2) throw DegenerateRange("AUC needs at least two curve points");
    std::vector<CurvePoint> pts(curve.begin(), curve.end());
    std::stable_sort(pts.begin(), pts.end(),
                     [](const CurvePoint& a, const CurvePoint& b) { return a.num_edges < b.num_edges; });
    const double lo = static_cast<double>(pts.front().num_edges);
    const double hi = static_cast<double>(pts.back().num_edges);
    if (hi <= lo) throw DegenerateRange("all curve points share one edge count");
    double area = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double dx = static_cast<double>(pts[i].num_edges) - static_cast<double>(pts[i - 1].num_edges);
        area += dx * 0.5 * (pts[i].covered_fraction + pts[i - 1].covered_fraction);
    }
    return area / (hi - lo);
}

}  // namespace colink
