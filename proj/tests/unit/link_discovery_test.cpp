#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <gtest/gtest.h>

#include "colink/error.hpp"
#include "colink/json_io.hpp"
#include "colink/key_index.hpp"
#include "colink/link_discovery.hpp"
#include "gen.hpp"
#include "oracle.hpp"

using namespace colink;

namespace {

using oracle::Sets;

std::vector<KeyId> ids_of(const KeySetIndex& index, const std::set<std::int64_t>& values) {
    std::vector<KeyId> out;
    for (auto v : values) out.push_back(*index.find_key(KeyValue(v)));
    std::sort(out.begin(), out.end());
    return out;
}

LinkOptions uncapped(std::size_t workers = 1) {
    LinkOptions o;
    o.frequent_key_cap = 1.0;
    o.workers = workers;
    return o;
}

CollectionGraph graph_of(const Sets& sets, const LinkOptions& opts = uncapped()) {
    return pairwise_links(gen::index_of(sets), opts);
}

}  // namespace

TEST(Metrics, IntersectionCount) {
    std::vector<KeyId> a{1, 2, 3}, b{2, 3, 4}, d{7, 8}, five{1, 2, 3, 4, 5};
    EXPECT_EQ(metric_n(a, b), 2u);
    EXPECT_EQ(metric_n(a, d), 0u);
    EXPECT_EQ(metric_n(five, five), 5u);
}

TEST(Metrics, Jaccard) {
    std::vector<KeyId> a{1, 2, 3}, b{2, 3, 4}, d{7, 8}, e;
    EXPECT_DOUBLE_EQ(*metric_jaccard(a, b), 0.5);  // |{2,3}| / |{1,2,3,4}|
    EXPECT_DOUBLE_EQ(*metric_jaccard(a, a), 1.0);
    EXPECT_DOUBLE_EQ(*metric_jaccard(a, d), 0.0);
    EXPECT_FALSE(metric_jaccard(e, e));
}

TEST(Metrics, Overlap) {
    std::vector<KeyId> a{2, 3}, b{1, 2, 3, 4}, d{7, 8}, e;
    EXPECT_DOUBLE_EQ(*metric_overlap(a, b), 1.0);
    EXPECT_DOUBLE_EQ(*metric_overlap(a, d), 0.0);
    EXPECT_FALSE(metric_overlap(a, e));
    std::vector<KeyId> small{1, 2}, big;
    for (KeyId k = 2; k <= 101; ++k) big.push_back(k);
    EXPECT_DOUBLE_EQ(*metric_overlap(small, big), 0.5);
}

TEST(Metrics, PmiUniformWeights) {
    // Every key held by exactly two collections; U = V.
    Sets sets = {{1, 2}, {1, 2}, {3, 4, 5}, {3, 4, 5}};
    auto index = gen::index_of(sets);
    auto u = ids_of(index, sets[0]);
    double t = index.total_weight();
    EXPECT_DOUBLE_EQ(t, 2.5);
    // w(U) = |U| / 2 = 1
    EXPECT_NEAR(*metric_pmi(u, u, index), std::log(t / 1.0), 1e-12);
    EXPECT_GT(*metric_pmi(u, u, index), 0.0);
}

TEST(Metrics, PmiFrequentKeyWeight) {
    // "0" in all m collections weighs 1/m; a pair-unique key weighs 1/2.
    std::size_t m = 8;
    Sets sets(m);
    for (auto& s : sets) s.insert(0);
    sets[0].insert(100);
    sets[1].insert(100);
    for (std::size_t i = 0; i < m; ++i) sets[i].insert(1000 + static_cast<std::int64_t>(i));
    auto index = gen::index_of(sets);
    EXPECT_DOUBLE_EQ(index.weight(*index.find_key(KeyValue(std::int64_t{0}))), 1.0 / m);
    EXPECT_DOUBLE_EQ(index.weight(*index.find_key(KeyValue(std::int64_t{100}))), 0.5);
    auto a = ids_of(index, sets[0]), b = ids_of(index, sets[1]), c = ids_of(index, sets[2]);
    EXPECT_GT(*metric_pmi(a, b, index), 0.0);
    EXPECT_LT(*metric_pmi(a, c, index), 0.0);
}

TEST(Metrics, PmiSymmetricAndUndefinedWhenDisjoint) {
    Sets sets = {{1, 2, 3}, {3, 4}, {9}};
    auto index = gen::index_of(sets);
    auto a = ids_of(index, sets[0]), b = ids_of(index, sets[1]), c = ids_of(index, sets[2]);
    EXPECT_DOUBLE_EQ(*metric_pmi(a, b, index), *metric_pmi(b, a, index));
    EXPECT_FALSE(metric_pmi(a, c, index));
}

TEST(PairwiseLinks, SmallExample) {
    auto g = graph_of({{1, 2}, {2, 3}, {9}});
    ASSERT_EQ(g.nodes.size(), 3u);
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].u, 0u);
    EXPECT_EQ(g.edges[0].v, 1u);
    EXPECT_EQ(g.edges[0].n, 1u);
    EXPECT_EQ(g.degrees()[2], 0u);
}

TEST(PairwiseLinks, EmptyCorpus) {
    auto g = graph_of({});
    EXPECT_TRUE(g.nodes.empty());
    EXPECT_TRUE(g.edges.empty());
}

TEST(PairwiseLinks, WitnessSample) {
    auto index = gen::index_of({{1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}});
    auto g = pairwise_links(index, uncapped());
    ASSERT_EQ(g.edges.size(), 1u);
    ASSERT_EQ(g.edges[0].witness.size(), 3u);
    EXPECT_TRUE(std::is_sorted(g.edges[0].witness.begin(), g.edges[0].witness.end()));
}

TEST(PairwiseLinks, FrequentKeyCap) {
    // 12 collections share "0"; only c0/c1 share another key.
    Sets sets(12);
    for (auto& s : sets) s.insert(0);
    sets[0].insert(5);
    sets[1].insert(5);
    LinkReport report;
    auto g = pairwise_links(gen::index_of(sets), LinkOptions{}, &report);
    EXPECT_EQ(report.capped_keys, 1u);
    ASSERT_EQ(g.edges.size(), 1u);
    EXPECT_EQ(g.edges[0].n, 2u);  // the capped key still counts in the metrics

    auto full = graph_of(sets);
    EXPECT_EQ(full.edges.size(), 12u * 11u / 2u);
}

TEST(PairwiseLinks, CapNeedsMinimumCollections) {
    Sets sets = {{0, 1}, {0, 2}, {0, 3}};
    auto g = pairwise_links(gen::index_of(sets), LinkOptions{});
    EXPECT_EQ(g.edges.size(), 3u);
}

// Oracle equivalence: N exact, J/I/PMI within 1e-12, same edge set.
TEST(LinkDiscoveryProperty, IndexMatchesBruteForce) {
    gen::Rng rng(31);
    for (int round = 0; round < 200; ++round) {
        std::size_t m = gen::uniform(rng, 0, 20);
        auto universe = static_cast<std::int64_t>(gen::uniform(rng, 5, 3000));
        Sets sets = gen::key_sets(rng, m, 1000, universe);
        auto expected = oracle::links(sets);
        auto g = graph_of(sets, uncapped(1 + round % 4));
        ASSERT_EQ(g.edges.size(), expected.size());
        for (const auto& e : g.edges) {
            auto it = expected.find({e.u, e.v});
            ASSERT_NE(it, expected.end());
            ASSERT_EQ(e.n, it->second.n);
            ASSERT_NEAR(e.jaccard, it->second.jaccard, 1e-12);
            ASSERT_NEAR(e.overlap, it->second.overlap, 1e-12);
            ASSERT_NEAR(e.pmi, it->second.pmi, 1e-12);
        }
    }
}

TEST(LinkDiscoveryProperty, EdgeIdentities) {
    gen::Rng rng(32);
    for (int round = 0; round < 100; ++round) {
        Sets sets = gen::key_sets(rng, gen::uniform(rng, 2, 15), 60, 80);
        auto index = gen::index_of(sets);
        auto g = pairwise_links(index, uncapped());
        for (const auto& e : g.edges) {
            ASSERT_LT(e.u, e.v);
            ASSERT_GE(e.jaccard, 0.0);
            ASSERT_LE(e.jaccard, e.overlap);
            ASSERT_LE(e.overlap, 1.0);
            bool same = sets[e.u] == sets[e.v];
            ASSERT_EQ(e.jaccard == e.overlap, same);
            auto u = index.set(e.u), v = index.set(e.v);
            ASSERT_EQ(metric_n(u, v), metric_n(v, u));
            ASSERT_EQ(*metric_jaccard(u, v), *metric_jaccard(v, u));
            ASSERT_EQ(*metric_overlap(u, v), *metric_overlap(v, u));
            ASSERT_EQ(*metric_pmi(u, v, index), *metric_pmi(v, u, index));
        }
    }
}

TEST(LinkDiscoveryProperty, PrivateKeyLeavesOtherPairs) {
    gen::Rng rng(33);
    for (int round = 0; round < 100; ++round) {
        Sets sets = gen::key_sets(rng, gen::uniform(rng, 3, 12), 40, 60);
        auto before = graph_of(sets);
        std::size_t i = gen::uniform(rng, 0, sets.size() - 1);
        sets[i].insert(1000000 + round);
        auto after = graph_of(sets);
        ASSERT_EQ(before.edges.size(), after.edges.size());
        for (std::size_t k = 0; k < before.edges.size(); ++k) {
            const auto& a = before.edges[k];
            const auto& b = after.edges[k];
            ASSERT_EQ(a.u, b.u);
            ASSERT_EQ(a.v, b.v);
            if (a.u == i || a.v == i) continue;
            ASSERT_EQ(a.n, b.n);
            ASSERT_EQ(a.jaccard, b.jaccard);
            ASSERT_EQ(a.overlap, b.overlap);
        }
    }
}

TEST(LinkDiscoveryProperty, WorkerCountInvariant) {
    gen::Rng rng(34);
    for (int round = 0; round < 30; ++round) {
        Sets sets = gen::key_sets(rng, 20, 300, 500);
        auto one = graph_of(sets, uncapped(1));
        auto many = graph_of(sets, uncapped(5));
        ASSERT_EQ(one.edges, many.edges);
    }
}

// --- filtering and curves ---------------------------------------------------

TEST(FilterEdges, MinNDropsSingleKeyEdges) {
    auto g = graph_of({{1, 2}, {2, 3}, {1, 2, 3}});
    auto f = filter_edges(g, FilterCriterion{2, Metric::Pmi, -INFINITY});
    EXPECT_EQ(f.nodes.size(), 3u);
    for (const auto& e : f.edges) EXPECT_GE(e.n, 2u);
    EXPECT_EQ(f.edges.size(), 2u);
}

TEST(FilterEdges, NegativeInfinityOnlyAppliesMinN) {
    gen::Rng rng(35);
    Sets sets = gen::key_sets(rng, 15, 50, 100);
    auto g = graph_of(sets);
    auto f = filter_edges(g, FilterCriterion{1, Metric::Pmi, -INFINITY});
    EXPECT_EQ(f.edges, g.edges);
}

TEST(FilterEdges, MonotoneInThreshold) {
    gen::Rng rng(36);
    for (int round = 0; round < 30; ++round) {
        auto g = graph_of(gen::key_sets(rng, 15, 50, 100));
        for (Metric m : {Metric::N, Metric::Jaccard, Metric::Overlap, Metric::Pmi}) {
            std::size_t prev = SIZE_MAX;
            for (double t : {-5.0, -1.0, 0.0, 0.1, 0.3, 0.5, 1.0, 2.0, 5.0}) {
                auto f = filter_edges(g, FilterCriterion{1, m, t});
                ASSERT_EQ(f.nodes.size(), g.nodes.size());
                ASSERT_LE(f.edges.size(), prev);
                prev = f.edges.size();
            }
        }
    }
}

TEST(ParseMetric, Names) {
    EXPECT_EQ(parse_metric("pmi"), Metric::Pmi);
    EXPECT_EQ(parse_metric("j"), Metric::Jaccard);
    EXPECT_EQ(parse_metric("overlap"), Metric::Overlap);
    EXPECT_EQ(parse_metric("n"), Metric::N);
    EXPECT_THROW(parse_metric("cosine"), ValidationError);
}

TEST(CoverageCurve, Extremes) {
    auto g = graph_of({{1, 2}, {2, 3}, {1, 2, 3}, {8}});
    std::vector<double> t{100.0, -100.0};
    auto curve = coverage_curve(g, Metric::Jaccard, t);
    ASSERT_EQ(curve.size(), 2u);
    EXPECT_EQ(curve[0].num_edges, 0u);
    EXPECT_DOUBLE_EQ(curve[0].covered_fraction, 0.0);
    EXPECT_EQ(curve[1].num_edges, g.edges.size());
    EXPECT_DOUBLE_EQ(curve[1].covered_fraction, 0.75);
}

TEST(CoverageCurve, MonotoneOnRandomGraphs) {
    gen::Rng rng(37);
    for (int round = 0; round < 50; ++round) {
        auto g = graph_of(gen::key_sets(rng, gen::uniform(rng, 2, 20), 40, 120));
        for (Metric m : {Metric::N, Metric::Jaccard, Metric::Overlap, Metric::Pmi}) {
            auto t = curve_thresholds(g, m, 1);
            auto curve = coverage_curve(g, m, t, 1);
            for (std::size_t k = 1; k < curve.size(); ++k) {
                ASSERT_GE(curve[k].num_edges, curve[k - 1].num_edges);
                ASSERT_GE(curve[k].covered_fraction, curve[k - 1].covered_fraction);
            }
            if (!curve.empty()) {
                ASSERT_EQ(curve.front().num_edges, 0u);
            }
        }
    }
}

TEST(CurveAuc, Examples) {
    std::vector<CurvePoint> flat{{0.9, 0, 1.0}, {0.1, 50, 1.0}};
    EXPECT_DOUBLE_EQ(curve_auc(flat), 1.0);
    std::vector<CurvePoint> ramp{{1.0, 0, 0.0}, {0.0, 100, 1.0}};
    EXPECT_DOUBLE_EQ(curve_auc(ramp), 0.5);
    std::vector<CurvePoint> same{{1.0, 3, 0.2}, {0.0, 3, 0.4}};
    EXPECT_THROW(curve_auc(same), DegenerateRange);
    std::vector<CurvePoint> one{{1.0, 3, 0.2}};
    EXPECT_THROW(curve_auc(one), DegenerateRange);
}

// --- key index ----------------------------------------------------------------

TEST(KeyIndex, SharedValueInverted) {
    auto index = gen::index_of({{7, 1}, {7, 2}});
    auto z = index.find_key(KeyValue(std::int64_t{7}));
    ASSERT_TRUE(z);
    EXPECT_EQ(index.count(*z), 2u);
    EXPECT_EQ(std::vector<CollectionIndex>(index.holders(*z).begin(), index.holders(*z).end()),
              (std::vector<CollectionIndex>{0, 1}));
    EXPECT_TRUE(index.consistent());
}

TEST(KeyIndex, ManyKeysContributeEachElement) {
    Collection c;
    c.id = "a";
    c.documents = {parse_document(R"({"_id":1,"refs":["5f7a09de6f6f4d1c8ca390e0","5f7a09dd7b6f4d1c8ca290f2"]})")};
    KeyInferenceConfig cfg;
    auto profile = find_keys(c.documents[0], true, cfg);
    auto index = build_key_index({c}, {profile}, cfg.hashes);
    EXPECT_EQ(index.set(0).size(), 3u);
    EXPECT_TRUE(index.find_key(KeyValue(std::string("5f7a09dd7b6f4d1c8ca290f2"))));
}

TEST(KeyIndex, CompositeOnePerDocument) {
    Collection c;
    c.id = "a";
    c.documents = {parse_document(R"({"key":[1,"x"]})"), parse_document(R"({"key":[2,"y"]})"),
                   parse_document(R"({"key":[1,"x"]})")};
    KeyInferenceConfig cfg;
    auto profile = find_keys(c.documents[0], true, cfg);
    auto index = build_key_index({c}, {profile}, cfg.hashes);
    EXPECT_EQ(index.set(0).size(), 2u);
    EXPECT_TRUE(index.find_key(KeyValue(CompositeKey{2, "y"})));
}

TEST(KeyIndex, NamesAndDatesOnlyGiveEmptySet) {
    Collection c;
    c.id = "a";
    c.documents = {parse_document(R"({"info":{"name":"x","created":"2021-01-01"}})")};
    KeyInferenceConfig cfg;
    auto profile = find_keys(c.documents[0], true, cfg);
    KeyIndexReport report;
    auto index = build_key_index({c}, {profile}, cfg.hashes, &report);
    EXPECT_TRUE(index.set(0).empty());
    EXPECT_EQ(report.empty_profiles, std::vector<std::string>{"a"});
}

TEST(KeyIndex, MissingFieldsSkipped) {
    Collection c;
    c.id = "a";
    c.documents = {parse_document(R"({"id":1,"userId":5})"), parse_document(R"({"id":2})"),
                   parse_document(R"({"id":3,"userId":null})")};
    KeyInferenceConfig cfg;
    auto profile = find_keys(c.documents[0], true, cfg);
    auto index = build_key_index({c}, {profile}, cfg.hashes);
    EXPECT_EQ(index.set(0).size(), 4u);
    ASSERT_EQ(index.primary_sets(0).size(), 1u);
    EXPECT_EQ(index.primary_sets(0)[0].size(), 3u);
}
