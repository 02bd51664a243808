// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>

#include "CLI11.hpp"
#include "colink/entity.hpp"
#include "colink/key_inference.hpp"
#include "colink/link_discovery.hpp"
#include "colink/pipeline.hpp"
#include "colink/statistics.hpp"
#include "colink/synthetic.hpp"
#include "gen.hpp"
#include "oracle.hpp"

using namespace colink;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

extern char** environ;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

// Collects failure reasons; the first few are kept for the report.
struct Check {
    bool ok = true;
    std::vector<std::string> notes;
    void expect(bool cond, const std::string& what) {
        if (cond) return;
        ok = false;
        if (notes.size() < 3) notes.push_back(what);
    }
    std::string failures() const {
        std::string s;
        for (const auto& n : notes) s += (s.empty() ? "" : "; ") + n;
        return s;
    }
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(digits);
    os << v;
    return os.str();
}

Config config_for(const fs::path& corpus) {
    Config c;
    c.sources.push_back(SourceConfig{"directory", corpus.string(), "", ""});
    return c;
}

const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};

// One default-spec, default-config run per seed, shared by criteria 4, 6, 7, 9.
struct SeedRun {
    std::uint64_t seed;
    GroundTruth truth;
    RunResult result;
    Evaluation eval;
};

std::vector<SeedRun> default_runs(const fs::path& work) {
    std::vector<SeedRun> runs;
    for (auto seed : kSeeds) {
        CorpusSpec spec;
        spec.seed = seed;
        const auto dir = work / ("default_" + std::to_string(seed));
        SeedRun r{seed, generate_corpus(spec, dir), {}, {}};
        const auto config = config_for(dir);
        r.result = run_pipeline(config);
        r.eval = evaluate_against_truth(entity_graph_document(r.result, config), r.truth);
        runs.push_back(std::move(r));
    }
    return runs;
}

// --- criteria ---------------------------------------------------------------------

Outcome literal_examples() {
    const auto t0 = Clock::now();
    Check c;
    c.expect(key_is_composite(Array{815, "John Smith"}), "composite [815, \"John Smith\"]");
    c.expect(key_is_multi_ref(Array{"5f7a09de6f6f4d1c8ca390e0", "5f7a09dd7b6f4d1c8ca290f2", "5f7a05dd1b6f4d1c8ca390ec"}),
             "multi-ref of three 24-hex strings");
    c.expect(!key_is_multi_ref(Array{}), "empty array is not multi-ref");
    c.expect(!key_is_composite(Array{}), "empty array is not composite");
    c.expect(is_hash(Value("5f7a09de6f6f4d1c8ca390e0")), "24-hex string is a hash");
    const double secs = seconds_since(t0);
    c.expect(secs < 1.0, "took " + fmt(secs) + " s");
    return {c.ok, c.ok ? "literal examples hold (" + fmt(secs * 1000, 2) + " ms)" : c.failures()};
}

Outcome metric_oracle() {
    const auto t0 = Clock::now();
    Check c;
    gen::Rng rng(2024);
    std::size_t corpora = 250, edges = 0;
    for (std::size_t round = 0; round < corpora; ++round) {
        const std::size_t m = gen::uniform(rng, 2, 20);
        const auto universe = static_cast<std::int64_t>(gen::uniform(rng, 10, 4000));
        const auto sets = gen::key_sets(rng, m, 1000, universe);
        const auto expected = oracle::links(sets);
        const auto index = gen::index_of(sets);
        LinkOptions opts;
        opts.frequent_key_cap = 1.0;
        const auto graph = pairwise_links(index, opts);
        c.expect(graph.edges.size() == expected.size(), "edge count differs in corpus " + std::to_string(round));
        for (const auto& e : graph.edges) {
            auto it = expected.find({e.u, e.v});
            if (it == expected.end()) {
                c.expect(false, "unexpected edge in corpus " + std::to_string(round));
                continue;
            }
            const auto& o = it->second;
            auto u = index.set(e.u), v = index.set(e.v);
            const std::string where = "corpus " + std::to_string(round) + " edge " + std::to_string(e.u) + "-" +
                                      std::to_string(e.v);
            c.expect(e.n == o.n && metric_n(u, v) == o.n, where + ": N");
            c.expect(std::abs(e.jaccard - o.jaccard) <= 1e-12 && std::abs(*metric_jaccard(u, v) - o.jaccard) <= 1e-12,
                     where + ": J");
            c.expect(std::abs(e.overlap - o.overlap) <= 1e-12 && std::abs(*metric_overlap(u, v) - o.overlap) <= 1e-12,
                     where + ": I");
            c.expect(std::abs(e.pmi - o.pmi) <= 1e-12 && std::abs(*metric_pmi(u, v, index) - o.pmi) <= 1e-12,
                     where + ": PMI");
            ++edges;
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 30.0, "took " + fmt(secs) + " s");
    return {c.ok, c.ok ? std::to_string(corpora) + " corpora, " + std::to_string(edges) +
                             " edges match brute force (" + fmt(secs, 1) + " s)"
                       : c.failures()};
}

Outcome metric_identities() {
    const auto t0 = Clock::now();
    Check c;
    gen::Rng rng(77);
    std::size_t pairs = 0;
    for (int round = 0; round < 300; ++round) {
        auto sets = gen::key_sets(rng, gen::uniform(rng, 2, 12), 50, 80);
        // plant a subset and a copy so the anchor cases always occur
        if (!sets[0].empty()) {
            std::set<std::int64_t> sub;
            for (auto v : sets[0])
                if (gen::uniform(rng, 0, 1)) sub.insert(v);
            if (sub.empty()) sub.insert(*sets[0].begin());
            sets.push_back(sub);
            sets.push_back(sets[0]);
        }
        const auto index = gen::index_of(sets);
        for (std::size_t i = 0; i < sets.size(); ++i) {
            auto u = index.set(i);
            if (!u.empty()) {
                c.expect(*metric_jaccard(u, u) == 1.0, "J(U,U) != 1");
                c.expect(*metric_overlap(u, u) == 1.0, "I(U,U) != 1");
            }
            for (std::size_t j = 0; j < sets.size(); ++j) {
                if (i == j) continue;
                auto v = index.set(j);
                ++pairs;
                c.expect(metric_n(u, v) == metric_n(v, u), "N asymmetric");
                c.expect(metric_jaccard(u, v) == metric_jaccard(v, u), "J asymmetric");
                c.expect(metric_overlap(u, v) == metric_overlap(v, u), "I asymmetric");
                c.expect(metric_pmi(u, v, index) == metric_pmi(v, u, index), "PMI asymmetric");
                const bool subset = std::includes(sets[j].begin(), sets[j].end(), sets[i].begin(), sets[i].end());
                if (subset && !u.empty()) c.expect(*metric_overlap(u, v) == 1.0, "I(U,V) != 1 for U in V");
            }
        }
        LinkOptions opts;
        opts.frequent_key_cap = 1.0;
        for (const auto& e : pairwise_links(index, opts).edges) {
            c.expect(e.jaccard <= e.overlap, "J > I on an edge");
            c.expect((e.jaccard == e.overlap) == (sets[e.u] == sets[e.v]), "J == I without U == V");
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 5.0, "took " + fmt(secs) + " s");
    return {c.ok, c.ok ? std::to_string(pairs) + " ordered pairs checked (" + fmt(secs, 2) + " s)" : c.failures()};
}

Outcome filtering(const std::vector<SeedRun>& runs) {
    Check c;
    double worst_edge_drop = 1.0, worst_cov_drop = 0.0;
    for (const auto& r : runs) {
        const auto& raw = r.result.raw_graph;
        const auto kept = filter_edges(raw, FilterCriterion{2, Metric::Pmi, -INFINITY});
        for (const auto& e : kept.edges) c.expect(e.n >= 2, "n=1 edge survived");
        auto covered = [](const CollectionGraph& g) {
            const auto d = g.degrees();
            const auto linked = std::count_if(d.begin(), d.end(), [](std::size_t x) { return x > 0; });
            return g.nodes.empty() ? 0.0 : static_cast<double>(linked) / static_cast<double>(g.nodes.size());
        };
        const double edge_drop = 1.0 - static_cast<double>(kept.edges.size()) / static_cast<double>(raw.edges.size());
        const double cov_raw = covered(raw), cov_kept = covered(kept);
        const double cov_drop = cov_raw > 0 ? (cov_raw - cov_kept) / cov_raw : 0.0;
        worst_edge_drop = std::min(worst_edge_drop, edge_drop);
        worst_cov_drop = std::max(worst_cov_drop, cov_drop);
        c.expect(edge_drop >= 0.5, "seed " + std::to_string(r.seed) + " edge drop " + fmt(edge_drop));
        c.expect(cov_drop < 0.05, "seed " + std::to_string(r.seed) + " coverage drop " + fmt(cov_drop));
    }
    return {c.ok, "min edge drop " + fmt(worst_edge_drop) + " (>= 0.5), max coverage drop " + fmt(worst_cov_drop) +
                      " (< 0.05) over 10 seeds" + (c.ok ? "" : ": " + c.failures())};
}

Outcome auc_comparison(const fs::path& work) {
    const auto t0 = Clock::now();
    std::size_t wins = 0;
    std::string per_seed;
    for (auto seed : kSeeds) {
        const auto dir = work / ("freq_" + std::to_string(seed));
        generate_corpus(CorpusSpec::frequent_key_noise(seed), dir);
        auto config = config_for(dir);
        config.linking.frequent_key_cap = 1.0;
        const auto r = run_pipeline(config, Stage::Filter);
        const auto auc = run_report(r, config)["coverage_auc"];
        auto value = [&](const char* m) { return auc[m].is_null() ? 0.0 : auc[m].get<double>(); };
        const double pmi = value("pmi"), j = value("jaccard"), n = value("n");
        const bool win = pmi >= j && pmi >= n;
        wins += win;
        per_seed += (per_seed.empty() ? "" : " ") + std::string(win ? "+" : "-");
    }
    const bool ok = wins >= 8;
    return {ok, std::to_string(wins) + "/10 seeds with AUC(PMI) >= AUC(J) and >= AUC(N) [" + per_seed + "], " +
                    fmt(seconds_since(t0), 1) + " s"};
}

Outcome coverage(const std::vector<SeedRun>& runs) {
    Check c;
    std::size_t full = 0;
    for (const auto& r : runs) {
        const auto cov = subsystem_coverage(r.result.entity_graph, r.result.subsystem_map());
        const bool ok = cov.covered == 11 && cov.total == 11;
        full += ok;
        c.expect(ok, "seed " + std::to_string(r.seed) + " covers " + std::to_string(cov.covered) + "/" +
                         std::to_string(cov.total));
    }
    return {c.ok, std::to_string(full) + "/10 seeds at (11, 11)" + (c.ok ? "" : ": " + c.failures())};
}

Outcome sparsity(const std::vector<SeedRun>& runs) {
    Check c;
    double lo = INFINITY, hi = -INFINITY;
    for (const auto& r : runs) {
        const double d = average_degree(GraphView::of(r.result.entity_graph));
        lo = std::min(lo, d);
        hi = std::max(hi, d);
        c.expect(d >= 1.5 && d <= 3.5, "seed " + std::to_string(r.seed) + " degree " + fmt(d));
    }
    return {c.ok, "entity graph average degree in [" + fmt(lo, 2) + ", " + fmt(hi, 2) + "] over 10 seeds" +
                      (c.ok ? "" : ": " + c.failures())};
}

Outcome entity_merging(const std::vector<SeedRun>& runs) {
    const auto t0 = Clock::now();
    Check c;
    gen::Rng rng(808);
    std::vector<AdjacencyMatrix> matrices;
    for (const auto& r : runs) matrices.push_back(r.result.adjacency);
    for (int k = 0; k < 40; ++k) {
        const std::size_t n = gen::uniform(rng, 2, 40);
        AdjacencyMatrix a(gen::ids(n));
        const double density = gen::unit(rng) * 0.3;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                if (gen::unit(rng) < density) a.set(i, j, std::round(gen::unit(rng) * 20) / 20);
        matrices.push_back(std::move(a));
    }
    const auto taus = default_tau_grid();
    std::size_t orders = 0;
    for (std::size_t mi = 0; mi < matrices.size(); ++mi) {
        const auto& a = matrices[mi];
        const auto sweep = threshold_sweep(a, taus);
        for (std::size_t k = 1; k < sweep.size(); ++k) {
            c.expect(sweep[k].num_components >= sweep[k - 1].num_components, "components decrease in matrix " + std::to_string(mi));
            c.expect(sweep[k].avg_component_size <= sweep[k - 1].avg_component_size, "avg size grows in matrix " + std::to_string(mi));
        }
        for (double tau : {0.5, 0.85, 1.0}) {
            const auto batch = threshold_components(a, tau);
            std::vector<std::size_t> perm(a.size());
            std::iota(perm.begin(), perm.end(), 0);
            for (int order = 0; order < 50; ++order) {
                std::shuffle(perm.begin(), perm.end(), rng);
                EntityPartition p;
                std::vector<bool> present(a.size(), false);
                for (std::size_t i : perm) {
                    std::vector<std::pair<std::string, double>> row;
                    for (const auto& [j, v] : a.row(i))
                        if (present[j]) row.emplace_back(a.id(j), v);
                    p = incremental_add(p, a.id(i), row, tau);
                    present[i] = true;
                }
                ++orders;
                c.expect(p == batch, "incremental != batch in matrix " + std::to_string(mi));
            }
        }
    }
    const double secs = seconds_since(t0);
    c.expect(secs < 30.0, "took " + fmt(secs) + " s");
    return {c.ok, c.ok ? std::to_string(matrices.size()) + " matrices monotone, " + std::to_string(orders) +
                             " insertion orders equal batch (" + fmt(secs, 1) + " s)"
                       : c.failures()};
}

Outcome recovery(const std::vector<SeedRun>& runs) {
    Check c;
    double p = 1, rc = 1, f1 = 1;
    for (const auto& r : runs) {
        p = std::min(p, r.eval.link_precision);
        rc = std::min(rc, r.eval.link_recall);
        f1 = std::min(f1, r.eval.pairwise_f1);
        const auto s = std::to_string(r.seed);
        c.expect(r.eval.link_precision >= 0.9, "seed " + s + " precision " + fmt(r.eval.link_precision));
        c.expect(r.eval.link_recall >= 0.9, "seed " + s + " recall " + fmt(r.eval.link_recall));
        c.expect(r.eval.pairwise_f1 >= 0.9, "seed " + s + " pairwise F1 " + fmt(r.eval.pairwise_f1));
    }
    return {c.ok, "min precision " + fmt(p) + ", min recall " + fmt(rc) + ", min pairwise F1 " + fmt(f1) +
                      " over 10 seeds" + (c.ok ? "" : ": " + c.failures())};
}

Outcome determinism(const fs::path& work) {
    Check c;
    CorpusSpec spec;
    spec.seed = 42;
    generate_corpus(spec, work / "det_a");
    generate_corpus(spec, work / "det_b");
    std::vector<std::string> graphs;
    for (auto [dir, workers] : {std::pair{"det_a", 1}, {"det_a", 1}, {"det_b", 1}, {"det_a", 4}, {"det_b", 8}}) {
        auto config = config_for(work / dir);
        config.ingest.workers = static_cast<std::size_t>(workers);
        const auto r = run_pipeline(config);
        graphs.push_back(to_json_text(entity_graph_document(r, config)) +
                         to_json_text(collection_graph_document(r, config)));
    }
    for (std::size_t i = 1; i < graphs.size(); ++i) c.expect(graphs[i] == graphs[0], "run " + std::to_string(i) + " differs");
    return {c.ok, c.ok ? "5 runs (2 corpora, 1/4/8 workers) give byte-identical graph JSON (" +
                             std::to_string(graphs[0].size()) + " bytes)"
                       : c.failures()};
}

Outcome scale(const fs::path& work, const std::string& cli) {
    CorpusSpec spec;
    spec.seed = 11;
    spec.num_subsystems = 9;
    spec.collections_per_subsystem = {100, 100};
    spec.total_documents = 100000;
    const auto corpus = work / "scale_corpus";
    const auto truth = generate_corpus(spec, corpus);
    std::size_t docs = 0;
    for (const auto& [id, n] : truth.documents) docs += n;

    if (cli.empty() || !fs::exists(cli)) return {false, "CLI binary not found: '" + cli + "'"};
    const std::string corpus_s = corpus.string(), out_s = (work / "scale_out").string();
    std::vector<std::string> args = {cli, "--corpus", corpus_s, "--out", out_s, "--workers", "4",
                                     "--log-level", "warn", "run"};
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    const auto t0 = Clock::now();
    pid_t pid;
    if (posix_spawn(&pid, cli.c_str(), nullptr, nullptr, argv.data(), environ) != 0)
        return {false, "could not start " + cli};
    int status = 0;
    rusage usage{};
    wait4(pid, &status, 0, &usage);
    const double secs = seconds_since(t0);
    const double peak_mb = static_cast<double>(usage.ru_maxrss) / 1024.0;

    Check c;
    c.expect(WIFEXITED(status) && WEXITSTATUS(status) == 0, "CLI exit status " + std::to_string(status));
    c.expect(secs < 120.0, "took " + fmt(secs, 1) + " s");
    c.expect(peak_mb < 2048.0, "peak " + fmt(peak_mb, 0) + " MB");
    c.expect(fs::exists(work / "scale_out" / "graph.json"), "no graph.json");
    return {c.ok, std::to_string(truth.subsystem_of.size()) + " collections / " + std::to_string(docs) +
                      " documents: " + fmt(secs, 1) + " s, peak RSS " + fmt(peak_mb, 0) + " MB (4 workers)" +
                      (c.ok ? "" : ": " + c.failures())};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string work_dir = (fs::temp_directory_path() / "colink_acceptance").string();
    std::string cli;
    app.add_option("--work-dir", work_dir, "scratch directory for generated corpora");
    app.add_option("--cli", cli, "path to the colink binary (scale criterion)");
    CLI11_PARSE(app, argc, argv);

    const fs::path work(work_dir);
    fs::remove_all(work);
    fs::create_directories(work);

    int failures = 0;
    auto report = [&](int id, const char* title, const std::function<Outcome()>& fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << "criterion " << id << " [" << title << "]: " << (o.pass ? "PASS" : "FAIL") << " - " << o.detail
                  << std::endl;
    };

    report(1, "algorithm fidelity", literal_examples);
    report(2, "metric oracle", metric_oracle);
    report(3, "metric identities", metric_identities);

    std::vector<SeedRun> runs;
    std::string run_error;
    try {
        runs = default_runs(work);
    } catch (const std::exception& e) {
        run_error = e.what();
    }
    auto with_runs = [&](const std::function<Outcome(const std::vector<SeedRun>&)>& fn) {
        return [&, fn]() -> Outcome {
            if (!run_error.empty()) return {false, "default corpus runs failed: " + run_error};
            return fn(runs);
        };
    };

    report(4, "filtering", with_runs(filtering));
    report(5, "metric comparison", [&] { return auc_comparison(work); });
    report(6, "subsystem coverage", with_runs(coverage));
    report(7, "sparsity", with_runs(sparsity));
    report(8, "entity merging", with_runs(entity_merging));
    report(9, "ground-truth recovery", with_runs(recovery));
    report(10, "determinism", [&] { return determinism(work); });
    report(11, "scale", [&] { return scale(work, cli); });

    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
