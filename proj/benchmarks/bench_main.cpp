#include <filesystem>

#include <benchmark/benchmark.h>

#include "colink/json_io.hpp"
#include "colink/key_inference.hpp"
#include "colink/link_discovery.hpp"
#include "colink/pipeline.hpp"
#include "colink/synthetic.hpp"
#include "gen.hpp"

using namespace colink;

namespace {

const std::string kDocument =
    R"({"_id":"5f7a09de6f6f4d1c8ca390e0","customerId":"5f7a09dd7b6f4d1c8ca290f2","name":"Order 17",)"
    R"("createdAt":"2021-06-01T12:00:00Z","amount":129.5,"status":"open","tags":["a","b"],)"
    R"("address":{"city":"Kazan","zip":"420000"},"items":[{"sku":[815,"John Smith"],"qty":2},)"
    R"({"sku":[816,"Jane Roe"],"qty":1}],"refs":["5f7a05dd1b6f4d1c8ca390ec","5f7a09de6f6f4d1c8ca390e1"]})";

void BM_ParseDocument(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(parse_document(kDocument));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * kDocument.size()));
}
BENCHMARK(BM_ParseDocument);

void BM_FindKeys(benchmark::State& state) {
    const auto doc = parse_document(kDocument);
    const KeyInferenceConfig cfg;
    for (auto _ : state) benchmark::DoNotOptimize(find_keys(doc, true, cfg));
}
BENCHMARK(BM_FindKeys);

void BM_PairwiseLinks(benchmark::State& state) {
    gen::Rng rng(1);
    const auto m = static_cast<std::size_t>(state.range(0));
    const auto sets = gen::key_sets(rng, m, 2000, static_cast<std::int64_t>(m) * 400);
    const auto index = gen::index_of(sets);
    LinkOptions opts;
    opts.workers = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(pairwise_links(index, opts));
    state.counters["collections"] = static_cast<double>(m);
}
BENCHMARK(BM_PairwiseLinks)->Args({100, 1})->Args({1000, 1})->Args({1000, 4})->Unit(benchmark::kMillisecond);

void BM_Pipeline(benchmark::State& state) {
    const auto dir = std::filesystem::temp_directory_path() / "colink_bench_corpus";
    CorpusSpec spec;
    spec.seed = 1;
    generate_corpus(spec, dir);
    Config config;
    config.sources.push_back(SourceConfig{"directory", dir.string(), "", ""});
    config.ingest.workers = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(run_pipeline(config));
    std::filesystem::remove_all(dir);
}
BENCHMARK(BM_Pipeline)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
