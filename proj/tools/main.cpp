#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "colink/config.hpp"
#include "colink/error.hpp"
#include "colink/graph_io.hpp"
#include "colink/pipeline.hpp"
#include "colink/synthetic.hpp"

namespace fs = std::filesystem;
using namespace colink;

namespace {

struct Globals {
    std::string config_path;
    std::string corpus;
    std::string out = "";
    std::optional<std::uint64_t> seed;
    std::string log_level = "info";
    std::optional<std::size_t> workers;
};

Config resolve_config(const Globals& g) {
    Config config = g.config_path.empty() ? default_config() : load_config(g.config_path, false);
    if (!g.corpus.empty()) {
        if (config.sources.size() != 1)
            throw ValidationError("sources", "--corpus needs exactly one configured source to override");
        config.sources.front().kind = "directory";
        config.sources.front().location = g.corpus;
    }
    if (!g.out.empty()) config.output.directory = g.out;
    if (g.workers) config.ingest.workers = *g.workers;
    validate_config(config);
    return config;
}

int run_stages(const Globals& g, Stage until) {
    const Config config = resolve_config(g);
    const auto result = run_pipeline(config, until);
    write_outputs(result, config, config.output.directory);
    spdlog::info("outputs written to {}", config.output.directory);
    return 0;
}

int profile(const Globals& g, const std::string& stats_out) {
    const Config config = resolve_config(g);
    auto result = run_pipeline(config, Stage::Index);
    result.stats = compute_stats(result);
    const fs::path path = stats_out.empty() ? fs::path(config.output.directory) / "stats.json" : fs::path(stats_out);
    write_text_file(path, result.stats.to_json().dump(2) + "\n");
    spdlog::info("statistics written to {}", path.string());
    return 0;
}

// 1 for bad input, 2 for unreachable sources or files, 3 for bugs.
int exit_code_for(const std::exception& e) {
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        return exit_code_for(inner);
    }
    if (dynamic_cast<const ValidationError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
        dynamic_cast<const UnknownFormat*>(&e) || dynamic_cast<const CorpusMismatch*>(&e) ||
        dynamic_cast<const DuplicateCollection*>(&e))
        return 1;
    if (dynamic_cast<const SourceUnavailable*>(&e) || dynamic_cast<const IoError*>(&e)) return 2;
    return 3;
}

void report(const std::exception& e, int depth = 0) {
    std::cerr << std::string(2 * depth, ' ') << "error: " << e.what() << "\n";
    try {
        std::rethrow_if_nested(e);
    } catch (const std::exception& inner) {
        report(inner, depth + 1);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Build a knowledge graph of linked collections from document corpora"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "YAML configuration file");
    app.add_option("--corpus", g.corpus, "Corpus directory (overrides the single configured source)");
    app.add_option("--out", g.out, "Output directory");
    app.add_option("--seed", g.seed, "Seed for the corpus generator");
    app.add_option("--log-level", g.log_level, "trace, debug, info, warn, error, off")
        ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));
    app.add_option("--workers", g.workers, "Worker threads for ingest and linking")->check(CLI::PositiveNumber);

    auto* run = app.add_subcommand("run", "Full pipeline");
    auto* prof = app.add_subcommand("profile", "Ingest and corpus statistics only");
    std::string stats_out;
    prof->add_option("--stats-out", stats_out, "Statistics JSON path (default <out>/stats.json)");
    auto* link = app.add_subcommand("link", "Pipeline through link filtering");
    auto* merge = app.add_subcommand("merge", "Pipeline through the entity graph");

    auto* exp = app.add_subcommand("export", "Convert a graph JSON file to another format");
    std::string exp_input, exp_format, exp_output;
    exp->add_option("--input", exp_input, "Graph JSON file")->required();
    exp->add_option("--format", exp_format, "json, graphml, dot or csv")->required();
    exp->add_option("--output", exp_output, "Destination file")->required();

    auto* gen = app.add_subcommand("generate", "Write a synthetic corpus with ground truth");
    std::string spec_path;
    gen->add_option("--spec", spec_path, "Corpus spec YAML (defaults when omitted)");
    std::string preset = "default";
    gen->add_option("--preset", preset, "Base spec when --spec is absent")
        ->check(CLI::IsMember({"default", "frequent-key-noise"}));
    bool print_spec = false;
    gen->add_flag("--print-defaults", print_spec, "Print the default corpus spec and exit");

    auto* eval = app.add_subcommand("evaluate", "Score a result graph against ground truth");
    std::string truth_path, result_path;
    eval->add_option("--truth", truth_path, "ground_truth.json")->required();
    eval->add_option("--result", result_path, "Result graph JSON")->required();

    auto* cfg = app.add_subcommand("config", "Configuration helpers");
    bool print_defaults = false;
    cfg->add_flag("--print-defaults", print_defaults, "Print the default configuration");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    auto logger = spdlog::stderr_color_mt("colink");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::from_str(g.log_level));

    try {
        if (run->parsed()) return run_stages(g, Stage::Stats);
        if (prof->parsed()) return profile(g, stats_out);
        if (link->parsed()) return run_stages(g, Stage::Filter);
        if (merge->parsed()) return run_stages(g, Stage::EntityGraph);
        if (exp->parsed()) {
            export_graph(read_graph_document(exp_input), exp_format, exp_output);
            return 0;
        }
        if (gen->parsed()) {
            CorpusSpec spec = !spec_path.empty()              ? load_spec(spec_path)
                              : preset == "frequent-key-noise" ? CorpusSpec::frequent_key_noise(1)
                                                               : CorpusSpec{};
            if (g.seed) spec.seed = *g.seed;
            if (print_spec) {
                std::cout << spec_to_yaml(spec);
                return 0;
            }
            const fs::path out = g.out.empty() ? fs::path("corpus") : fs::path(g.out);
            const auto truth = generate_corpus(spec, out);
            spdlog::info("wrote {} collection(s) and {} planted link(s) to {}", truth.subsystem_of.size(),
                         truth.true_links.size(), out.string());
            return 0;
        }
        if (eval->parsed()) {
            const auto ev = evaluate_against_truth(read_graph_document(result_path), read_ground_truth(truth_path));
            const fs::path out = g.out.empty() ? fs::path(result_path).parent_path() : fs::path(g.out);
            write_text_file(out / "evaluation.json", ev.to_json().dump(2) + "\n");
            std::cout << ev.to_json().dump(2) << "\n";
            return 0;
        }
        if (cfg->parsed()) {
            if (!print_defaults) {
                std::cerr << cfg->help();
                return 1;
            }
            std::cout << config_to_yaml(default_config());
            return 0;
        }
    } catch (const std::exception& e) {
        report(e);
        return exit_code_for(e);
    }
    return 0;
}
