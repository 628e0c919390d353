#include "cbpf/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "cbpf/config.hpp"
#include "cbpf/error.hpp"
#include "cbpf/eval.hpp"

namespace cbpf {

namespace {

namespace fs = std::filesystem;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path.string());
    out << content;
}

int cmd_stats(const std::string& config_path, const std::optional<std::string>& output) {
    auto ref = load_dataset_ref(config_path);
    auto schema_cfg = load_schema_config(ref.schema_path);
    auto d = load_dataset(ref.dataset_path, schema_cfg.schema);
    auto stats = dataset_stats(d);
    std::cout << stats.to_text();
    if (output) {
        bool csv = output->size() >= 4 && output->substr(output->size() - 4) == ".csv";
        write_file(*output, csv ? stats.to_csv() : stats.to_text());
    }
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::optional<std::string>& output,
                 const std::optional<uint64_t>& seed) {
    auto cfg = load_experiment_config(config_path);
    if (output) cfg.output_dir = *output;
    if (seed) cfg.seed = *seed;

    auto schema_cfg = load_schema_config(cfg.schema_path);
    auto d = load_dataset(cfg.dataset_path, schema_cfg.schema);

    auto item_clusters = build_clusters(d, EntityKind::item, schema_cfg, cfg.workers);
    auto user_clusters = build_clusters(d, EntityKind::user, schema_cfg, cfg.workers);
    for (const auto& spec : cfg.systems) {
        if (spec.basis == InfluenceBasis::item_cluster && spec.kind == SystemKind::filter_pcc &&
            !item_clusters)
            throw ValidationError("system " + spec.name +
                                  " needs item clustering in the schema config");
        if (spec.basis == InfluenceBasis::user_cluster && spec.kind == SystemKind::filter_pcc &&
            !user_clusters)
            throw ValidationError("system " + spec.name +
                                  " needs user clustering in the schema config");
    }

    ExperimentOptions opts;
    opts.item_clusters = item_clusters ? &*item_clusters : nullptr;
    opts.user_clusters = user_clusters ? &*user_clusters : nullptr;
    opts.workers = cfg.workers;

    fs::create_directories(cfg.output_dir);

    // Systems run one at a time so one failure still leaves the others'
    // results on disk. Fold plans depend only on seed and shape, so the
    // split stays shared.
    std::vector<SystemResult> results;
    std::vector<std::string> failures;
    for (const auto& spec : cfg.systems) {
        try {
            auto r = run_repeated(d, {spec}, cfg.folds, cfg.repetitions, cfg.seed, opts);
            results.push_back(std::move(r.front()));
        } catch (const std::exception& e) {
            failures.push_back(e.what());
            std::cerr << "failed: " << e.what() << "\n";
        }
    }

    std::string table = report_table(results, cfg.alpha);
    for (const auto& f : failures) table += "FAILED " + f + "\n";
    std::cout << table;
    write_file(fs::path(cfg.output_dir) / "report.txt", table);
    write_file(fs::path(cfg.output_dir) / "report.csv", report_csv(results, cfg.alpha));
    if (cfg.dump_errors)
        for (const auto& r : results)
            write_file(fs::path(cfg.output_dir) / ("errors_" + r.system + ".csv"),
                       error_dump_csv(d, r));

    return failures.empty() ? 0 : 2;
}

int cmd_synth(const std::string& config_path, const std::optional<std::string>& output,
              const std::optional<uint64_t>& seed) {
    auto job = load_synth_config(config_path);
    if (output) job.output_dir = *output;
    if (seed) job.params.seed = *seed;

    auto out = generate_synthetic(job.params);
    write_synthetic(out, job.params, job.output_dir);
    std::cout << "wrote " << job.output_dir << "/{ratings.csv, schema.json, truth.csv}\n"
              << dataset_stats(out.dataset).to_text();
    return 0;
}

} // namespace

int run_cli(int argc, char** argv) {
    CLI::App app{"context-aware pre-filtering recommender toolkit"};
    app.require_subcommand(1);

    std::string config;
    std::optional<std::string> output;
    std::optional<uint64_t> seed;

    auto* stats = app.add_subcommand("stats", "dataset descriptive statistics");
    auto* evaluate = app.add_subcommand("evaluate", "cross-validated system comparison");
    auto* synth = app.add_subcommand("synth", "generate a synthetic contextual dataset");
    for (auto* sub : {stats, evaluate, synth}) {
        sub->add_option("--config", config, "configuration file")->required();
        sub->add_option("--output", output,
                        "output file (stats) or output directory (evaluate, synth)");
        sub->add_option("--seed", seed, "override the configured seed");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (stats->parsed()) return cmd_stats(config, output);
        if (evaluate->parsed()) return cmd_evaluate(config, output, seed);
        return cmd_synth(config, output, seed);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "runtime error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace cbpf
