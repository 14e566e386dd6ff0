#include <CLI11.hpp>

#include <iostream>

#include "dgf/cli.hpp"

int main(int argc, char** argv) {
    using namespace dgf;
    CLI::App app{"Diagram feedback pipeline: benchmark generation, runs and evaluation"};
    app.require_subcommand(1);

    std::string benchmark;
    std::string out_dir;
    std::uint64_t gen_seed = 42;
    int gen_jobs = 1;
    auto* gen = app.add_subcommand("generate", "Render a synthetic benchmark");
    gen->add_option("--benchmark", benchmark, "fbd or circuit")->required();
    gen->add_option("--out", out_dir, "Output directory")->required();
    gen->add_option("--seed", gen_seed, "Master seed");
    gen->add_option("--jobs", gen_jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string config_path, mode, dataset, split, preds_out, endpoint, debug_dir;
    int run_jobs = 0;
    bool oracle = false;
    auto* run = app.add_subcommand("run", "Run the pipeline over a dataset split");
    run->add_option("--config", config_path, "JSON run config; flags override it")->check(CLI::ExistingFile);
    run->add_option("--dataset", dataset, "Dataset directory");
    run->add_option("--mode", mode, "grammar, vision-only or external");
    run->add_option("--split", split, "test, train or all");
    run->add_option("--out", preds_out, "Predictions file (JSON lines)");
    run->add_option("--endpoint", endpoint, std::string("External generator URL (default: $") + cli::kEndpointEnv + ")");
    run->add_option("--debug-dir", debug_dir, "Write intermediate perception maps per sample");
    run->add_option("--jobs", run_jobs, "Worker threads")->check(CLI::PositiveNumber);
    run->add_flag("--oracle-perception", oracle, "Use ground-truth primitives in place of Stage 1");

    std::string eval_preds, eval_dataset, eval_out, eval_md, eval_split = "test";
    int n_bootstrap = 10000;
    std::uint64_t boot_seed = 0;
    auto* ev = app.add_subcommand("eval", "Score predictions against a dataset");
    ev->add_option("--predictions", eval_preds, "Predictions file")->required()->check(CLI::ExistingFile);
    ev->add_option("--dataset", eval_dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    ev->add_option("--out", eval_out, "Report JSON path")->required();
    ev->add_option("--markdown", eval_md, "Also write the tables here");
    ev->add_option("--n-bootstrap", n_bootstrap, "Bootstrap resamples");
    ev->add_option("--seed", boot_seed, "Bootstrap seed");
    ev->add_option("--split", eval_split, "test or train");

    std::vector<std::string> report_paths;
    std::string report_md;
    auto* rep = app.add_subcommand("report", "Merge metric reports into one table");
    rep->add_option("reports", report_paths, "Report JSON files")->required()->check(CLI::ExistingFile);
    rep->add_option("--out", report_md, "Markdown output path");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) return cli::cmd_generate(benchmark, out_dir, gen_seed, gen_jobs, std::cout, std::cerr);

    if (run->parsed()) {
        cli::RunConfig cfg;
        try {
            if (!config_path.empty()) cfg = cli::load_config(config_path);
            if (!dataset.empty()) cfg.dataset = dataset;
            if (!mode.empty()) cfg.mode = parse_pipeline_mode(mode);
            if (!split.empty()) cfg.split = split;
            if (!preds_out.empty()) cfg.predictions_out = preds_out;
            if (!endpoint.empty()) cfg.pipeline.external.endpoint = endpoint;
            if (!debug_dir.empty()) cfg.pipeline.perception.debug_dir = debug_dir;
            if (run_jobs > 0) cfg.jobs = run_jobs;
            if (oracle) cfg.oracle_perception = true;
            cfg = cli::config_from_json(cli::config_to_json(cfg));
        } catch (const std::exception& e) {
            std::cerr << "usage error: " << e.what() << "\n";
            return 2;
        }
        if (cfg.dataset.empty()) {
            std::cerr << "usage error: --dataset is required\n";
            return 2;
        }
        return cli::cmd_run(cfg, std::cout, std::cerr);
    }

    if (ev->parsed()) {
        std::optional<std::filesystem::path> md;
        if (!eval_md.empty()) md = eval_md;
        return cli::cmd_eval(eval_preds, eval_dataset, eval_out, md, n_bootstrap, boot_seed, eval_split, std::cout,
                             std::cerr);
    }

    std::vector<std::filesystem::path> paths(report_paths.begin(), report_paths.end());
    std::optional<std::filesystem::path> md;
    if (!report_md.empty()) md = report_md;
    return cli::cmd_report(paths, md, std::cout, std::cerr);
}
