#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "annsim/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    std::size_t jobs = 0;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* jobs_opt = nullptr;
};

void add_common(CLI::App& cmd, CommonArgs& args, bool with_jobs) {
    cmd.add_option("--config", args.config_path, "experiment config file (key = value)")
        ->check(CLI::ExistingFile);
    cmd.add_option("--out", args.out_dir, "output directory (overrides config)");
    args.seed_opt = cmd.add_option("--seed", args.seed, "base seed (overrides config)");
    if (with_jobs)
        args.jobs_opt = cmd.add_option("--jobs", args.jobs, "worker threads (overrides config)");
}

annsim::ExperimentConfig load_config(const CommonArgs& args) {
    annsim::ExperimentConfig cfg;
    if (!args.config_path.empty()) cfg = annsim::experiment_from_file(args.config_path);
    if (!args.out_dir.empty()) cfg.out = args.out_dir;
    if (args.seed_opt && args.seed_opt->count()) cfg.base_seed = args.seed;
    if (args.jobs_opt && args.jobs_opt->count()) cfg.jobs = args.jobs;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deterministic annotation-strategy simulation toolkit"};
    app.require_subcommand(1);

    CommonArgs gen_args, run_args, plot_args, report_args;
    bool force = false;

    auto* gen = app.add_subcommand("generate", "materialize train and test datasets");
    add_common(*gen, gen_args, /*with_jobs=*/false);
    gen->add_flag("--force", force, "overwrite existing datasets");

    auto* run = app.add_subcommand("run", "run the annotation sweep and append results.csv");
    add_common(*run, run_args, /*with_jobs=*/true);

    auto* plot = app.add_subcommand("plot", "emit SVG charts from results.csv");
    add_common(*plot, plot_args, /*with_jobs=*/false);

    auto* report = app.add_subcommand("report", "print mean scores per strategy");
    add_common(*report, report_args, /*with_jobs=*/false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed())
            return annsim::cmd_generate(load_config(gen_args), force, std::cout, std::cerr);
        if (run->parsed()) return annsim::cmd_run(load_config(run_args), std::cout, std::cerr);
        if (plot->parsed()) return annsim::cmd_plot(load_config(plot_args), std::cout, std::cerr);
        if (report->parsed())
            return annsim::cmd_report(load_config(report_args), std::cout, std::cerr);
    } catch (const annsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 2;
}
