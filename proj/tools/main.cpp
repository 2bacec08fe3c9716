#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "cppe/error.hpp"

int main(int argc, char** argv) {
    using namespace cppe::cli;
    CLI::App app{"Multiplexed quantum repeater and chirped-pulse memory simulator"};
    app.require_subcommand(1, 1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir = ".";
    unsigned threads = 1;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "Configuration file")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "Master seed for random subcommands");
    app.add_option("--out-dir", out_dir, "Directory for output files");
    app.add_option("--threads", threads, "Engine thread cap (0 = all cores)");
    app.add_option("--set", overrides, "Override a config key: section.key=value");

    std::string fit_input;
    std::string fit_model;
    app.add_subcommand("analytic", "Distance sweep of the closed-form repeater model");
    app.add_subcommand("heatmap", "Repeater/direct ratio over (T2, eta_o)");
    app.add_subcommand("mc", "Monte-Carlo estimate of the repeater success probability");
    app.add_subcommand("pulse", "Pulse-level simulation of the chirped-pulse memory");
    auto* fit = app.add_subcommand("fit", "Fit a decay model to (x, y) data");
    fit->add_option("--input", fit_input, "Two-column CSV with a header line");
    fit->add_option("--model", fit_model, "exp4, mims or exp_t1");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    RunContext ctx;
    ctx.log = &std::cerr;
    ctx.out_dir = out_dir;
    ctx.threads = threads;
    if (*seed_opt) ctx.seed = seed;
    try {
        if (!config_path.empty()) ctx.config = cppe::Config::parse_file(config_path);
        for (const auto& o : overrides) ctx.config.set_override(o);
        if (!fit_input.empty()) ctx.config.set("fit", "input", fit_input);
        if (!fit_model.empty()) ctx.config.set("fit", "model", fit_model);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return run_command(app.get_subcommands().front()->get_name(), ctx);
}
