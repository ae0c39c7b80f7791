// CLI entry point: bil <command> --config <path.json> [--out <dir>] [--threads <n>]
// Exit codes: 0 = all assertions pass, 1 = assertion failure,
// 2 = configuration or feasibility error.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "bil/experiments.hpp"

int main(int argc, char** argv) {
    CLI::App app{"spectral toolkit for stationary Navier-Stokes norm-inflation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int threads_override = 0;

    const char* names[] = {"certify", "decay", "inflation", "solve", "endtoend"};
    const char* blurbs[] = {
        "run the partition/projector/operator invariant suite",
        "force-norm decay sweep and slope fit",
        "inflation lower bound and J-term breakdown",
        "run the Picard solver on a force",
        "end-to-end norm-inflation trend experiment",
    };
    for (int i = 0; i < 5; ++i) {
        auto* sub = app.add_subcommand(names[i], blurbs[i]);
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--threads", threads_override, "worker threads for sweep instances");
    }

    CLI11_PARSE(app, argc, argv);

    bil::RunConfig cfg;
    try {
        cfg = bil::load_run_config(config_path);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads_override > 0) cfg.threads = threads_override;

    return bil::run_command(cfg, std::cout);
}
