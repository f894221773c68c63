#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ldplab/config.hpp"
#include "ldplab/run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"ldplab: skeleton solver, SPDE simulator and large-deviation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::size_t threads = 1;

    const std::vector<std::pair<std::string, std::string>> commands{
        {"skeleton", "solve the controlled skeleton equation"},
        {"simulate", "simulate an ensemble of (controlled) paths"},
        {"rate", "minimise the rate function for a terminal target"},
        {"validate-ldp", "estimate eps log P over an eps list and compare with the rate"},
        {"converge", "skeleton continuity and small-noise convergence tables"},
        {"tightness", "tail-energy envelope diagnostics"},
        {"check-conditions", "growth, Lipschitz and integrability checks"},
    };
    std::vector<CLI::Option*> seed_opts;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", config_path, "TOML experiment config")->required()->check(CLI::ExistingFile);
        seed_opts.push_back(sub->add_option("--seed", seed, "master seed (overrides experiment.seed)"));
        sub->add_option("--out", out_dir, "output root (overrides output.dir)");
        sub->add_option("--threads", threads, "worker threads for ensembles (0 = all cores)")->default_val(1);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const CLI::App* sub = app.get_subcommands().front();
        ldplab::ExperimentConfig cfg = ldplab::parse_config(config_path);
        for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
        ldplab::RunOptions opts;
        opts.kind = sub->get_name();
        for (auto* o : seed_opts)
            if (o->count() > 0) opts.seed = seed;
        if (!out_dir.empty()) opts.out_dir = out_dir;
        opts.threads = threads;
        const ldplab::RunResult r = ldplab::run(std::move(cfg), opts);
        std::cout << r.run_dir << "\n";
        if (r.exit_code == ldplab::kExitInconclusive) std::cerr << "INCONCLUSIVE: see summary.json\n";
        return r.exit_code;
    } catch (const ldplab::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return ldplab::kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return ldplab::kExitError;
    }
}
