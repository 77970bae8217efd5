// Command line front end: one subcommand per scenario kind.
//
//   sma_cli point-test --scenario s.json [--out dir] [--seed k] [--threads n] [--dry-run]

#include "sma/scenario.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv)
{
    CLI::App app{"shape memory alloy model: constitutive and boundary value studies"};
    app.require_subcommand(1);

    std::string scenario_file, out;
    std::uint64_t seed = 0;
    int threads = 0;
    bool dry_run = false;

    const char* kinds[] = {"point-test", "conv-tau", "conv-rho", "bvp-run", "bvp-conv", "gamma-table"};
    for (const char* k : kinds) {
        CLI::App* sub = app.add_subcommand(k, std::string("run a ") + k + " scenario");
        sub->add_option("--scenario", scenario_file, "scenario file (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory (overrides the scenario)");
        sub->add_option("--seed", seed, "RNG seed (overrides the scenario)");
        sub->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_flag("--dry-run", dry_run, "validate only");
    }
    CLI11_PARSE(app, argc, argv);

    const std::string kind = app.get_subcommands().front()->get_name();
    const CLI::App* sub = app.get_subcommands().front();
    try {
        sma::Scenario s = sma::load_scenario(scenario_file);
        if (kind != sma::kind_name(s.kind)) {
            std::cerr << scenario_file << ": scenario kind is '" << sma::kind_name(s.kind) << "', not '" << kind
                      << "'\n";
            return 2;
        }
        if (!out.empty()) s.output = out;
        if (sub->count("--seed")) s.seed = seed;
        if (threads > 0) s.threads = threads;
        if (dry_run) {
            std::cout << scenario_file << ": valid " << kind << " scenario\n";
            return 0;
        }
        const sma::RunResult r = sma::run_scenario(s);
        for (const auto& f : r.files) std::cout << (s.output / f).string() << '\n';
        return r.status;
    } catch (const std::exception& e) {
        std::cerr << scenario_file << ": " << e.what() << '\n';
        return 1;
    }
}
