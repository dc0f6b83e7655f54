#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rydgate/commands.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> frame;
    std::optional<std::string> integrator;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path,
                    "Scenario config file (key = value lines)");
    cmd->add_option("--out", args.out_dir, "Output directory");
    cmd->add_option("--seed", args.seed, "Override the base random seed");
    cmd->add_option("--jobs", args.jobs,
                    "Worker threads (0 = hardware concurrency)");
    cmd->add_option("--frame", args.frame, "full | effective")
        ->check(CLI::IsMember({"full", "effective", "rotating"}));
    cmd->add_option("--integrator", args.integrator, "rk | expm")
        ->check(CLI::IsMember({"rk", "expm"}));
}

rydgate::ScenarioConfig load(const CommonArgs& args) {
    if (args.config_path.empty()) {
        return rydgate::ScenarioConfig{};
    }
    return rydgate::load_config(args.config_path);
}

rydgate::CommandOptions options(const CommonArgs& args, bool certify) {
    rydgate::CommandOptions opts;
    opts.out_dir = args.out_dir;
    opts.seed = args.seed;
    opts.jobs = args.jobs;
    opts.frame = args.frame;
    opts.integrator = args.integrator;
    opts.certify = certify;
    return opts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Holonomic two-qubit gate designer and Rydberg pair simulator"};
    app.require_subcommand(1);

    CommonArgs design_args, sim_args, sweep_args, mc_args, tt_args, ph_args;
    bool certify = false;

    CLI::App* design = app.add_subcommand(
        "design", "Design control fields and export the pulse CSV");
    add_common(design, design_args);

    CLI::App* simulate = app.add_subcommand(
        "simulate", "Propagate the configured scenario and report fidelity");
    add_common(simulate, sim_args);
    simulate->add_flag("--certify", certify,
                       "Re-run at tightened tolerance and compare");

    std::string channel;
    rydgate::SweepRange range;
    CLI::App* sweep = app.add_subcommand(
        "sweep", "Sweep one error channel and tabulate final fidelities");
    add_common(sweep, sweep_args);
    sweep->add_option("--channel", channel,
                      "epsilon | delta_prime | defect | gamma")
        ->required();
    sweep->add_option("--from", range.from, "Sweep start")->required();
    sweep->add_option("--to", range.to, "Sweep end")->required();
    sweep->add_option("--points", range.points, "Number of grid points")
        ->required();

    std::optional<double> mc_snr;
    int mc_runs = 50;
    CLI::App* montecarlo = app.add_subcommand(
        "montecarlo", "Seeded AWGN noise study over repeated runs");
    add_common(montecarlo, mc_args);
    montecarlo->add_option("--snr", mc_snr, "Signal-to-noise ratio");
    montecarlo->add_option("--runs", mc_runs, "Number of runs");

    CLI::App* truthtable = app.add_subcommand(
        "truthtable", "Output-state populations per computational input");
    add_common(truthtable, tt_args);

    CLI::App* phases = app.add_subcommand(
        "phases", "Accumulated dynamic and geometric phase traces");
    add_common(phases, ph_args);

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) {
            return rydgate::cmd_design(load(design_args),
                                       options(design_args, false));
        }
        if (simulate->parsed()) {
            return rydgate::cmd_simulate(load(sim_args),
                                         options(sim_args, certify));
        }
        if (sweep->parsed()) {
            return rydgate::cmd_sweep(load(sweep_args),
                                      options(sweep_args, false), channel,
                                      range);
        }
        if (montecarlo->parsed()) {
            return rydgate::cmd_montecarlo(load(mc_args),
                                           options(mc_args, false), mc_snr,
                                           mc_runs);
        }
        if (truthtable->parsed()) {
            return rydgate::cmd_truthtable(load(tt_args),
                                           options(tt_args, false));
        }
        if (phases->parsed()) {
            return rydgate::cmd_phases(load(ph_args), options(ph_args, false));
        }
    } catch (const rydgate::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const rydgate::IntegrationError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
