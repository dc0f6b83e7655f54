#ifndef RYDGATE_COMMANDS_HPP
#define RYDGATE_COMMANDS_HPP

#include <filesystem>
#include <optional>
#include <string>

#include "rydgate/config.hpp"

namespace rydgate {

struct CommandOptions {
    std::filesystem::path out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> frame;
    std::optional<std::string> integrator;
    bool certify = false;   // rerun at tightened tolerance, compare
    bool quiet = false;
};

struct SweepRange {
    double from = 0.0;
    double to = 0.0;
    int points = 0;
};

/// Exit codes: 0 success, 2 config error, 3 numerical failure. The cmd_*
/// functions throw (ConfigError / IntegrationError); the CLI maps those.
int cmd_design(ScenarioConfig cfg, const CommandOptions& opts);
int cmd_simulate(ScenarioConfig cfg, const CommandOptions& opts);
int cmd_sweep(ScenarioConfig cfg, const CommandOptions& opts,
              const std::string& channel, const SweepRange& range);
int cmd_montecarlo(ScenarioConfig cfg, const CommandOptions& opts,
                   std::optional<double> snr, int n_runs);
int cmd_truthtable(ScenarioConfig cfg, const CommandOptions& opts);
int cmd_phases(ScenarioConfig cfg, const CommandOptions& opts);

/// Shared by commands and the acceptance suite: closed-system average gate
/// fidelity of the configured scenario (full Hamiltonian unless the config
/// selects another frame).
double closed_system_gate_fidelity(const ScenarioConfig& cfg);

}  // namespace rydgate

#endif
