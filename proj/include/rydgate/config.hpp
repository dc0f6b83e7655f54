#ifndef RYDGATE_CONFIG_HPP
#define RYDGATE_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <string_view>

#include "rydgate/atom_model.hpp"
#include "rydgate/dynamics.hpp"

namespace rydgate {

/// Configuration error: exit code 2 at the CLI. `field` names the offending
/// key when known.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message
                                           : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const { return field_; }

  private:
    std::string field_;
};

/// Parses "2pi*133.04 MHz", "21.5 us", "1 kHz", "0.5 rad", "90 deg", "pi/4",
/// "inf" or a bare number. Frequency units convert to 1/s (the 2pi* prefix
/// supplies the angular factor), time units to seconds, deg to rad.
double parse_value(std::string_view text, const std::string& key = "");

/// Scenario description for the command-line front end. Dimensional inputs
/// are reduced to the dimensionless products the engine integrates with
/// (rate * T); T_SI only scales exported traces back to seconds.
struct ScenarioConfig {
    std::string gate = "cnot";  // cnot | cz | custom
    double v_a = kPi / 2.0;
    double v_b = kPi / 4.0;
    double eta = 1.0;
    double theta_g = kPi;
    double u = 1.0;

    double T_SI = 21.5e-6;      // seconds
    double VT = 18000.0;        // V * T
    double omega_bT = 600.0;    // omega_b * T

    double epsilon = 0.0;
    double deltaT = 0.0;        // Forster defect * T
    double delta_primeT = 0.0;  // interaction deviation * T
    double gammaT = 0.0;        // per-channel decay * T
    double snr = std::numeric_limits<double>::infinity();
    bool snr_is_db = true;

    std::string initial_state = "00+10";  // decay-run input state

    Frame frame = Frame::lab;
    IntegratorKind integrator = IntegratorKind::adaptive_rk;
    double rtol = 1e-9;
    double atol = 1e-12;
    int expm_points_per_period = 64;  // expm step = 2pi/(points * Delta)
    std::size_t grid_points = 8193;
    std::size_t trace_points = 513;
    std::uint64_t seed = 1;
    int jobs = 0;  // 0 = hardware concurrency

    ModelParams model_params() const;          // dimensionless, T = 1
    InvariantTrajectory trajectory() const;    // on [0, 1]
    Eigen::Matrix4cd target() const;
    PropagationConfig propagation() const;
    Vector initial_ket() const;                // 25-dim, from initial_state

    /// Canonical "key = value" serialization (sorted keys, full precision);
    /// the config hash is FNV-1a over this text.
    std::string canonical() const;
    std::uint64_t hash() const;
};

/// Line-oriented "key = value" text with '#' comments and unit suffixes.
ScenarioConfig parse_config(std::string_view text);
ScenarioConfig load_config(const std::filesystem::path& path);

std::uint64_t fnv1a(std::string_view text);

}  // namespace rydgate

#endif
