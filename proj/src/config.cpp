#include "rydgate/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace rydgate {

namespace {

std::string trim(std::string_view s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string_view::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(begin, end - begin + 1));
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

double unit_factor(const std::string& unit, const std::string& key) {
    if (unit.empty()) return 1.0;
    const std::string u = lower(unit);
    if (u == "hz") return 1.0;
    if (u == "khz") return 1e3;
    if (u == "mhz") return 1e6;
    if (u == "ghz") return 1e9;
    if (u == "s") return 1.0;
    if (u == "ms") return 1e-3;
    if (u == "us") return 1e-6;
    if (u == "ns") return 1e-9;
    if (u == "rad") return 1.0;
    if (u == "deg") return kPi / 180.0;
    throw ConfigError(key, "unknown unit '" + unit + "'");
}

}  // namespace

double parse_value(std::string_view text, const std::string& key) {
    std::string s = trim(text);
    if (s.empty()) throw ConfigError(key, "empty value");
    const std::string sl = lower(s);
    if (sl == "inf" || sl == "infinity") {
        return std::numeric_limits<double>::infinity();
    }
    double factor = 1.0;
    if (sl.rfind("2pi*", 0) == 0) {
        factor = 2.0 * kPi;
        s = trim(s.substr(4));
    } else if (sl.rfind("pi", 0) == 0) {
        // "pi", "pi/2", "pi/4", "pi*0.3"
        double v = kPi;
        std::string rest = trim(s.substr(2));
        if (!rest.empty()) {
            const char op = rest[0];
            const double num = parse_value(rest.substr(1), key);
            if (op == '/') {
                v /= num;
            } else if (op == '*') {
                v *= num;
            } else {
                throw ConfigError(key, "cannot parse '" + std::string(text) +
                                           "'");
            }
        }
        return v;
    }
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(s, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key, "cannot parse number in '" +
                                   std::string(text) + "'");
    }
    const std::string unit = trim(s.substr(pos));
    return factor * value * unit_factor(unit, key);
}

ModelParams ScenarioConfig::model_params() const {
    ModelParams p;
    p.T = 1.0;
    p.V = VT;
    p.Delta = VT;
    p.omega_b = omega_bT;
    p.v_a = v_a;
    p.v_b = v_b;
    p.gamma = gammaT;
    p.forster_defect = deltaT;
    p.dipole_deviation = delta_primeT;
    p.epsilon = epsilon;
    return p;
}

InvariantTrajectory ScenarioConfig::trajectory() const {
    return design_trajectory(1.0, eta, theta_g, u, grid_points);
}

Eigen::Matrix4cd ScenarioConfig::target() const {
    return target_gate_matrix(v_a, v_b);
}

PropagationConfig ScenarioConfig::propagation() const {
    PropagationConfig cfg;
    cfg.method = integrator;
    cfg.rtol = rtol;
    cfg.atol = atol;
    cfg.frame = frame;
    cfg.seed = seed;
    if (integrator == IntegratorKind::piecewise_expm) {
        cfg.expm_step =
            2.0 * kPi / (static_cast<double>(expm_points_per_period) * VT);
    }
    return cfg;
}

Vector ScenarioConfig::initial_ket() const {
    auto basis_index = [](const std::string& label) {
        if (label == "00") return 0;
        if (label == "01") return 1;
        if (label == "10") return 2;
        if (label == "11") return 3;
        throw ConfigError("initial_state",
                          "expected computational labels like 00 or 00+10");
    };
    const auto plus = initial_state.find('+');
    if (plus == std::string::npos) {
        return computational_ket(basis_index(trim(initial_state)));
    }
    const Vector a =
        computational_ket(basis_index(trim(initial_state.substr(0, plus))));
    const Vector b =
        computational_ket(basis_index(trim(initial_state.substr(plus + 1))));
    return (a + b) / std::sqrt(2.0);
}

std::string ScenarioConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    os << "delta_primeT = " << delta_primeT << '\n'
       << "deltaT = " << deltaT << '\n'
       << "epsilon = " << epsilon << '\n'
       << "eta = " << eta << '\n'
       << "expm_points_per_period = " << expm_points_per_period << '\n'
       << "frame = " << (frame == Frame::lab ? "full"
                         : frame == Frame::rotating ? "rotating"
                                                    : "effective")
       << '\n'
       << "gammaT = " << gammaT << '\n'
       << "gate = " << gate << '\n'
       << "grid_points = " << grid_points << '\n'
       << "initial_state = " << initial_state << '\n'
       << "integrator = "
       << (integrator == IntegratorKind::adaptive_rk ? "rk" : "expm") << '\n'
       << "jobs = " << jobs << '\n'
       << "omega_bT = " << omega_bT << '\n'
       << "rtol = " << rtol << '\n'
       << "atol = " << atol << '\n'
       << "seed = " << seed << '\n'
       << "snr = " << snr << '\n'
       << "snr_scale = " << (snr_is_db ? "db" : "linear") << '\n'
       << "T = " << T_SI << '\n'
       << "theta_g = " << theta_g << '\n'
       << "trace_points = " << trace_points << '\n'
       << "u = " << u << '\n'
       << "v_a = " << v_a << '\n'
       << "v_b = " << v_b << '\n'
       << "VT = " << VT << '\n';
    return os.str();
}

std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t ScenarioConfig::hash() const { return fnv1a(canonical()); }

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig cfg;
    bool have_T = false, have_V = false, have_VT = false;
    bool have_omega_b = false, have_omega_bT = false;
    bool have_va = false, have_vb = false;
    double V_SI = 0.0, omega_b_SI = 0.0;

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash_pos = line.find('#');
        if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("", "line " + std::to_string(line_no) +
                                      ": expected 'key = value'");
        }
        const std::string key = lower(trim(stripped.substr(0, eq)));
        const std::string value = trim(stripped.substr(eq + 1));
        if (value.empty()) throw ConfigError(key, "empty value");

        if (key == "gate") {
            cfg.gate = lower(value);
        } else if (key == "v_a") {
            cfg.v_a = parse_value(value, key);
            have_va = true;
        } else if (key == "v_b") {
            cfg.v_b = parse_value(value, key);
            have_vb = true;
        } else if (key == "eta") {
            cfg.eta = parse_value(value, key);
        } else if (key == "theta_g") {
            cfg.theta_g = parse_value(value, key);
        } else if (key == "u") {
            cfg.u = parse_value(value, key);
        } else if (key == "t") {
            cfg.T_SI = parse_value(value, key);
            have_T = true;
        } else if (key == "v") {
            V_SI = parse_value(value, key);
            have_V = true;
        } else if (key == "vt") {
            cfg.VT = parse_value(value, key);
            have_VT = true;
        } else if (key == "omega_b") {
            omega_b_SI = parse_value(value, key);
            have_omega_b = true;
        } else if (key == "omega_b_t" || key == "omega_bt") {
            cfg.omega_bT = parse_value(value, key);
            have_omega_bT = true;
        } else if (key == "epsilon") {
            cfg.epsilon = parse_value(value, key);
        } else if (key == "delta") {
            cfg.deltaT = parse_value(value, key);  // scaled by T below
        } else if (key == "delta_prime") {
            cfg.delta_primeT = parse_value(value, key);
        } else if (key == "gamma") {
            cfg.gammaT = parse_value(value, key);
        } else if (key == "snr") {
            cfg.snr = parse_value(value, key);
        } else if (key == "snr_scale") {
            const std::string v = lower(value);
            if (v == "db") {
                cfg.snr_is_db = true;
            } else if (v == "linear") {
                cfg.snr_is_db = false;
            } else {
                throw ConfigError(key, "expected db or linear");
            }
        } else if (key == "initial_state") {
            cfg.initial_state = value;
        } else if (key == "frame") {
            cfg.frame = parse_frame(lower(value));
        } else if (key == "integrator") {
            cfg.integrator = parse_integrator(lower(value));
        } else if (key == "rtol") {
            cfg.rtol = parse_value(value, key);
        } else if (key == "atol") {
            cfg.atol = parse_value(value, key);
        } else if (key == "expm_points_per_period") {
            cfg.expm_points_per_period =
                static_cast<int>(parse_value(value, key));
        } else if (key == "grid_points") {
            cfg.grid_points = static_cast<std::size_t>(parse_value(value, key));
        } else if (key == "trace_points") {
            cfg.trace_points =
                static_cast<std::size_t>(parse_value(value, key));
        } else if (key == "seed") {
            cfg.seed = static_cast<std::uint64_t>(parse_value(value, key));
        } else if (key == "jobs") {
            cfg.jobs = static_cast<int>(parse_value(value, key));
        } else {
            throw ConfigError(key, "unknown key");
        }
    }

    // Gate selection fixes the mixing angles unless custom.
    if (cfg.gate == "cnot") {
        cfg.v_a = kPi / 2.0;
        cfg.v_b = kPi / 4.0;
    } else if (cfg.gate == "cz") {
        cfg.v_a = kPi / 2.0;
        cfg.v_b = kPi;
    } else if (cfg.gate == "custom") {
        if (!have_va || !have_vb) {
            throw ConfigError("gate", "custom gate requires v_a and v_b");
        }
    } else {
        throw ConfigError("gate", "expected cnot, cz or custom");
    }

    // T and V: exactly one given unless both are (then no derivation).
    if (have_T && have_V) {
        cfg.VT = V_SI * cfg.T_SI;
        if (have_VT) {
            throw ConfigError("vt", "VT cannot be combined with explicit T and V");
        }
    } else if (have_V) {
        cfg.T_SI = cfg.VT / V_SI;
    }
    // else: T (given or default) with the design product VT.

    if (have_omega_b && have_omega_bT) {
        throw ConfigError("omega_b", "give omega_b or omega_b_T, not both");
    }
    if (have_omega_b) {
        cfg.omega_bT = omega_b_SI * cfg.T_SI;
    }

    // Error channels were parsed as SI rates; reduce to rate * T.
    cfg.deltaT *= cfg.T_SI;
    cfg.delta_primeT *= cfg.T_SI;
    cfg.gammaT *= cfg.T_SI;

    if (cfg.T_SI <= 0.0) throw ConfigError("t", "T must be positive");
    if (cfg.VT <= 0.0) throw ConfigError("v", "V must be positive");
    if (cfg.omega_bT <= 0.0) {
        throw ConfigError("omega_b", "omega_b must be positive");
    }
    if (cfg.eta < 0.0) throw ConfigError("eta", "eta must be >= 0");
    if (cfg.gammaT < 0.0) throw ConfigError("gamma", "gamma must be >= 0");
    if (!(cfg.snr > 0.0)) throw ConfigError("snr", "snr must be positive");
    if (cfg.grid_points < 2 || cfg.trace_points < 2) {
        throw ConfigError("grid_points", "need at least 2 grid points");
    }
    if (cfg.rtol <= 0.0 || cfg.atol <= 0.0) {
        throw ConfigError("rtol", "tolerances must be positive");
    }
    if (cfg.expm_points_per_period < 4) {
        throw ConfigError("expm_points_per_period", "need >= 4");
    }
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", "cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace rydgate
