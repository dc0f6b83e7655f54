#include "rydgate/commands.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <thread>

#include <json.hpp>

#include "rydgate/metrics.hpp"

namespace rydgate {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr const char* kVersion = "0.1.0";

void apply_overrides(ScenarioConfig& cfg, const CommandOptions& opts) {
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.jobs) cfg.jobs = *opts.jobs;
    if (opts.frame) cfg.frame = parse_frame(*opts.frame);
    if (opts.integrator) cfg.integrator = parse_integrator(*opts.integrator);
}

std::ofstream open_out(const std::filesystem::path& dir,
                       const std::string& name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + (dir / name).string());
    }
    return out;
}

std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(h));
    return buf;
}

void write_manifest(const std::filesystem::path& dir,
                    const ScenarioConfig& cfg, double wall_time,
                    std::size_t rows, json extra = {}) {
    json manifest;
    manifest["config_hash"] = hash_hex(cfg.hash());
    manifest["versions"] = {{"rydgate", kVersion}};
    manifest["wall_time"] = wall_time;
    manifest["rows"] = rows;
    if (!extra.is_null()) manifest["summary"] = std::move(extra);
    auto out = open_out(dir, "manifest.json");
    out << manifest.dump(2) << '\n';
}

struct PointResult {
    double value = 0.0;
    double fidelity = std::numeric_limits<double>::quiet_NaN();
    double runtime = 0.0;
    std::string status = "ok";
};

/// Full-model average gate fidelity for the given parameter set, optionally
/// with sampled trace output.
double gate_fidelity_for(const ModelParams& params,
                         const InvariantTrajectory& traj,
                         const Eigen::Matrix4cd& target,
                         const PropagationConfig& prop,
                         std::span<const double> sample_times = {},
                         std::vector<double>* trace_times = nullptr,
                         std::vector<double>* trace_values = nullptr,
                         StateTrace* raw = nullptr) {
    const auto comp = propagate_computational_basis(
        params, make_field(traj), prop, sample_times);
    if (trace_times && trace_values) {
        trace_times->clear();
        trace_values->clear();
        for (std::size_t i = 0; i < comp.trace.times.size(); ++i) {
            Eigen::Matrix4cd projected;
            for (int r = 0; r < 4; ++r) {
                const Vector bra = computational_ket(r);
                for (int c = 0; c < 4; ++c) {
                    projected(r, c) = bra.dot(comp.trace.columns[i].col(c));
                }
            }
            trace_times->push_back(comp.trace.times[i]);
            trace_values->push_back(average_gate_fidelity(
                Eigen::Matrix4cd(target.adjoint() * projected)));
        }
    }
    if (raw) *raw = comp.trace;
    return average_gate_fidelity(
        Eigen::Matrix4cd(target.adjoint() * comp.projected));
}

/// Tightens the adaptive tolerance 10x (or halves the expm step) and checks
/// the reported fidelity moves by less than 1e-5.
void run_certificate(const ModelParams& params, const InvariantTrajectory& traj,
                     const Eigen::Matrix4cd& target, PropagationConfig prop,
                     double fidelity, json* report) {
    if (prop.method == IntegratorKind::adaptive_rk) {
        prop.rtol /= 10.0;
    } else {
        prop.expm_step /= 2.0;
    }
    const double refined = gate_fidelity_for(params, traj, target, prop);
    const double delta = std::abs(refined - fidelity);
    if (report) {
        (*report)["certificate"] = {{"refined_fidelity", refined},
                                    {"delta", delta},
                                    {"pass", delta < 1e-5}};
    }
    if (delta >= 1e-5) {
        throw IntegrationError(
            "convergence certificate failed: fidelity moved by " +
            std::to_string(delta));
    }
}

int run_parallel(int jobs, int n_tasks, const std::function<void(int)>& task) {
    int n_workers = jobs > 0
                        ? jobs
                        : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    n_workers = std::min(n_workers, n_tasks);
    if (n_workers <= 1) {
        for (int i = 0; i < n_tasks; ++i) task(i);
        return 1;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n_tasks;
                 i = next.fetch_add(1)) {
                task(i);
            }
        });
    }
    for (auto& th : pool) th.join();
    return n_workers;
}

void write_sweep_csv(std::ostream& os, const std::string& value_name,
                     const std::vector<PointResult>& rows,
                     std::uint64_t seed) {
    os << value_name << ",fidelity,seed,runtime_s,status\n";
    os.precision(12);
    for (const PointResult& r : rows) {
        os << r.value << ',' << r.fidelity << ',' << seed << ',' << r.runtime
           << ',' << r.status << '\n';
    }
}

}  // namespace

double closed_system_gate_fidelity(const ScenarioConfig& cfg) {
    return gate_fidelity_for(cfg.model_params(), cfg.trajectory(),
                             cfg.target(), cfg.propagation());
}

int cmd_design(ScenarioConfig cfg, const CommandOptions& opts) {
    apply_overrides(cfg, opts);
    const auto t0 = Clock::now();
    const InvariantTrajectory traj = cfg.trajectory();
    const PulseSchedule pulse = control_fields(traj);
    const SensitivityResult qs = sensitivity_qs(cfg.eta);

    auto csv = open_out(opts.out_dir, "pulse.csv");
    pulse.write_csv(csv, cfg.T_SI, 1.0 / cfg.T_SI);

    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    json summary = {
        {"omega_max_T", pulse.omega_max},
        {"omega_max_rad_per_s", pulse.omega_max / cfg.T_SI},
        {"T_s", cfg.T_SI},
        {"eta", cfg.eta},
        {"q_s_closed_form", qs.closed_form},
        {"q_s_quadrature", qs.quadrature},
    };
    write_manifest(opts.out_dir, cfg, wall, pulse.size(), summary);
    if (!opts.quiet) {
        std::cout << "pulse: omega_max*T = " << pulse.omega_max
                  << ", omega_max = " << pulse.omega_max / cfg.T_SI
                  << " rad/s, eta = " << cfg.eta
                  << ", q_s = " << qs.closed_form << '\n';
    }
    return 0;
}

int cmd_simulate(ScenarioConfig cfg, const CommandOptions& opts) {
    apply_overrides(cfg, opts);
    const auto t0 = Clock::now();
    const InvariantTrajectory traj = cfg.trajectory();
    const ModelParams params = cfg.model_params();
    const PropagationConfig prop = cfg.propagation();
    const Eigen::Matrix4cd target = cfg.target();
    const std::vector<double> samples = uniform_times(1.0, cfg.trace_points);

    json report;
    report["seed"] = cfg.seed;
    report["integrator"] = cfg.integrator == IntegratorKind::adaptive_rk
                               ? "rk"
                               : "expm";
    report["rtol"] = cfg.rtol;
    report["frame"] = cfg.frame == Frame::lab ? "full" : "effective";
    {
        const PulseSchedule pulse = control_fields(traj);
        for (const std::string& w :
             params.validate(pulse.omega_max)) {
            report["warnings"].push_back(w);
        }
    }

    double fidelity = 0.0;
    FidelityTrace ftrace;
    if (cfg.gammaT > 0.0) {
        // Open system: state-fidelity trace of the configured initial state.
        const Vector psi0 = cfg.initial_ket();
        const Matrix rho0 = psi0 * psi0.adjoint();
        const auto h = make_hamiltonian_source(params, make_field(traj),
                                               cfg.frame);
        const auto trace = propagate_lindblad(
            h, lindblad_operators(params.gamma), rho0, 0.0, 1.0, samples, prop);
        Vector target_state = Vector::Zero(kPairDim);
        {
            // Ideal image of psi0 under the target gate.
            Eigen::Vector4cd amp = Eigen::Vector4cd::Zero();
            for (int i = 0; i < 4; ++i) {
                amp(i) = computational_ket(i).dot(psi0);
            }
            const Eigen::Vector4cd image = target * amp;
            for (int i = 0; i < 4; ++i) {
                target_state += image(i) * computational_ket(i);
            }
        }
        ftrace.metric = "density-state";
        for (std::size_t i = 0; i < trace.times.size(); ++i) {
            ftrace.times.push_back(trace.times[i]);
            ftrace.values.push_back(
                state_fidelity(trace.rho[i], target_state));
        }
        fidelity = ftrace.values.back();
        report["metric"] = "state fidelity (master equation)";
        report["initial_state"] = cfg.initial_state;
        json pops;
        for (int i = 0; i < 4; ++i) {
            pops.push_back(
                state_fidelity(trace.final(), computational_ket(i)));
        }
        report["final_populations"] = pops;
        report["steps"] = trace.stats.steps;
    } else {
        std::vector<double> times, values;
        StateTrace raw;
        fidelity = gate_fidelity_for(params, traj, target, prop, samples,
                                     &times, &values, &raw);
        ftrace.metric = "average-gate";
        ftrace.times = std::move(times);
        ftrace.values = std::move(values);
        report["metric"] = "average gate fidelity";
        report["steps"] = raw.stats.steps;
        json pops;
        for (int j = 0; j < 4; ++j) {
            json row;
            for (int i = 0; i < 4; ++i) {
                row.push_back(std::norm(
                    computational_ket(i).dot(raw.final().col(j))));
            }
            pops.push_back(row);
        }
        report["final_populations"] = pops;
        if (opts.certify) {
            run_certificate(params, traj, target, prop, fidelity, &report);
        }
        // Population traces Q_j(t) = |<target_j | psi_j(t)>|^2.
        auto pops_csv = open_out(opts.out_dir, "populations.csv");
        pops_csv << "t,q00,q01,q10,q11\n";
        pops_csv.precision(12);
        std::vector<Vector> images;
        for (int j = 0; j < 4; ++j) {
            Vector img = Vector::Zero(kPairDim);
            for (int i = 0; i < 4; ++i) {
                img += target(i, j) * computational_ket(i);
            }
            images.push_back(img);
        }
        for (std::size_t i = 0; i < raw.times.size(); ++i) {
            pops_csv << raw.times[i] * cfg.T_SI;
            for (int j = 0; j < 4; ++j) {
                pops_csv << ','
                         << std::norm(images[j].dot(raw.columns[i].col(j)));
            }
            pops_csv << '\n';
        }
    }

    {
        auto fcsv = open_out(opts.out_dir, "fidelity.csv");
        ftrace.write_csv(fcsv, cfg.T_SI);
    }
    {
        const PhaseTrace phases = accumulated_phases(traj);
        auto pcsv = open_out(opts.out_dir, "phases.csv");
        phases.write_csv(pcsv, cfg.T_SI);
        report["theta2_final"] = phases.theta2.back();
        report["Theta2_final"] = phases.Theta2.back();
    }

    report["fidelity"] = fidelity;
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    {
        auto rep = open_out(opts.out_dir, "report.json");
        rep << report.dump(2) << '\n';
    }
    write_manifest(opts.out_dir, cfg, wall, ftrace.times.size(),
                   json{{"fidelity", fidelity}});
    if (!opts.quiet) {
        std::cout << "fidelity(T) = " << fidelity << '\n';
    }
    return 0;
}

int cmd_sweep(ScenarioConfig cfg, const CommandOptions& opts,
              const std::string& channel, const SweepRange& range) {
    apply_overrides(cfg, opts);
    if (range.points < 1) {
        throw ConfigError("points", "sweep needs a positive point count");
    }
    if (range.from > range.to) {
        throw ConfigError("range", "sweep range must have from <= to");
    }
    const auto t0 = Clock::now();
    const InvariantTrajectory traj = cfg.trajectory();
    const Eigen::Matrix4cd target = cfg.target();

    std::vector<PointResult> rows(range.points);
    auto value_at = [&](int i) {
        if (range.points == 1) return range.from;
        return range.from + (range.to - range.from) * i / (range.points - 1.0);
    };

    auto task = [&](int i) {
        const auto p0 = Clock::now();
        PointResult& row = rows[i];
        row.value = value_at(i);
        try {
            ScenarioConfig point_cfg = cfg;
            if (channel == "epsilon") {
                point_cfg.epsilon = row.value;
            } else if (channel == "delta_prime") {
                point_cfg.delta_primeT = row.value * cfg.T_SI;
            } else if (channel == "defect") {
                point_cfg.deltaT = row.value * cfg.T_SI;
            } else if (channel == "gamma") {
                point_cfg.gammaT = row.value * cfg.T_SI;
            } else {
                throw ConfigError("channel",
                                  "expected epsilon, delta_prime, defect or "
                                  "gamma");
            }
            const ModelParams params = point_cfg.model_params();
            if (point_cfg.gammaT > 0.0) {
                const Vector psi0 = point_cfg.initial_ket();
                const auto h = make_hamiltonian_source(params,
                                                       make_field(traj),
                                                       point_cfg.frame);
                const auto trace = propagate_lindblad(
                    h, lindblad_operators(params.gamma),
                    Matrix(psi0 * psi0.adjoint()), 0.0, 1.0,
                    std::vector<double>{1.0}, point_cfg.propagation());
                Eigen::Vector4cd amp = Eigen::Vector4cd::Zero();
                for (int k = 0; k < 4; ++k) {
                    amp(k) = computational_ket(k).dot(psi0);
                }
                const Eigen::Vector4cd image = target * amp;
                Vector target_state = Vector::Zero(kPairDim);
                for (int k = 0; k < 4; ++k) {
                    target_state += image(k) * computational_ket(k);
                }
                row.fidelity = state_fidelity(trace.final(), target_state);
            } else {
                row.fidelity = gate_fidelity_for(
                    params, traj, target, point_cfg.propagation());
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            row.status = std::string("failed: ") + e.what();
        }
        row.runtime = std::chrono::duration<double>(Clock::now() - p0).count();
    };
    // Channel validation up front so bad channel names exit with code 2.
    if (channel != "epsilon" && channel != "delta_prime" &&
        channel != "defect" && channel != "gamma") {
        throw ConfigError("channel",
                          "expected epsilon, delta_prime, defect or gamma");
    }
    run_parallel(cfg.jobs, range.points, task);

    {
        auto csv = open_out(opts.out_dir, "sweep.csv");
        write_sweep_csv(csv, channel, rows, cfg.seed);
    }
    double min_f = std::numeric_limits<double>::infinity();
    std::size_t failures = 0;
    for (const PointResult& r : rows) {
        if (r.status == "ok") {
            min_f = std::min(min_f, r.fidelity);
        } else {
            ++failures;
        }
    }
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    write_manifest(opts.out_dir, cfg, wall, rows.size(),
                   json{{"channel", channel},
                        {"min_fidelity", min_f},
                        {"failures", failures}});
    if (!opts.quiet) {
        std::cout << "sweep " << channel << ": " << rows.size()
                  << " points, min fidelity = " << min_f << '\n';
    }
    return 0;
}

int cmd_montecarlo(ScenarioConfig cfg, const CommandOptions& opts,
                   std::optional<double> snr, int n_runs) {
    apply_overrides(cfg, opts);
    if (snr) cfg.snr = *snr;
    if (n_runs < 1) throw ConfigError("runs", "need n_runs >= 1");
    if (!(cfg.snr > 0.0)) throw ConfigError("snr", "snr must be positive");
    const auto t0 = Clock::now();
    const InvariantTrajectory traj = cfg.trajectory();
    const ModelParams params = cfg.model_params();
    const Eigen::Matrix4cd target = cfg.target();
    const PulseSchedule pulse = control_fields(traj);
    // Sample-and-hold noise needs headroom against norm drift.
    PropagationConfig prop = cfg.propagation();
    if (prop.method == IntegratorKind::adaptive_rk) {
        prop.rtol = std::min(prop.rtol, 1e-10);
    }
    std::vector<double> breakpoints(pulse.t.begin() + 1, pulse.t.end() - 1);

    struct Row {
        std::uint64_t seed;
        double infidelity = std::numeric_limits<double>::quiet_NaN();
        double runtime = 0.0;
        std::string status = "ok";
    };
    std::vector<Row> rows(n_runs);

    auto task = [&](int i) {
        const auto p0 = Clock::now();
        Row& row = rows[i];
        row.seed = cfg.seed + static_cast<std::uint64_t>(i);
        try {
            const NoisySchedule noisy =
                add_awgn(pulse, cfg.snr, row.seed, cfg.snr_is_db);
            // Strong noise can push the norm drift past its contract at the
            // nominal tolerance; retry tighter before giving up on the run.
            PropagationConfig run_prop = prop;
            for (int attempt = 0;; ++attempt) {
                try {
                    const auto comp = propagate_computational_basis(
                        params, make_field(noisy, traj), run_prop, {},
                        breakpoints);
                    row.infidelity =
                        1.0 - average_gate_fidelity(Eigen::Matrix4cd(
                                  target.adjoint() * comp.projected));
                    break;
                } catch (const IntegrationError&) {
                    if (run_prop.method != IntegratorKind::adaptive_rk ||
                        attempt >= 2) {
                        throw;
                    }
                    run_prop.rtol /= 5.0;
                }
            }
        } catch (const std::exception& e) {
            row.status = std::string("failed: ") + e.what();
        }
        row.runtime = std::chrono::duration<double>(Clock::now() - p0).count();
    };
    run_parallel(cfg.jobs, n_runs, task);

    double sum = 0.0, sum2 = 0.0;
    std::size_t ok = 0;
    {
        auto csv = open_out(opts.out_dir, "montecarlo.csv");
        csv << "run,seed,infidelity,runtime_s,status\n";
        csv.precision(12);
        for (int i = 0; i < n_runs; ++i) {
            const Row& r = rows[i];
            csv << i << ',' << r.seed << ',' << r.infidelity << ','
                << r.runtime << ',' << r.status << '\n';
            if (r.status == "ok") {
                sum += r.infidelity;
                sum2 += r.infidelity * r.infidelity;
                ++ok;
            }
        }
    }
    const double mean = ok ? sum / static_cast<double>(ok) : 0.0;
    const double var =
        ok ? std::max(0.0, sum2 / static_cast<double>(ok) - mean * mean) : 0.0;
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    write_manifest(opts.out_dir, cfg, wall, rows.size(),
                   json{{"snr", cfg.snr},
                        {"snr_scale", cfg.snr_is_db ? "db" : "linear"},
                        {"mean_infidelity", mean},
                        {"std_infidelity", std::sqrt(var)},
                        {"completed", ok}});
    if (!opts.quiet) {
        std::cout << "montecarlo snr=" << cfg.snr << ": mean 1-F = " << mean
                  << " (std " << std::sqrt(var) << ", " << ok << '/'
                  << n_runs << " runs)\n";
    }
    return 0;
}

int cmd_truthtable(ScenarioConfig cfg, const CommandOptions& opts) {
    apply_overrides(cfg, opts);
    const auto t0 = Clock::now();
    const InvariantTrajectory traj = cfg.trajectory();
    const ModelParams params = cfg.model_params();
    const PropagationConfig prop = cfg.propagation();

    TruthTable tt;
    if (cfg.gammaT > 0.0) {
        const auto collapse = lindblad_operators(params.gamma);
        std::vector<Matrix> finals(4);
        // A Hamiltonian source carries scratch state, so parallel inputs get
        // fresh sources.
        std::vector<OperatorSource> sources;
        for (int j = 0; j < 4; ++j) {
            sources.push_back(
                make_hamiltonian_source(params, make_field(traj), cfg.frame));
        }
        auto par_task = [&](int j) {
            const Vector cj = computational_ket(j);
            const auto trace = propagate_lindblad(
                sources[j], collapse, Matrix(cj * cj.adjoint()), 0.0, 1.0,
                std::vector<double>{1.0}, prop);
            finals[j] = trace.final();
        };
        run_parallel(cfg.jobs, 4, par_task);
        tt = truth_table_from_densities(finals);
    } else {
        const auto comp =
            propagate_computational_basis(params, make_field(traj), prop);
        tt = truth_table_from_columns(comp.trace.final());
    }

    {
        auto csv = open_out(opts.out_dir, "truth_table.csv");
        tt.write_csv(csv);
    }
    {
        auto txt = open_out(opts.out_dir, "truth_table.txt");
        tt.write_text(txt);
    }
    const double min_success = tt.min_success(cfg.target());
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    write_manifest(opts.out_dir, cfg, wall, 4,
                   json{{"min_success", min_success}});
    if (!opts.quiet) {
        std::cout << "truth table min success population = " << min_success
                  << '\n';
    }
    return 0;
}

int cmd_phases(ScenarioConfig cfg, const CommandOptions& opts) {
    apply_overrides(cfg, opts);
    const auto t0 = Clock::now();
    const InvariantTrajectory traj = cfg.trajectory();
    const PhaseTrace closed = accumulated_phases(traj);
    {
        auto csv = open_out(opts.out_dir, "phases.csv");
        closed.write_csv(csv, cfg.T_SI);
    }
    PropagationConfig prop;
    prop.rtol = 1e-11;
    prop.atol = 1e-14;
    const PhaseTrace propagated = phases_from_propagation(traj, prop);
    const double wall = std::chrono::duration<double>(Clock::now() - t0).count();
    write_manifest(opts.out_dir, cfg, wall, closed.times.size(),
                   json{{"theta2_final", closed.theta2.back()},
                        {"Theta2_final", closed.Theta2.back()},
                        {"theta2_final_propagated", propagated.theta2.back()},
                        {"Theta2_final_propagated", propagated.Theta2.back()}});
    if (!opts.quiet) {
        std::cout << "theta2(T) = " << propagated.theta2.back()
                  << ", Theta2(T) = " << propagated.Theta2.back() << '\n';
    }
    return 0;
}

}  // namespace rydgate
