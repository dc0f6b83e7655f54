#include "rydgate/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

namespace rydgate {

IntegratorKind parse_integrator(const std::string& name) {
    if (name == "rk" || name == "adaptive_rk") return IntegratorKind::adaptive_rk;
    if (name == "expm" || name == "piecewise_expm") {
        return IntegratorKind::piecewise_expm;
    }
    throw std::invalid_argument("unknown integrator: " + name);
}

Frame parse_frame(const std::string& name) {
    if (name == "full" || name == "lab") return Frame::lab;
    if (name == "rotating") return Frame::rotating;
    if (name == "effective") return Frame::effective;
    throw std::invalid_argument("unknown frame: " + name);
}

ControlFieldFn make_field(const InvariantTrajectory& traj) {
    return [traj](double t) { return control_field_at(t, traj); };
}

ControlFieldFn make_field(const PulseSchedule& schedule) {
    return [schedule](double t) { return schedule.at(t); };
}

namespace {

/// Deterministic standard-normal sampler (Box-Muller over mt19937_64);
/// std::normal_distribution is implementation-defined, this is not.
class GaussianSampler {
  public:
    explicit GaussianSampler(std::uint64_t seed) : eng_(seed) {}

    double operator()() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 =
            (static_cast<double>(eng_() >> 11) + 1.0) * 0x1p-53;  // (0, 1]
        const double u2 = static_cast<double>(eng_() >> 11) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

double mean_power(const std::vector<double>& x) {
    if (x.empty()) return 0.0;
    double acc = 0.0;
    for (double v : x) acc += v * v;
    return acc / static_cast<double>(x.size());
}

std::size_t hold_index(const NoisySchedule& s, double t) {
    const double h = s.base.dt();
    if (h <= 0.0 || t <= s.base.t.front()) return 0;
    const auto k = static_cast<std::size_t>((t - s.base.t.front()) / h);
    return std::min(k, s.base.size() - 1);
}

}  // namespace

FieldSample NoisySchedule::at(double t) const {
    FieldSample f = base.at(t);
    if (!noise_x.empty()) {
        const std::size_t k = hold_index(*this, t);
        f.omega_x += noise_x[k];
        f.omega_y += noise_y[k];
    }
    return f;
}

NoisySchedule add_awgn(const PulseSchedule& base, double snr,
                       std::uint64_t seed, bool snr_is_db) {
    if (!(snr > 0.0)) {
        throw std::invalid_argument("add_awgn: snr must be positive");
    }
    NoisySchedule out;
    out.base = base;
    out.snr = snr;
    out.snr_is_db = snr_is_db;
    out.seed = seed;
    const std::size_t n = base.size();
    out.noise_x.assign(n, 0.0);
    out.noise_y.assign(n, 0.0);
    out.omega_x = base.omega_x;
    out.omega_y = base.omega_y;
    if (std::isinf(snr)) {
        return out;  // realized samples equal the base bitwise
    }
    const double ratio = snr_is_db ? std::pow(10.0, -snr / 10.0) : 1.0 / snr;
    const double sigma_x = std::sqrt(mean_power(base.omega_x) * ratio);
    const double sigma_y = std::sqrt(mean_power(base.omega_y) * ratio);
    GaussianSampler gauss(seed);
    for (std::size_t i = 0; i < n; ++i) {
        out.noise_x[i] = sigma_x * gauss();
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.noise_y[i] = sigma_y * gauss();
    }
    for (std::size_t i = 0; i < n; ++i) {
        out.omega_x[i] += out.noise_x[i];
        out.omega_y[i] += out.noise_y[i];
    }
    return out;
}

ControlFieldFn make_field(const NoisySchedule& noisy) {
    return [noisy](double t) { return noisy.at(t); };
}

ControlFieldFn make_field(const NoisySchedule& noisy,
                          const InvariantTrajectory& clean) {
    return [noisy, clean](double t) {
        FieldSample f = control_field_at(t, clean);
        if (!noisy.noise_x.empty()) {
            const std::size_t k = hold_index(noisy, t);
            f.omega_x += noisy.noise_x[k];
            f.omega_y += noisy.noise_y[k];
        }
        return f;
    };
}

namespace {

struct SparseEntry {
    int row;
    int col;
    Complex val;
};

std::vector<SparseEntry> sparsify(const Matrix& m) {
    std::vector<SparseEntry> out;
    for (int c = 0; c < m.cols(); ++c) {
        for (int r = 0; r < m.rows(); ++r) {
            if (m(r, c) != Complex(0.0, 0.0)) {
                out.push_back({r, c, m(r, c)});
            }
        }
    }
    return out;
}

/// H(t) = sum_k coef_k(t) M_k with sparse M_k.
struct TermData {
    int dim = 0;
    std::vector<std::vector<SparseEntry>> entries;  // per coefficient slot
    std::function<void(double, std::vector<Complex>&)> eval_coefs;
};

OperatorSource make_term_source(std::shared_ptr<TermData> data) {
    OperatorSource src;
    src.dim = data->dim;
    auto coefs = std::make_shared<std::vector<Complex>>(data->entries.size());
    src.apply = [data, coefs](double t, const Matrix& y, Matrix& out) {
        out.setZero(data->dim, y.cols());
        data->eval_coefs(t, *coefs);
        for (std::size_t k = 0; k < data->entries.size(); ++k) {
            const Complex c = (*coefs)[k];
            if (c == Complex(0.0, 0.0)) continue;
            for (const SparseEntry& e : data->entries[k]) {
                out.row(e.row) += (c * e.val) * y.row(e.col);
            }
        }
    };
    src.assemble = [data, coefs](double t, Matrix& h) {
        h.setZero(data->dim, data->dim);
        data->eval_coefs(t, *coefs);
        for (std::size_t k = 0; k < data->entries.size(); ++k) {
            const Complex c = (*coefs)[k];
            for (const SparseEntry& e : data->entries[k]) {
                h(e.row, e.col) += c * e.val;
            }
        }
    };
    return src;
}

OperatorSource make_lab_source(const ModelParams& params,
                               ControlFieldFn field) {
    auto data = std::make_shared<TermData>();
    data->dim = kPairDim;

    const Matrix id5 = Matrix::Identity(kAtomDim, kAtomDim);
    const Matrix drive_a =
        kron(xi_plus(params.v_a) * atom_ket(Level::ryd).adjoint(), id5);
    const Matrix drive_b_plus =
        kron(id5, atom_ket(Level::ryd_plus) * xi_plus(params.v_b).adjoint());
    const Matrix drive_b_r =
        kron(id5, atom_ket(Level::ryd) * xi_plus(params.v_b).adjoint());
    const Matrix h_forster = forster_hamiltonian(params).entries;

    data->entries = {
        sparsify(h_forster),
        sparsify(drive_a),          sparsify(drive_a.adjoint()),
        sparsify(drive_b_plus),     sparsify(drive_b_plus.adjoint()),
        sparsify(drive_b_r),        sparsify(drive_b_r.adjoint()),
    };

    const double omega_b = params.omega_b;
    const double delta = params.Delta;
    const double scale = 1.0 + params.epsilon;
    data->eval_coefs = [field = std::move(field), omega_b, delta, scale](
                           double t, std::vector<Complex>& c) {
        const FieldSample f = field(t);
        // omega_a e^{i phi_a} = (omega_x + i omega_y) / 2
        const Complex ca = 0.5 * scale * Complex(f.omega_x, f.omega_y);
        const Complex cb = omega_b * std::exp(Complex(0.0, -delta * t));
        c[0] = 1.0;
        c[1] = ca;
        c[2] = std::conj(ca);
        c[3] = cb;
        c[4] = std::conj(cb);
        c[5] = std::conj(cb);  // omega_b e^{+i Delta t} on |r>_b <xi_+|
        c[6] = cb;
    };
    return make_term_source(std::move(data));
}

OperatorSource make_effective_embedded_source(const ModelParams& params,
                                              ControlFieldFn field) {
    auto data = std::make_shared<TermData>();
    data->dim = kPairDim;
    const DressedBasis d = dressed_basis(params.v_a, params.v_b);
    const Matrix coupling = d.xi_pm * d.r_xi_minus.adjoint();
    data->entries = {sparsify(coupling), sparsify(coupling.adjoint())};
    const double scale = 1.0 + params.epsilon;
    data->eval_coefs = [field = std::move(field), scale](
                           double t, std::vector<Complex>& c) {
        const FieldSample f = field(t);
        const Complex ca = 0.5 * scale * Complex(f.omega_x, f.omega_y);
        c[0] = ca;
        c[1] = std::conj(ca);
    };
    return make_term_source(std::move(data));
}

OperatorSource make_rotating_source(const ModelParams& params,
                                    ControlFieldFn field) {
    OperatorSource lab = make_lab_source(params, std::move(field));
    const DressedBasis d = dressed_basis(params.v_a, params.v_b);
    Matrix lambda = d.varpi_plus * d.varpi_plus.adjoint() -
                    d.varpi_minus * d.varpi_minus.adjoint();
    auto ws = std::make_shared<std::pair<Matrix, Matrix>>();
    ModelParams p = params;
    OperatorSource src;
    src.dim = kPairDim;
    src.assemble = [lab, lambda = std::move(lambda), p, ws](double t,
                                                            Matrix& h) {
        lab.assemble(t, ws->first);
        const Matrix r = rotating_frame_operator(t, p);
        h = r * ws->first * r.adjoint();
        h -= p.interaction() * lambda;
    };
    src.apply = [src_assemble = src.assemble, ws](double t, const Matrix& y,
                                                  Matrix& out) {
        src_assemble(t, ws->second);
        out = ws->second * y;
    };
    return src;
}

}  // namespace

OperatorSource make_hamiltonian_source(const ModelParams& params,
                                       ControlFieldFn field, Frame frame) {
    switch (frame) {
        case Frame::lab:
            return make_lab_source(params, std::move(field));
        case Frame::rotating:
            return make_rotating_source(params, std::move(field));
        case Frame::effective:
            return make_effective_embedded_source(params, std::move(field));
    }
    throw std::invalid_argument("make_hamiltonian_source: unknown frame");
}

OperatorSource make_effective_two_level_source(ControlFieldFn field,
                                               double epsilon) {
    auto data = std::make_shared<TermData>();
    data->dim = 2;
    // Basis: index 0 = |r xi_->, index 1 = |xi_+ xi_->.
    data->entries = {{{1, 0, Complex(1.0, 0.0)}}, {{0, 1, Complex(1.0, 0.0)}}};
    const double scale = 1.0 + epsilon;
    data->eval_coefs = [field = std::move(field), scale](
                           double t, std::vector<Complex>& c) {
        const FieldSample f = field(t);
        const Complex ca = 0.5 * scale * Complex(f.omega_x, f.omega_y);
        c[0] = ca;
        c[1] = std::conj(ca);
    };
    return make_term_source(std::move(data));
}

OperatorSource make_constant_source(Matrix h) {
    if (h.rows() != h.cols()) {
        throw std::invalid_argument("make_constant_source: matrix not square");
    }
    auto shared = std::make_shared<Matrix>(std::move(h));
    OperatorSource src;
    src.dim = static_cast<int>(shared->rows());
    src.apply = [shared](double, const Matrix& y, Matrix& out) {
        out = (*shared) * y;
    };
    src.assemble = [shared](double, Matrix& out) { out = *shared; };
    return src;
}

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double kA21 = 1.0 / 5;
constexpr double kA31 = 3.0 / 40, kA32 = 9.0 / 40;
constexpr double kA41 = 44.0 / 45, kA42 = -56.0 / 15, kA43 = 32.0 / 9;
constexpr double kA51 = 19372.0 / 6561, kA52 = -25360.0 / 2187,
                 kA53 = 64448.0 / 6561, kA54 = -212.0 / 729;
constexpr double kA61 = 9017.0 / 3168, kA62 = -355.0 / 33,
                 kA63 = 46732.0 / 5247, kA64 = 49.0 / 176,
                 kA65 = -5103.0 / 18656;
constexpr double kB1 = 35.0 / 384, kB3 = 500.0 / 1113, kB4 = 125.0 / 192,
                 kB5 = -2187.0 / 6784, kB6 = 11.0 / 84;
constexpr double kC2 = 1.0 / 5, kC3 = 3.0 / 10, kC4 = 4.0 / 5, kC5 = 8.0 / 9;
constexpr double kE1 = 71.0 / 57600, kE3 = -71.0 / 16695, kE4 = 71.0 / 1920,
                 kE5 = -17253.0 / 339200, kE6 = 22.0 / 525, kE7 = -1.0 / 40;

double scaled_error_norm(const Matrix& err, const Matrix& y0, const Matrix& y1,
                         double atol, double rtol) {
    double acc = 0.0;
    const auto n = err.size();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double scale =
            atol + rtol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        const double e = std::abs(err(i)) / scale;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

/// Merged, sorted stop schedule: the integrator lands exactly on every stop;
/// stops flagged as samples trigger the callback.
struct StopSchedule {
    std::vector<std::pair<double, bool>> stops;  // (time, is_sample)

    StopSchedule(double t0, double t1, std::span<const double> samples,
                 std::span<const double> breakpoints) {
        const double tol = 1e-9 * (t1 - t0);
        for (double s : samples) {
            if (s < t0 - tol || s > t1 + tol) {
                throw std::invalid_argument(
                    "sample times must lie within [t0, t1]");
            }
            if (s > t0) stops.emplace_back(std::min(s, t1), true);
        }
        for (double b : breakpoints) {
            if (b > t0 && b < t1) stops.emplace_back(b, false);
        }
        stops.emplace_back(t1, false);
        std::sort(stops.begin(), stops.end());
        // Merge stops closer than the time resolution, keeping sample flags.
        const double tiny = 1e-14 * std::max(std::abs(t0), std::abs(t1));
        std::vector<std::pair<double, bool>> merged;
        for (const auto& s : stops) {
            if (!merged.empty() && s.first - merged.back().first <= tiny) {
                merged.back().second = merged.back().second || s.second;
            } else {
                merged.push_back(s);
            }
        }
        stops = std::move(merged);
    }
};

template <typename Rhs>
IntegratorStats integrate_dopri5(
    Rhs&& rhs, double t0, double t1, Matrix& y, const PropagationConfig& cfg,
    std::span<const double> sample_times, std::span<const double> breakpoints,
    const std::function<void(double, const Matrix&)>& on_sample) {
    IntegratorStats stats;
    const double span = t1 - t0;
    if (span <= 0.0) {
        throw std::invalid_argument("integrate_dopri5: t1 must exceed t0");
    }
    // Samples at exactly t0 are emitted before stepping.
    for (double s : sample_times) {
        if (s <= t0) on_sample(t0, y);
    }
    StopSchedule schedule(t0, t1, sample_times, breakpoints);

    const Eigen::Index rows = y.rows(), cols = y.cols();
    Matrix k1(rows, cols), k2(rows, cols), k3(rows, cols), k4(rows, cols),
        k5(rows, cols), k6(rows, cols), k7(rows, cols), ytmp(rows, cols),
        ynew(rows, cols), yerr(rows, cols);

    double t = t0;
    double h = span * 1e-5;
    const double h_min = span * 1e-15;
    bool fsal_valid = false;
    std::size_t stop_idx = 0;

    rhs(t, y, k1);
    ++stats.rhs_evals;
    fsal_valid = true;

    while (stop_idx < schedule.stops.size()) {
        const auto [stop_t, stop_is_sample] = schedule.stops[stop_idx];
        if (t >= stop_t) {
            if (stop_is_sample) on_sample(stop_t, y);
            ++stop_idx;
            continue;
        }
        if (stats.steps + stats.rejected > cfg.max_steps) {
            throw IntegrationError("integrate_dopri5: max step count exceeded");
        }
        bool clipped = false;
        double hs = h;
        if (t + hs >= stop_t) {
            hs = stop_t - t;
            clipped = true;
        }
        if (hs < h_min) {
            throw IntegrationError("integrate_dopri5: step size underflow");
        }
        if (!fsal_valid) {
            rhs(t, y, k1);
            ++stats.rhs_evals;
            fsal_valid = true;
        }

        ytmp = y + hs * (kA21 * k1);
        rhs(t + kC2 * hs, ytmp, k2);
        ytmp = y + hs * (kA31 * k1 + kA32 * k2);
        rhs(t + kC3 * hs, ytmp, k3);
        ytmp = y + hs * (kA41 * k1 + kA42 * k2 + kA43 * k3);
        rhs(t + kC4 * hs, ytmp, k4);
        ytmp = y + hs * (kA51 * k1 + kA52 * k2 + kA53 * k3 + kA54 * k4);
        rhs(t + kC5 * hs, ytmp, k5);
        ytmp = y + hs * (kA61 * k1 + kA62 * k2 + kA63 * k3 + kA64 * k4 +
                         kA65 * k5);
        rhs(t + hs, ytmp, k6);
        ynew = y + hs * (kB1 * k1 + kB3 * k3 + kB4 * k4 + kB5 * k5 + kB6 * k6);
        rhs(t + hs, ynew, k7);
        stats.rhs_evals += 6;

        yerr = hs * (kE1 * k1 + kE3 * k3 + kE4 * k4 + kE5 * k5 + kE6 * k6 +
                     kE7 * k7);
        double err = scaled_error_norm(yerr, y, ynew, cfg.atol, cfg.rtol);
        if (!std::isfinite(err)) err = 10.0;

        if (err <= 1.0) {
            t = clipped ? stop_t : t + hs;
            y.swap(ynew);
            k1.swap(k7);  // FSAL
            ++stats.steps;
            if (clipped) {
                if (stop_is_sample) on_sample(stop_t, y);
                ++stop_idx;
                // The field may be discontinuous across a breakpoint.
                fsal_valid = false;
            } else {
                const double grow =
                    err == 0.0 ? 5.0
                               : std::min(5.0, 0.9 * std::pow(err, -0.2));
                h = hs * std::max(0.2, grow);
            }
        } else {
            ++stats.rejected;
            h = hs * std::max(0.2, 0.9 * std::pow(err, -0.2));
        }
    }
    return stats;
}

/// y <- exp(-i h H) y by Taylor series; splits internally while the scaled
/// generator norm is too large for fast convergence.
void apply_exp_taylor(const Matrix& h_op, double h, Matrix& y, Matrix& term,
                      Matrix& tmp) {
    const double scaled =
        std::abs(h) * h_op.cwiseAbs().rowwise().sum().maxCoeff();
    int splits = 0;
    while (scaled / std::pow(2.0, splits) > 0.8 && splits < 40) ++splits;
    const double hs = h / std::pow(2.0, splits);
    const long reps = 1L << splits;
    for (long r = 0; r < reps; ++r) {
        term = y;
        for (int k = 1; k <= 64; ++k) {
            tmp.noalias() = h_op * term;
            term = (Complex(0.0, -hs) / static_cast<double>(k)) * tmp;
            y += term;
            if (term.norm() <= 1e-16 * y.norm()) break;
        }
    }
}

template <typename StepFn>
IntegratorStats run_fixed_steps(
    double t0, double t1, double step, std::span<const double> sample_times,
    std::span<const double> breakpoints, const Matrix& y_ref,
    const std::function<void(double, const Matrix&)>& on_sample,
    StepFn&& do_step) {
    if (!(step > 0.0)) {
        throw std::invalid_argument(
            "piecewise_expm requires a positive expm_step");
    }
    IntegratorStats stats;
    for (double s : sample_times) {
        if (s <= t0) on_sample(t0, y_ref);
    }
    StopSchedule schedule(t0, t1, sample_times, breakpoints);
    double t = t0;
    const double eps_t = 1e-13 * (t1 - t0);
    for (const auto& [stop_t, is_sample] : schedule.stops) {
        while (t < stop_t - eps_t) {
            const double hs = std::min(step, stop_t - t);
            do_step(t, hs);
            ++stats.steps;
            ++stats.rhs_evals;
            t += hs;
        }
        t = stop_t;
        if (is_sample) on_sample(stop_t, y_ref);
    }
    return stats;
}

void check_hermitian_at(const OperatorSource& h, double t, Matrix& buf) {
    h.assemble(t, buf);
    const double scale = std::max(1.0, buf.cwiseAbs().maxCoeff());
    if (!is_hermitian(buf, 1e-12 * scale)) {
        throw std::invalid_argument(
            "propagation requires a Hermitian Hamiltonian");
    }
}

}  // namespace

std::vector<double> uniform_times(double T, std::size_t n) {
    if (n < 2) {
        throw std::invalid_argument("uniform_times: need n >= 2");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = T * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    out.back() = T;
    return out;
}

StateTrace propagate_columns(const OperatorSource& h, const Matrix& psi0,
                             double t0, double t1,
                             std::span<const double> sample_times,
                             const PropagationConfig& config,
                             std::span<const double> breakpoints) {
    if (psi0.rows() != h.dim) {
        throw std::invalid_argument("propagate_columns: dimension mismatch");
    }
    StateTrace trace;
    Matrix y = psi0;
    Matrix hbuf;
    if (config.check_hermitian) {
        check_hermitian_at(h, t0, hbuf);
        check_hermitian_at(h, 0.5 * (t0 + t1), hbuf);
        check_hermitian_at(h, t1, hbuf);
    }
    auto on_sample = [&trace](double t, const Matrix& y_now) {
        trace.times.push_back(t);
        trace.columns.push_back(y_now);
    };
    if (config.method == IntegratorKind::adaptive_rk) {
        auto rhs = [&h](double t, const Matrix& y_in, Matrix& dydt) {
            h.apply(t, y_in, dydt);
            dydt *= Complex(0.0, -1.0);
        };
        trace.stats = integrate_dopri5(rhs, t0, t1, y, config, sample_times,
                                       breakpoints, on_sample);
    } else {
        Matrix term(y.rows(), y.cols()), tmp(y.rows(), y.cols());
        Matrix h_op(h.dim, h.dim);
        auto do_step = [&](double t, double hs) {
            h.assemble(t + 0.5 * hs, h_op);
            apply_exp_taylor(h_op, hs, y, term, tmp);
        };
        trace.stats =
            run_fixed_steps(t0, t1, config.expm_step, sample_times,
                            breakpoints, y, on_sample, do_step);
    }
    if (trace.times.empty() || trace.times.back() != t1) {
        trace.times.push_back(t1);
        trace.columns.push_back(y);
    }
    for (Eigen::Index j = 0; j < psi0.cols(); ++j) {
        const double n0 = psi0.col(j).norm();
        const double n1 = trace.columns.back().col(j).norm();
        if (std::abs(n1 - n0) > 1e-8 * std::max(1.0, n0)) {
            throw IntegrationError(
                "propagate_columns: norm drift exceeds 1e-8; tighten the "
                "integrator tolerance");
        }
    }
    return trace;
}

StateTrace propagate_state(const OperatorSource& h, const Vector& psi0,
                           double t0, double t1,
                           std::span<const double> sample_times,
                           const PropagationConfig& config,
                           std::span<const double> breakpoints) {
    if (std::abs(psi0.norm() - 1.0) > 1e-8) {
        throw std::invalid_argument("propagate_state: psi0 must be normalized");
    }
    return propagate_columns(h, psi0, t0, t1, sample_times, config,
                             breakpoints);
}

ComputationalPropagation propagate_computational_basis(
    const ModelParams& params, const ControlFieldFn& field,
    const PropagationConfig& config, std::span<const double> sample_times,
    std::span<const double> breakpoints) {
    const OperatorSource h =
        make_hamiltonian_source(params, field, config.frame);
    Matrix cols(kPairDim, 4);
    for (int j = 0; j < 4; ++j) {
        cols.col(j) = computational_ket(j);
    }
    ComputationalPropagation out;
    out.trace = propagate_columns(h, cols, 0.0, params.T, sample_times, config,
                                  breakpoints);
    const Matrix& final_cols = out.trace.final();
    for (int i = 0; i < 4; ++i) {
        const Vector bra = computational_ket(i);
        for (int j = 0; j < 4; ++j) {
            out.projected(i, j) = bra.dot(final_cols.col(j));
        }
    }
    return out;
}

namespace {

struct CollapseData {
    std::vector<std::vector<SparseEntry>> ops;
    bool gamma_is_diagonal = true;
    Vector gamma_diag;    // diag of sum L^dag L
    Matrix gamma_dense;
};

CollapseData prepare_collapse(const std::vector<QuantumOperator>& collapse,
                              int dim) {
    CollapseData data;
    Matrix gamma = Matrix::Zero(dim, dim);
    for (const QuantumOperator& l : collapse) {
        if (l.dim != dim) {
            throw std::invalid_argument(
                "propagate_lindblad: collapse operator dimension mismatch");
        }
        data.ops.push_back(sparsify(l.entries));
        gamma += l.entries.adjoint() * l.entries;
    }
    Matrix offdiag = gamma;
    offdiag.diagonal().setZero();
    data.gamma_is_diagonal =
        offdiag.cwiseAbs().maxCoeff() <=
        1e-14 * std::max(1.0, gamma.cwiseAbs().maxCoeff());
    data.gamma_diag = gamma.diagonal();
    data.gamma_dense = std::move(gamma);
    return data;
}

struct LindbladRhs {
    const OperatorSource* h;
    const CollapseData* collapse;
    mutable Matrix h_rho, rho_adj, h_rho_adj;

    void operator()(double t, const Matrix& rho, Matrix& out) const {
        h->apply(t, rho, h_rho);
        rho_adj = rho.adjoint();
        h->apply(t, rho_adj, h_rho_adj);
        out = Complex(0.0, -1.0) * (h_rho - h_rho_adj.adjoint());
        for (const auto& op : collapse->ops) {
            for (const SparseEntry& e1 : op) {
                for (const SparseEntry& e2 : op) {
                    out(e1.row, e2.row) +=
                        e1.val * std::conj(e2.val) * rho(e1.col, e2.col);
                }
            }
        }
        if (collapse->gamma_is_diagonal) {
            const Vector& g = collapse->gamma_diag;
            out -= 0.5 * (g.asDiagonal() * rho);
            out -= 0.5 * (rho * g.asDiagonal());
        } else {
            out.noalias() -= 0.5 * (collapse->gamma_dense * rho);
            out.noalias() -= 0.5 * (rho * collapse->gamma_dense);
        }
    }

    /// Dissipator alone (for operator splitting in the expm method).
    void dissipator(const Matrix& rho, Matrix& out) const {
        out.setZero(rho.rows(), rho.cols());
        for (const auto& op : collapse->ops) {
            for (const SparseEntry& e1 : op) {
                for (const SparseEntry& e2 : op) {
                    out(e1.row, e2.row) +=
                        e1.val * std::conj(e2.val) * rho(e1.col, e2.col);
                }
            }
        }
        if (collapse->gamma_is_diagonal) {
            const Vector& g = collapse->gamma_diag;
            out -= 0.5 * (g.asDiagonal() * rho);
            out -= 0.5 * (rho * g.asDiagonal());
        } else {
            out.noalias() -= 0.5 * (collapse->gamma_dense * rho);
            out.noalias() -= 0.5 * (rho * collapse->gamma_dense);
        }
    }
};

}  // namespace

DensityTrace propagate_lindblad(const OperatorSource& h,
                                const std::vector<QuantumOperator>& collapse,
                                const Matrix& rho0, double t0, double t1,
                                std::span<const double> sample_times,
                                const PropagationConfig& config,
                                std::span<const double> breakpoints) {
    if (rho0.rows() != h.dim || rho0.cols() != h.dim) {
        throw std::invalid_argument("propagate_lindblad: dimension mismatch");
    }
    if (!is_hermitian(rho0, 1e-9)) {
        throw std::invalid_argument("propagate_lindblad: rho0 not Hermitian");
    }
    if (std::abs(rho0.trace().real() - 1.0) > 1e-9 ||
        std::abs(rho0.trace().imag()) > 1e-12) {
        throw std::invalid_argument("propagate_lindblad: Tr rho0 must be 1");
    }
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(rho0);
        if (es.eigenvalues().minCoeff() < -1e-9) {
            throw std::invalid_argument(
                "propagate_lindblad: rho0 not positive semidefinite");
        }
    }
    Matrix hbuf;
    if (config.check_hermitian) {
        check_hermitian_at(h, t0, hbuf);
        check_hermitian_at(h, 0.5 * (t0 + t1), hbuf);
        check_hermitian_at(h, t1, hbuf);
    }

    const CollapseData collapse_data = prepare_collapse(collapse, h.dim);
    LindbladRhs rhs{&h, &collapse_data, {}, {}, {}};

    DensityTrace trace;
    Matrix rho = rho0;
    auto verify_and_record = [&](double t, const Matrix& r) {
        if (std::abs(r.trace().real() - 1.0) > 1e-7) {
            throw IntegrationError(
                "propagate_lindblad: trace drift exceeds 1e-7");
        }
        if (!is_hermitian(r, 1e-9)) {
            throw IntegrationError(
                "propagate_lindblad: Hermiticity drift exceeds 1e-9");
        }
        trace.times.push_back(t);
        trace.rho.push_back(r);
    };

    if (config.method == IntegratorKind::adaptive_rk) {
        auto rk_rhs = [&rhs](double t, const Matrix& y, Matrix& dydt) {
            rhs(t, y, dydt);
        };
        trace.stats = integrate_dopri5(rk_rhs, t0, t1, rho, config,
                                       sample_times, breakpoints,
                                       verify_and_record);
    } else {
        // Strang splitting: half-step dissipator, exponential Hamiltonian
        // step at the interval midpoint, half-step dissipator.
        Matrix term(h.dim, h.dim), tmp(h.dim, h.dim), d1(h.dim, h.dim),
            d2(h.dim, h.dim), h_op(h.dim, h.dim), rho_adj(h.dim, h.dim);
        auto half_dissipator = [&](double hs) {
            rhs.dissipator(rho, d1);
            rhs.dissipator(d1, d2);
            rho += (0.5 * hs) * d1 + (0.125 * hs * hs) * d2;
        };
        auto do_step = [&](double t, double hs) {
            half_dissipator(hs);
            h.assemble(t + 0.5 * hs, h_op);
            apply_exp_taylor(h_op, hs, rho, term, tmp);
            rho_adj = rho.adjoint();
            apply_exp_taylor(h_op, hs, rho_adj, term, tmp);
            rho = rho_adj.adjoint();
            half_dissipator(hs);
        };
        trace.stats =
            run_fixed_steps(t0, t1, config.expm_step, sample_times,
                            breakpoints, rho, verify_and_record, do_step);
    }
    if (trace.times.empty() || trace.times.back() != t1) {
        verify_and_record(t1, rho);
    }
    return trace;
}

}  // namespace rydgate
