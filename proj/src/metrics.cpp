#include "rydgate/metrics.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "rydgate/atom_model.hpp"

namespace rydgate {

double average_gate_fidelity(const Eigen::Matrix4cd& m) {
    constexpr double n = 4.0;
    const double tr_mmdag = (m * m.adjoint()).trace().real();
    const Complex tr_m = m.trace();
    return (tr_mmdag + std::norm(tr_m)) / (n * (n + 1.0));
}

double state_fidelity(const Vector& psi, const Vector& target) {
    return std::norm(target.dot(psi));
}

double state_fidelity(const Matrix& rho, const Vector& target) {
    return (target.adjoint() * rho * target)(0, 0).real();
}

void FidelityTrace::write_csv(std::ostream& os, double time_scale) const {
    os << "t," << metric << "\n";
    os.precision(12);
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << times[i] * time_scale << ',' << values[i] << '\n';
    }
}

double TruthTable::min_success(const Eigen::Matrix4cd& target) const {
    double worst = 1.0;
    for (int in = 0; in < 4; ++in) {
        int image = 0;
        double best = 0.0;
        for (int out = 0; out < 4; ++out) {
            const double w = std::norm(target(out, in));
            if (w > best) {
                best = w;
                image = out;
            }
        }
        worst = std::min(worst, populations(in, image));
    }
    return worst;
}

void TruthTable::write_csv(std::ostream& os) const {
    os << "input,p00,p01,p10,p11\n";
    os.precision(12);
    const char* names[4] = {"00", "01", "10", "11"};
    for (int in = 0; in < 4; ++in) {
        os << names[in];
        for (int out = 0; out < 4; ++out) {
            os << ',' << populations(in, out);
        }
        os << '\n';
    }
}

void TruthTable::write_text(std::ostream& os) const {
    os.precision(6);
    for (int in = 0; in < 4; ++in) {
        for (int out = 0; out < 4; ++out) {
            os << populations(in, out) << (out == 3 ? '\n' : ' ');
        }
    }
}

TruthTable truth_table_from_columns(const Matrix& columns) {
    if (columns.rows() != kPairDim || columns.cols() != 4) {
        throw std::invalid_argument("truth_table: expected 25 x 4 columns");
    }
    TruthTable tt;
    for (int in = 0; in < 4; ++in) {
        for (int out = 0; out < 4; ++out) {
            tt.populations(in, out) =
                std::norm(computational_ket(out).dot(columns.col(in)));
        }
    }
    return tt;
}

TruthTable truth_table(const Matrix& propagator) {
    if (propagator.rows() != kPairDim || propagator.cols() != kPairDim) {
        throw std::invalid_argument(
            "truth_table: expected a 25 x 25 propagator");
    }
    Matrix cols(kPairDim, 4);
    for (int j = 0; j < 4; ++j) {
        cols.col(j) = propagator * computational_ket(j);
    }
    return truth_table_from_columns(cols);
}

TruthTable truth_table_from_densities(const std::vector<Matrix>& rho_finals) {
    if (rho_finals.size() != 4) {
        throw std::invalid_argument(
            "truth_table_from_densities: expected four densities");
    }
    TruthTable tt;
    for (int in = 0; in < 4; ++in) {
        for (int out = 0; out < 4; ++out) {
            tt.populations(in, out) =
                state_fidelity(rho_finals[in], computational_ket(out));
        }
    }
    return tt;
}

void PhaseTrace::write_csv(std::ostream& os, double time_scale) const {
    os << "t,theta2,Theta2\n";
    os.precision(12);
    for (std::size_t i = 0; i < times.size(); ++i) {
        os << times[i] * time_scale << ',' << theta2[i] << ',' << Theta2[i]
           << '\n';
    }
}

PhaseTrace accumulated_phases(const InvariantTrajectory& traj,
                              std::size_t n_points) {
    if (n_points < 3) {
        throw std::invalid_argument("accumulated_phases: need >= 3 points");
    }
    if (n_points % 2 == 0) ++n_points;  // put a grid point on T/2 exactly
    PhaseTrace out;
    out.times.resize(n_points);
    out.theta2.resize(n_points);
    out.Theta2.resize(n_points);
    const double T = traj.duration;
    const double h = T / static_cast<double>(n_points - 1);
    double th = 0.0, gp = 0.0;
    PhaseRates prev = phase_rates(0.0, traj);
    out.times[0] = 0.0;
    out.theta2[0] = 0.0;
    out.Theta2[0] = 0.0;
    for (std::size_t i = 1; i < n_points; ++i) {
        const double t = (i + 1 == n_points) ? T : h * static_cast<double>(i);
        const PhaseRates cur = phase_rates(t, traj);
        th += 0.5 * h * (prev.theta2_dot + cur.theta2_dot);
        gp += 0.5 * h * (prev.Theta2_dot + cur.Theta2_dot);
        if (t > T / 2.0 && out.times[i - 1] <= T / 2.0) {
            gp += traj.theta_g;  // mu2 jumps by -theta_g at T/2
        }
        out.times[i] = t;
        out.theta2[i] = th;
        out.Theta2[i] = gp;
        prev = cur;
    }
    return out;
}

namespace {

double wrap_to_pi(double x) {
    while (x > kPi) x -= 2.0 * kPi;
    while (x <= -kPi) x += 2.0 * kPi;
    return x;
}

}  // namespace

PhaseTrace phases_from_propagation(const InvariantTrajectory& traj,
                                   const PropagationConfig& config,
                                   std::size_t n_points) {
    if (n_points % 2 == 0) ++n_points;
    const OperatorSource h = make_effective_two_level_source(make_field(traj));
    Vector psi0(2);
    psi0 << 0.0, 1.0;  // |xi_+ xi_->
    const std::vector<double> samples = uniform_times(traj.duration, n_points);
    const StateTrace trace =
        propagate_state(h, psi0, 0.0, traj.duration, samples, config);

    PhaseTrace out;
    const std::size_t n = trace.times.size();
    out.times = trace.times;
    out.theta2.assign(n, 0.0);
    out.Theta2.assign(n, 0.0);
    Matrix h_op(2, 2);
    double alpha_prev = 0.0;
    double th = 0.0;
    double expect_prev = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = trace.times[i];
        const Vector psi = trace.columns[i].col(0);
        h.assemble(t, h_op);
        const double expect = (psi.adjoint() * h_op * psi)(0, 0).real();
        if (i > 0) {
            th -= 0.5 * (trace.times[i] - trace.times[i - 1]) *
                  (expect + expect_prev);
        }
        expect_prev = expect;

        const auto [v1, v2] = invariant_eigenvectors(t, traj);
        const Complex overlap = v2.dot(psi);
        double alpha = std::arg(overlap);
        if (i > 0) {
            // Branch-track by continuity; the auxiliary basis vector jumps
            // by the designed geometric phase at T/2.
            double expected = alpha_prev;
            if (t > traj.duration / 2.0 &&
                out.times[i - 1] <= traj.duration / 2.0) {
                expected += traj.theta_g;
            }
            alpha = expected + wrap_to_pi(alpha - expected);
        }
        alpha_prev = alpha;
        out.theta2[i] = th;
        out.Theta2[i] = alpha - th;
    }
    return out;
}

double perturbative_infidelity(const InvariantTrajectory& traj, double eps,
                               std::size_t n_points) {
    if (std::abs(eps) > 0.2) {
        throw std::invalid_argument(
            "perturbative_infidelity: |eps| must be <= 0.2");
    }
    if (n_points % 2 == 0) ++n_points;
    const double T = traj.duration;
    const double h = T / static_cast<double>(n_points - 1);

    // alpha_2 accumulated from the closed-form rates (dynamic + geometric,
    // including the step at T/2), matrix element from the invariant
    // eigenvectors and the designed field.
    Matrix h_op(2, 2);
    const OperatorSource src = make_effective_two_level_source(make_field(traj));
    double alpha = 0.0;
    PhaseRates prev_rates = phase_rates(0.0, traj);
    Complex acc = 0.0;
    Complex prev_integrand;
    for (std::size_t i = 0; i < n_points; ++i) {
        const double t = (i + 1 == n_points) ? T : h * static_cast<double>(i);
        if (i > 0) {
            const PhaseRates cur = phase_rates(t, traj);
            alpha += 0.5 * h *
                     (prev_rates.theta2_dot + prev_rates.Theta2_dot +
                      cur.theta2_dot + cur.Theta2_dot);
            if (t > T / 2.0 && t - h <= T / 2.0) {
                alpha += traj.theta_g;
            }
            prev_rates = cur;
        }
        const auto [v1, v2] = invariant_eigenvectors(t, traj);
        src.assemble(t, h_op);
        const Complex element = (v1.adjoint() * h_op * v2)(0, 0);
        const Complex integrand = std::exp(Complex(0.0, 2.0 * alpha)) * element;
        if (i > 0) {
            acc += 0.5 * h * (integrand + prev_integrand);
        }
        prev_integrand = integrand;
    }
    return eps * eps * std::norm(acc);
}

double average_gate_fidelity_open(const std::vector<Matrix>& rho_basis,
                                  const std::vector<Matrix>& rho_pairs_real,
                                  const std::vector<Matrix>& rho_pairs_imag,
                                  const Eigen::Matrix4cd& target) {
    if (rho_basis.size() != 4 || rho_pairs_real.size() != 6 ||
        rho_pairs_imag.size() != 6) {
        throw std::invalid_argument(
            "average_gate_fidelity_open: expected 4 + 6 + 6 densities");
    }
    // Ideal images embedded in the pair space.
    std::vector<Vector> psi_u(4, Vector::Zero(kPairDim));
    for (int j = 0; j < 4; ++j) {
        for (int i = 0; i < 4; ++i) {
            psi_u[j] += target(i, j) * computational_ket(i);
        }
    }
    // Lambda(|i><j|) for i < j from the pair propagations.
    auto pair_slot = [](int i, int j) {
        static constexpr int slot[4][4] = {{-1, 0, 1, 2},
                                           {0, -1, 3, 4},
                                           {1, 3, -1, 5},
                                           {2, 4, 5, -1}};
        return slot[i][j];
    };
    double sum_direct = 0.0;  // sum_ij <psi_j^U| Lambda(|i><i|) |psi_j^U>
    Complex sum_cross = 0.0;  // sum_ij <psi_i^U| Lambda(|i><j|) |psi_j^U>
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            sum_direct +=
                (psi_u[j].adjoint() * rho_basis[i] * psi_u[j])(0, 0).real();
            if (i == j) {
                sum_cross +=
                    (psi_u[i].adjoint() * rho_basis[i] * psi_u[i])(0, 0);
                continue;
            }
            const int s = pair_slot(i, j);
            const Matrix mean = 0.5 * (rho_basis[i] + rho_basis[j]);
            const Matrix re_part = rho_pairs_real[s] - mean;
            const Matrix im_part = rho_pairs_imag[s] - mean;
            // Lambda(|i><j|) = re_part + i im_part for i < j; the adjoint
            // map gives the (j > i) case.
            Matrix lam;
            if (i < j) {
                lam = re_part + Complex(0.0, 1.0) * im_part;
            } else {
                lam = (re_part + Complex(0.0, 1.0) * im_part).adjoint();
            }
            sum_cross += (psi_u[i].adjoint() * lam * psi_u[j])(0, 0);
        }
    }
    return (sum_direct + sum_cross.real()) / 20.0;
}

}  // namespace rydgate
