#ifndef RYDGATE_METRICS_HPP
#define RYDGATE_METRICS_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "rydgate/dynamics.hpp"
#include "rydgate/pulse_design.hpp"

namespace rydgate {

/// (Tr[M M^dag] + |Tr M|^2) / (N(N+1)) with N = 4. M is the target-referred
/// propagator projected onto the computational subspace; leakage shows up as
/// Tr[M M^dag] < N.
double average_gate_fidelity(const Eigen::Matrix4cd& m);

double state_fidelity(const Vector& psi, const Vector& target);
double state_fidelity(const Matrix& rho, const Vector& target);

struct FidelityTrace {
    std::vector<double> times;
    std::vector<double> values;
    std::string metric = "average-gate";  // average-gate | state | density-state

    /// Header "t,<metric>"; t scaled to SI by time_scale on the way out.
    void write_csv(std::ostream& os, double time_scale = 1.0) const;
};

/// Output-state populations per computational input; row = input,
/// column = output. Rows sum to at most 1, the deficit is leakage.
struct TruthTable {
    Eigen::Matrix4d populations = Eigen::Matrix4d::Zero();

    /// Minimum over inputs of the population reaching the target gate's
    /// image state.
    double min_success(const Eigen::Matrix4cd& target) const;
    void write_csv(std::ostream& os) const;
    void write_text(std::ostream& os) const;
};

TruthTable truth_table(const Matrix& propagator);  // 25x25 at t = T
TruthTable truth_table_from_columns(const Matrix& columns);  // 25x4
TruthTable truth_table_from_densities(const std::vector<Matrix>& rho_finals);

struct PhaseTrace {
    std::vector<double> times;
    std::vector<double> theta2;  // dynamic phase
    std::vector<double> Theta2;  // geometric phase

    void write_csv(std::ostream& os, double time_scale = 1.0) const;
};

/// Cumulative integrals of the closed-form phase rates; the geometric phase
/// picks up its +theta_g step at t = T/2. Phases are branch-tracked by
/// continuity, not wrapped.
PhaseTrace accumulated_phases(const InvariantTrajectory& traj,
                              std::size_t n_points = 16385);

/// Phases extracted from an actual propagation of |xi_+ xi_-> under the
/// effective two-level Hamiltonian: theta2 from -int <psi|H|psi>, the total
/// phase from <theta_2(t)|psi(t)> with branch tracking, geometric = total -
/// dynamic.
PhaseTrace phases_from_propagation(const InvariantTrajectory& traj,
                                   const PropagationConfig& config,
                                   std::size_t n_points = 2049);

/// Second-order estimate eps^2 |int_0^T e^{2 i alpha_2} <theta_1|H|theta_2>
/// dt|^2 of the driven-channel infidelity under a (1+eps) field scaling.
double perturbative_infidelity(const InvariantTrajectory& traj, double eps,
                               std::size_t n_points = 32769);

/// Average gate fidelity of a completed open-system run, reconstructed from
/// density propagations of the four computational basis states, the six
/// (|i>+|j>)/sqrt(2) superpositions and the six (|i>+i|j>)/sqrt(2)
/// superpositions (pair order (0,1),(0,2),(0,3),(1,2),(1,3),(2,3)).
double average_gate_fidelity_open(const std::vector<Matrix>& rho_basis,
                                  const std::vector<Matrix>& rho_pairs_real,
                                  const std::vector<Matrix>& rho_pairs_imag,
                                  const Eigen::Matrix4cd& target);

}  // namespace rydgate

#endif
