#ifndef RYDGATE_PULSE_DESIGN_HPP
#define RYDGATE_PULSE_DESIGN_HPP

#include <cstddef>
#include <iosfwd>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rydgate/operator_algebra.hpp"

namespace rydgate {

inline constexpr double kPi = 3.14159265358979323846;

/// Instantaneous control-field quadratures. The drive amplitude seen by the
/// atom is omega_a = sqrt(omega_x^2 + omega_y^2)/2 with phase
/// phi_a = atan2(omega_y, omega_x), so that
/// H_drive = omega_a e^{i phi_a} |xi_+ xi_->><r xi_-| + H.c. equals
/// (omega_x/2) sigma_x + (omega_y/2) sigma_y on the driven two-level pair.
struct FieldSample {
    double omega_x = 0.0;
    double omega_y = 0.0;

    double omega_a() const;
    double phi_a() const;
};

/// One grid point of the invariant parameter trajectory.
struct InvariantSample {
    double t = 0.0;
    double mu1 = 0.0;
    double mu2 = 0.0;
    double mu1_dot = 0.0;
    double mu2_dot = 0.0;
    double chi = 0.0;
};

/// Invariant parameter trajectory for the one-parameter pulse family
/// chi(mu1) = eta * (2 mu1 - sin 2 mu1), mu1(t) = pi sin^2(pi t / T).
///
/// The closed forms are exact: mu2 = (4 eta / 3) sin^3(mu1) on [0, T/2],
/// shifted by -theta_g on (T/2, T]; chi picks up +theta_g at T/2. Boundary
/// conditions mu1(0) = mu1(T) = 0, mu1(T/2) = pi, mu1(t) = mu1(T - t) hold
/// by construction.
struct InvariantTrajectory {
    double duration = 1.0;   // T
    double eta = 1.0;        // optimization coefficient
    double theta_g = kPi;    // target geometric phase
    double u = 1.0;          // invariant scale constant (arbitrary)
    std::vector<InvariantSample> samples;

    double mu1(double t) const;
    double mu1_dot(double t) const;
    double mu2(double t) const;
    double mu2_dot(double t) const;
    double chi(double t) const;
};

double mu1_profile(double t, double T);
double mu1_dot_profile(double t, double T);
double mu2_profile(double t, double T, double eta, double theta_g);
double mu2_dot_profile(double t, double T, double eta);

/// Builds the trajectory with a uniform grid of n_samples points (>= 2).
InvariantTrajectory design_trajectory(double T, double eta,
                                      double theta_g = kPi, double u = 1.0,
                                      std::size_t n_samples = 4097);

/// Sampled control fields on a uniform grid over [0, T]. Fields vanish at
/// t = 0, T/2, T, so the schedule is continuous across the mu2 jump.
struct PulseSchedule {
    double duration = 0.0;
    std::vector<double> t;
    std::vector<double> omega_x;
    std::vector<double> omega_y;
    std::vector<double> mu1;
    std::vector<double> mu2;
    double omega_max = 0.0;  // max over grid of max(|omega_x|, |omega_y|)

    std::size_t size() const { return t.size(); }
    double dt() const;
    double omega_a(std::size_t i) const;
    double phi_a(std::size_t i) const;

    /// Linear interpolation between grid points.
    FieldSample at(double time) const;

    /// Header "t,omega_x,omega_y,omega_a,phi_a,mu1,mu2"; t in seconds,
    /// fields in rad/s, angles in rad. time_scale/rate_scale convert the
    /// stored (possibly dimensionless) samples to SI on the way out.
    void write_csv(std::ostream& os, double time_scale = 1.0,
                   double rate_scale = 1.0) const;
};

/// Exact closed-form field evaluation; throws on non-finite values (which
/// would indicate a profile violating the cancellation structure).
FieldSample control_field_at(double t, const InvariantTrajectory& traj);

/// Samples control_field_at on the trajectory grid.
PulseSchedule control_fields(const InvariantTrajectory& traj);

/// Invariant operator on span{|r xi_->, |xi_+ xi_->} (index 0, 1):
/// (u/2)(cos mu1 sigma_z + sin mu1 sin mu2 sigma_x + sin mu1 cos mu2 sigma_y).
Eigen::Matrix2cd invariant_operator(double t, const InvariantTrajectory& traj);

/// Eigenvectors of the invariant, eigenvalues +u/2 and -u/2 respectively.
std::pair<Eigen::Vector2cd, Eigen::Vector2cd> invariant_eigenvectors(
    double t, const InvariantTrajectory& traj);

/// Time derivatives of the dynamic and geometric phases along the two
/// invariant eigenvectors. Evaluated through the analytically cancelled
/// closed forms (theta2_dot = 2 eta sin^4(mu1) mu1_dot), never through
/// raw tan/sec factors.
struct PhaseRates {
    double theta1_dot = 0.0;
    double Theta1_dot = 0.0;
    double theta2_dot = 0.0;
    double Theta2_dot = 0.0;
};
PhaseRates phase_rates(double t, const InvariantTrajectory& traj);

/// Systematic error sensitivity for the pulse family. closed_form is
/// sin^2(eta pi)/eta^2 (pi^2 at eta = 0); quadrature is
/// |int_0^T e^{i chi} mu1_dot sin^2(mu1) dt|^2 evaluated numerically.
struct SensitivityResult {
    double closed_form = 0.0;
    double quadrature = 0.0;
};
SensitivityResult sensitivity_qs(double eta, std::size_t n_points = 32769);

}  // namespace rydgate

#endif
