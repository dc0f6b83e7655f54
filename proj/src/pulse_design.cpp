#include "rydgate/pulse_design.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace rydgate {

double FieldSample::omega_a() const {
    return 0.5 * std::hypot(omega_x, omega_y);
}

double FieldSample::phi_a() const {
    if (omega_x == 0.0 && omega_y == 0.0) {
        return 0.0;
    }
    return std::atan2(omega_y, omega_x);
}

double mu1_profile(double t, double T) {
    const double s = std::sin(kPi * t / T);
    return kPi * s * s;
}

double mu1_dot_profile(double t, double T) {
    return kPi * kPi / T * std::sin(2.0 * kPi * t / T);
}

double mu2_profile(double t, double T, double eta, double theta_g) {
    const double s = std::sin(mu1_profile(t, T));
    const double branch = (4.0 * eta / 3.0) * s * s * s;
    return t > T / 2.0 ? branch - theta_g : branch;
}

double mu2_dot_profile(double t, double T, double eta) {
    const double m1 = mu1_profile(t, T);
    const double s = std::sin(m1);
    return 4.0 * eta * s * s * std::cos(m1) * mu1_dot_profile(t, T);
}

namespace {

double chi_profile(double t, double T, double eta, double theta_g) {
    const double m1 = mu1_profile(t, T);
    const double base = eta * (2.0 * m1 - std::sin(2.0 * m1));
    return t > T / 2.0 ? base + theta_g : base;
}

}  // namespace

double InvariantTrajectory::mu1(double t) const {
    return mu1_profile(t, duration);
}
double InvariantTrajectory::mu1_dot(double t) const {
    return mu1_dot_profile(t, duration);
}
double InvariantTrajectory::mu2(double t) const {
    return mu2_profile(t, duration, eta, theta_g);
}
double InvariantTrajectory::mu2_dot(double t) const {
    return mu2_dot_profile(t, duration, eta);
}
double InvariantTrajectory::chi(double t) const {
    return chi_profile(t, duration, eta, theta_g);
}

InvariantTrajectory design_trajectory(double T, double eta, double theta_g,
                                      double u, std::size_t n_samples) {
    if (T <= 0.0) {
        throw std::invalid_argument("design_trajectory: T must be positive");
    }
    if (eta < 0.0) {
        throw std::invalid_argument("design_trajectory: eta must be >= 0");
    }
    if (n_samples < 2) {
        throw std::invalid_argument("design_trajectory: need >= 2 samples");
    }
    InvariantTrajectory traj;
    traj.duration = T;
    traj.eta = eta;
    traj.theta_g = theta_g;
    traj.u = u;
    traj.samples.resize(n_samples);
    const double dt = T / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) {
        const double t = (i + 1 == n_samples) ? T : dt * static_cast<double>(i);
        InvariantSample& s = traj.samples[i];
        s.t = t;
        s.mu1 = traj.mu1(t);
        s.mu2 = traj.mu2(t);
        s.mu1_dot = traj.mu1_dot(t);
        s.mu2_dot = traj.mu2_dot(t);
        s.chi = traj.chi(t);
    }
    return traj;
}

FieldSample control_field_at(double t, const InvariantTrajectory& traj) {
    // Inverse of the invariant equations of motion,
    //   omega_x = sin(mu2) tan(mu1) mu2_dot - cos(mu2) mu1_dot,
    //   omega_y = cos(mu2) tan(mu1) mu2_dot + sin(mu2) mu1_dot,
    // with tan(mu1) mu2_dot = 4 eta sin^3(mu1) mu1_dot cancelled analytically
    // so the poles of tan(mu1) never appear.
    const double m1 = traj.mu1(t);
    const double m2 = traj.mu2(t);
    const double d1 = traj.mu1_dot(t);
    const double s = std::sin(m1);
    const double tan_term = 4.0 * traj.eta * s * s * s * d1;
    FieldSample f;
    f.omega_x = std::sin(m2) * tan_term - std::cos(m2) * d1;
    f.omega_y = std::cos(m2) * tan_term + std::sin(m2) * d1;
    if (!std::isfinite(f.omega_x) || !std::isfinite(f.omega_y)) {
        throw std::runtime_error(
            "control_field_at: non-finite field value; profile violates the "
            "cancellation structure");
    }
    return f;
}

double PulseSchedule::dt() const {
    return size() > 1 ? duration / static_cast<double>(size() - 1) : 0.0;
}

double PulseSchedule::omega_a(std::size_t i) const {
    return 0.5 * std::hypot(omega_x[i], omega_y[i]);
}

double PulseSchedule::phi_a(std::size_t i) const {
    if (omega_x[i] == 0.0 && omega_y[i] == 0.0) {
        return 0.0;
    }
    return std::atan2(omega_y[i], omega_x[i]);
}

FieldSample PulseSchedule::at(double time) const {
    if (size() == 0) {
        return {};
    }
    if (time <= t.front()) {
        return {omega_x.front(), omega_y.front()};
    }
    if (time >= t.back()) {
        return {omega_x.back(), omega_y.back()};
    }
    const double h = dt();
    const auto k = static_cast<std::size_t>((time - t.front()) / h);
    const std::size_t i = std::min(k, size() - 2);
    const double w = (time - t[i]) / h;
    return {omega_x[i] + w * (omega_x[i + 1] - omega_x[i]),
            omega_y[i] + w * (omega_y[i + 1] - omega_y[i])};
}

void PulseSchedule::write_csv(std::ostream& os, double time_scale,
                              double rate_scale) const {
    os << "t,omega_x,omega_y,omega_a,phi_a,mu1,mu2\n";
    os.precision(12);
    for (std::size_t i = 0; i < size(); ++i) {
        os << t[i] * time_scale << ',' << omega_x[i] * rate_scale << ','
           << omega_y[i] * rate_scale << ',' << omega_a(i) * rate_scale << ','
           << phi_a(i) << ',' << mu1[i] << ',' << mu2[i] << '\n';
    }
}

PulseSchedule control_fields(const InvariantTrajectory& traj) {
    PulseSchedule p;
    p.duration = traj.duration;
    const std::size_t n = traj.samples.size();
    p.t.resize(n);
    p.omega_x.resize(n);
    p.omega_y.resize(n);
    p.mu1.resize(n);
    p.mu2.resize(n);
    double peak = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const InvariantSample& s = traj.samples[i];
        const FieldSample f = control_field_at(s.t, traj);
        p.t[i] = s.t;
        p.omega_x[i] = f.omega_x;
        p.omega_y[i] = f.omega_y;
        p.mu1[i] = s.mu1;
        p.mu2[i] = s.mu2;
        peak = std::max(peak, std::max(std::abs(f.omega_x),
                                       std::abs(f.omega_y)));
    }
    // The fields vanish at the boundary by construction; pin the endpoints
    // so exported schedules carry exact zeros.
    p.omega_x.front() = p.omega_y.front() = 0.0;
    p.omega_x.back() = p.omega_y.back() = 0.0;
    p.omega_max = peak;
    return p;
}

Eigen::Matrix2cd invariant_operator(double t, const InvariantTrajectory& traj) {
    const double m1 = traj.mu1(t);
    const double m2 = traj.mu2(t);
    const double nz = std::cos(m1);
    const double nx = std::sin(m1) * std::sin(m2);
    const double ny = std::sin(m1) * std::cos(m2);
    Eigen::Matrix2cd out;
    out(0, 0) = Complex(0.5 * traj.u * nz, 0.0);
    out(1, 1) = Complex(-0.5 * traj.u * nz, 0.0);
    out(0, 1) = 0.5 * traj.u * Complex(nx, -ny);
    out(1, 0) = 0.5 * traj.u * Complex(nx, ny);
    return out;
}

std::pair<Eigen::Vector2cd, Eigen::Vector2cd> invariant_eigenvectors(
    double t, const InvariantTrajectory& traj) {
    const double half = 0.5 * traj.mu1(t);
    const double m2 = traj.mu2(t);
    const Complex i_phase_minus = Complex(0, 1) * std::exp(Complex(0, -m2));
    const Complex i_phase_plus = Complex(0, 1) * std::exp(Complex(0, m2));
    Eigen::Vector2cd v1, v2;
    v1 << Complex(std::cos(half), 0.0), i_phase_minus * std::sin(half);
    v2 << i_phase_plus * std::sin(half), Complex(std::cos(half), 0.0);
    return {v1, v2};
}

PhaseRates phase_rates(double t, const InvariantTrajectory& traj) {
    const double m1 = traj.mu1(t);
    const double d1 = traj.mu1_dot(t);
    const double s = std::sin(m1);
    const double half = std::sin(0.5 * m1);
    // theta2_dot = mu2_dot sin^2(mu1) / (2 cos mu1) with
    // mu2_dot = 4 eta sin^2(mu1) cos(mu1) mu1_dot: the cosine cancels.
    PhaseRates r;
    r.theta2_dot = 2.0 * traj.eta * s * s * s * s * d1;
    r.Theta2_dot = -traj.mu2_dot(t) * half * half;
    if (!std::isfinite(r.theta2_dot) || !std::isfinite(r.Theta2_dot)) {
        throw std::runtime_error("phase_rates: non-finite rate");
    }
    r.theta1_dot = -r.theta2_dot;
    r.Theta1_dot = -r.Theta2_dot;
    return r;
}

SensitivityResult sensitivity_qs(double eta, std::size_t n_points) {
    if (eta < 0.0) {
        throw std::invalid_argument("sensitivity_qs: eta must be >= 0");
    }
    SensitivityResult out;
    out.closed_form = eta == 0.0
                          ? kPi * kPi
                          : std::pow(std::sin(eta * kPi) / eta, 2);

    // |int_0^T e^{i chi} mu1_dot sin^2(mu1) dt|^2 on the unit interval,
    // composite Simpson on each half so the chi jump at T/2 is respected.
    if (n_points % 2 == 0) {
        ++n_points;
    }
    const InvariantTrajectory traj = design_trajectory(1.0, eta, kPi, 1.0, 3);
    auto integrand = [&](double t) {
        const double m1 = traj.mu1(t);
        const double s = std::sin(m1);
        return std::exp(Complex(0.0, traj.chi(t))) * (traj.mu1_dot(t) * s * s);
    };
    Complex total = 0.0;
    for (int half = 0; half < 2; ++half) {
        const double a = half == 0 ? 0.0 : 0.5;
        const double h = 0.5 / static_cast<double>(n_points - 1);
        Complex acc = integrand(a) + integrand(a + 0.5);
        for (std::size_t k = 1; k + 1 < n_points; ++k) {
            const double w = (k % 2 == 1) ? 4.0 : 2.0;
            acc += w * integrand(a + h * static_cast<double>(k));
        }
        total += acc * (h / 3.0);
    }
    out.quadrature = std::norm(total);
    return out;
}

}  // namespace rydgate
