#ifndef RYDGATE_DYNAMICS_HPP
#define RYDGATE_DYNAMICS_HPP

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "rydgate/atom_model.hpp"
#include "rydgate/operator_algebra.hpp"
#include "rydgate/pulse_design.hpp"

namespace rydgate {

/// Thrown when an integration cannot meet its accuracy contract
/// (step underflow, norm/trace drift, failed convergence certificate).
class IntegrationError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class IntegratorKind { adaptive_rk, piecewise_expm };
enum class Frame { lab, rotating, effective };

IntegratorKind parse_integrator(const std::string& name);
Frame parse_frame(const std::string& name);

struct PropagationConfig {
    IntegratorKind method = IntegratorKind::adaptive_rk;
    double rtol = 1e-9;
    double atol = 1e-12;
    double expm_step = 0.0;  // required when method == piecewise_expm
    Frame frame = Frame::lab;
    std::uint64_t seed = 0;
    std::int64_t max_steps = 50'000'000;
    bool check_hermitian = true;
};

struct IntegratorStats {
    std::int64_t steps = 0;
    std::int64_t rejected = 0;
    std::int64_t rhs_evals = 0;
};

using ControlFieldFn = std::function<FieldSample(double)>;

ControlFieldFn make_field(const InvariantTrajectory& traj);
ControlFieldFn make_field(const PulseSchedule& schedule);

/// Control fields with sample-and-hold additive white Gaussian noise.
/// With snr = +inf the realized samples equal the base bitwise.
struct NoisySchedule {
    PulseSchedule base;
    double snr = std::numeric_limits<double>::infinity();
    bool snr_is_db = true;
    std::uint64_t seed = 0;
    std::vector<double> noise_x, noise_y;      // one draw per grid point
    std::vector<double> omega_x, omega_y;      // realized samples

    /// Clean interpolated base plus the noise sample held over
    /// [t_k, t_{k+1}).
    FieldSample at(double t) const;
};

/// Noise power per quadrature = (mean power of that quadrature's clean
/// samples) * 10^(-snr/10) when snr_is_db, else / snr. Deterministic per
/// seed (Box-Muller over mt19937_64, x then y).
NoisySchedule add_awgn(const PulseSchedule& base, double snr,
                       std::uint64_t seed, bool snr_is_db = true);

/// Sample-and-hold field for a noisy schedule, with the clean part evaluated
/// analytically when a trajectory is supplied.
ControlFieldFn make_field(const NoisySchedule& noisy);
ControlFieldFn make_field(const NoisySchedule& noisy,
                          const InvariantTrajectory& clean);

/// Time-dependent Hermitian operator presented both as an accumulating
/// sparse application (for right-hand sides) and a dense assembly (for
/// exponential stepping and inspection).
struct OperatorSource {
    int dim = 0;
    /// out = H(t) * y; y and out are dim x m.
    std::function<void(double t, const Matrix& y, Matrix& out)> apply;
    std::function<void(double t, Matrix& h)> assemble;
};

/// Hamiltonian source for the chosen frame. Frame::effective embeds the
/// two-level coupling in the full 25-dim pair space.
OperatorSource make_hamiltonian_source(const ModelParams& params,
                                       ControlFieldFn field,
                                       Frame frame = Frame::lab);

/// Standalone two-level source on span{|r xi_->, |xi_+ xi_->}; epsilon is
/// the systematic field-scaling error.
OperatorSource make_effective_two_level_source(ControlFieldFn field,
                                               double epsilon = 0.0);

/// Time-independent Hermitian operator as a source.
OperatorSource make_constant_source(Matrix h);

struct StateTrace {
    std::vector<double> times;
    std::vector<Matrix> columns;  // dim x m snapshot per sample time
    IntegratorStats stats;

    const Matrix& final() const { return columns.back(); }
};

/// Propagates the columns of psi0 (dim x m) under i dpsi/dt = H(t) psi from
/// t0 to t1, recording snapshots at sample_times (which must be sorted and
/// inside [t0, t1]). breakpoints are times the integrator must not step
/// across (field discontinuities such as noise-hold boundaries).
StateTrace propagate_columns(const OperatorSource& h, const Matrix& psi0,
                             double t0, double t1,
                             std::span<const double> sample_times,
                             const PropagationConfig& config,
                             std::span<const double> breakpoints = {});

/// Single normalized state; enforces norm preservation within 1e-8.
StateTrace propagate_state(const OperatorSource& h, const Vector& psi0,
                           double t0, double t1,
                           std::span<const double> sample_times,
                           const PropagationConfig& config,
                           std::span<const double> breakpoints = {});

struct ComputationalPropagation {
    Eigen::Matrix4cd projected;  // <i|U(T)|j> on the computational subspace
    StateTrace trace;            // 25 x 4 snapshots
};

/// Propagates |00>, |01>, |10>, |11> under the full model and projects back
/// onto the computational subspace.
ComputationalPropagation propagate_computational_basis(
    const ModelParams& params, const ControlFieldFn& field,
    const PropagationConfig& config, std::span<const double> sample_times = {},
    std::span<const double> breakpoints = {});

struct DensityTrace {
    std::vector<double> times;
    std::vector<Matrix> rho;  // dim x dim snapshot per sample time
    IntegratorStats stats;

    const Matrix& final() const { return rho.back(); }
};

/// Lindblad master equation drho/dt = -i[H, rho]
/// + sum_k (L_k rho L_k^dag - {L_k^dag L_k, rho}/2). Enforces Hermiticity,
/// positivity of the input, trace preservation within 1e-7.
DensityTrace propagate_lindblad(const OperatorSource& h,
                                const std::vector<QuantumOperator>& collapse,
                                const Matrix& rho0, double t0, double t1,
                                std::span<const double> sample_times,
                                const PropagationConfig& config,
                                std::span<const double> breakpoints = {});

/// Uniform n-point sample grid over [0, T] including both endpoints.
std::vector<double> uniform_times(double T, std::size_t n);

}  // namespace rydgate

#endif
