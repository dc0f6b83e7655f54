#ifndef RYDGATE_ATOM_MODEL_HPP
#define RYDGATE_ATOM_MODEL_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rydgate/operator_algebra.hpp"
#include "rydgate/pulse_design.hpp"

namespace rydgate {

inline constexpr int kAtomDim = 5;
inline constexpr int kPairDim = kAtomDim * kAtomDim;

/// Per-atom level order: |0>, |1>, |r>, |r+>, |r->.
enum class Level : int {
    ground0 = 0,
    ground1 = 1,
    ryd = 2,
    ryd_plus = 3,
    ryd_minus = 4,
};

/// Composite index: atom a is the slow index, atom b the fast one.
constexpr int pair_index(Level a, Level b) {
    return kAtomDim * static_cast<int>(a) + static_cast<int>(b);
}

inline const std::string kAtomABasis = "a";
inline const std::string kAtomBBasis = "b";
inline const std::string kPairBasis = "a*b";
inline const std::string kComputationalBasis = "comp4";
inline const std::string kEffectiveBasis = "eff2";

/// All physical knobs of the two-atom model, in mutually consistent units
/// (rates in rad/s and times in s, or the dimensionless T = 1 convention
/// where every rate is quoted as rate*T).
struct ModelParams {
    double V = 0.0;        // dipole-dipole exchange strength
    double Delta = 0.0;    // atom-b drive detuning; baseline Delta = V
    double omega_b = 0.0;  // constant field amplitude on atom b
    double v_a = 0.0;      // mixing angle, atom a (rad)
    double v_b = 0.0;      // mixing angle, atom b (rad)
    double T = 1.0;        // gate duration
    double gamma = 0.0;    // per-channel spontaneous emission rate
    double forster_defect = 0.0;     // delta between |rr> and |R>
    double dipole_deviation = 0.0;   // delta': actual interaction V + delta'
    double epsilon = 0.0;            // control-field scaling error
    std::optional<double> C3;        // dipolar coefficient
    std::optional<double> distance;  // interatomic distance; V = sqrt(2) C3/R^3

    /// Actual interaction strength including the delta' deviation.
    double interaction() const { return V + dipole_deviation; }

    /// Throws std::invalid_argument on hard errors (non-positive V, omega_b,
    /// T; negative gamma). Returns human-readable warnings when the working
    /// hierarchy V >> omega_b >> omega_a_max is violated by more than a
    /// factor-10 margin, or when Delta != V without a delta' sweep.
    std::vector<std::string> validate(double omega_a_max = 0.0) const;
};

/// V = 18000/T, Delta = V, omega_b = 600/T.
ModelParams baseline_params(double T, double v_a, double v_b);

/// Exchange strength sqrt(2) C3 / R^3 of the dipolar coupling at
/// interatomic distance R.
double interaction_from_dipole(double c3, double distance);

struct AtomLevel {
    std::string label;         // |0>, |1>, |r>, |r+>, |r->
    std::string atomic_state;  // Rubidium state name, metadata only
    bool rydberg = false;
};

struct LevelScheme {
    std::array<AtomLevel, kAtomDim> levels;
};

LevelScheme rubidium_scheme();

Vector atom_ket(Level l);
Vector pair_ket(Level a, Level b);
/// i in 0..3 -> |00>, |01>, |10>, |11> embedded in the 25-dim pair space.
Vector computational_ket(int i);

/// Single-atom dressed states for mixing angle v:
/// |xi_+> = cos v |0> + sin v |1>, |xi_-> = cos v |1> - sin v |0>.
Vector xi_plus(double v);
Vector xi_minus(double v);

/// Named two-atom states used throughout the model. All unit vectors in the
/// 25-dim pair space.
struct DressedBasis {
    double v_a = 0.0;
    double v_b = 0.0;
    Vector xi_mm, xi_mp, xi_pm, xi_pp;  // |xi_- xi_->, ..., |xi_+ xi_+>
    Vector r_xi_minus, r_xi_plus;       // |r xi_->, |r xi_+>
    Vector rr;                          // |r r>
    Vector R_sym;                       // (|r+ r-> + |r- r+>)/sqrt(2)
    Vector varpi_plus, varpi_minus;     // (|rr> +- |R>)/sqrt(2)
    Vector E_plus, E_minus;             // (|r xi_+> +- |varpi_->)/sqrt(2)
};

DressedBasis dressed_basis(double v_a, double v_b);

/// V |rr><R| + H.c. (+ defect * |R><R| when the Forster defect is nonzero).
/// Uses params.interaction() so a delta' deviation shifts the exchange
/// strength while Delta stays at the design value.
QuantumOperator forster_hamiltonian(const ModelParams& params);

/// Interaction-picture Hamiltonian H_1 + H_2 + H_F at time t. The (1+eps)
/// systematic scaling is applied to the atom-a drive.
QuantumOperator full_hamiltonian(double t, const ModelParams& params,
                                 const FieldSample& field);
QuantumOperator full_hamiltonian(double t, const ModelParams& params,
                                 const PulseSchedule& pulse);

enum class Stage {
    rotating,      // R H R^dag + i Rdot R^dag, exact
    second_order,  // resonant terms + second-order Stark/Raman terms
    diagonalized,  // exchange coupling diagonalized on |E_+->
    effective,     // selective two-level coupling |xi_+ xi_-> <-> |r xi_->
};

Stage parse_stage(const std::string& name);

QuantumOperator stage_hamiltonian(Stage stage, double t,
                                  const ModelParams& params,
                                  const FieldSample& field);

/// Frame operator R(t) = exp(i V t (|varpi_+><varpi_+| - |varpi_-><varpi_-|)).
Matrix rotating_frame_operator(double t, const ModelParams& params);

/// Two-qubit holonomic gate family in the computational basis
/// (|00>, |01>, |10>, |11>); equals I - 2 |xi_+ xi_-><xi_+ xi_-| restricted
/// to the ground manifold. Real, symmetric, unitary.
QuantumOperator target_gate(double v_a, double v_b);
Eigen::Matrix4cd target_gate_matrix(double v_a, double v_b);

Eigen::Matrix4cd cz_gate();
Eigen::Matrix4cd cnot_gate();

/// Twelve collapse operators sqrt(gamma) |j>_p <p'| (x) identity:
/// atoms p in {a, b}, Rydberg sources p' in {r, r+, r-}, ground targets
/// j in {0, 1}.
std::vector<QuantumOperator> lindblad_operators(double gamma);

}  // namespace rydgate

#endif
