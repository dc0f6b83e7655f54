#include "rydgate/atom_model.hpp"

#include <cmath>
#include <stdexcept>

namespace rydgate {

namespace {

constexpr double kSqrt2Inv = 0.70710678118654752440;

Matrix outer(const Vector& ket, const Vector& bra) {
    return ket * bra.adjoint();
}

}  // namespace

std::vector<std::string> ModelParams::validate(double omega_a_max) const {
    if (V <= 0.0) {
        throw std::invalid_argument("ModelParams: V must be positive");
    }
    if (omega_b <= 0.0) {
        throw std::invalid_argument("ModelParams: omega_b must be positive");
    }
    if (T <= 0.0) {
        throw std::invalid_argument("ModelParams: T must be positive");
    }
    if (gamma < 0.0) {
        throw std::invalid_argument("ModelParams: gamma must be >= 0");
    }
    std::vector<std::string> warnings;
    if (V < 10.0 * omega_b) {
        warnings.push_back("hierarchy V >> omega_b violated: V/omega_b = " +
                           std::to_string(V / omega_b));
    }
    if (omega_a_max > 0.0 && omega_b < 10.0 * omega_a_max) {
        warnings.push_back(
            "hierarchy omega_b >> omega_a violated: omega_b/omega_a_max = " +
            std::to_string(omega_b / omega_a_max));
    }
    if (dipole_deviation == 0.0 && Delta != V) {
        warnings.push_back("baseline condition Delta = V not met");
    }
    return warnings;
}

ModelParams baseline_params(double T, double v_a, double v_b) {
    ModelParams p;
    p.T = T;
    p.V = 18000.0 / T;
    p.Delta = p.V;
    p.omega_b = 600.0 / T;
    p.v_a = v_a;
    p.v_b = v_b;
    return p;
}

double interaction_from_dipole(double c3, double distance) {
    if (distance <= 0.0) {
        throw std::invalid_argument(
            "interaction_from_dipole: distance must be positive");
    }
    return std::sqrt(2.0) * c3 / (distance * distance * distance);
}

LevelScheme rubidium_scheme() {
    return {{{
        {"|0>", "5S1/2, F=1, mF=0", false},
        {"|1>", "5S1/2, F=2, mF=0", false},
        {"|r>", "59D3/2, mj=3/2", true},
        {"|r+>", "61P1/2, mj=1/2", true},
        {"|r->", "57F5/2, mj=5/2", true},
    }}};
}

Vector atom_ket(Level l) {
    Vector v = Vector::Zero(kAtomDim);
    v(static_cast<int>(l)) = 1.0;
    return v;
}

Vector pair_ket(Level a, Level b) {
    Vector v = Vector::Zero(kPairDim);
    v(pair_index(a, b)) = 1.0;
    return v;
}

Vector computational_ket(int i) {
    if (i < 0 || i > 3) {
        throw std::invalid_argument("computational_ket: index must be 0..3");
    }
    const Level a = (i & 2) ? Level::ground1 : Level::ground0;
    const Level b = (i & 1) ? Level::ground1 : Level::ground0;
    return pair_ket(a, b);
}

Vector xi_plus(double v) {
    Vector k = Vector::Zero(kAtomDim);
    k(0) = std::cos(v);
    k(1) = std::sin(v);
    return k;
}

Vector xi_minus(double v) {
    Vector k = Vector::Zero(kAtomDim);
    k(0) = -std::sin(v);
    k(1) = std::cos(v);
    return k;
}

DressedBasis dressed_basis(double v_a, double v_b) {
    DressedBasis d;
    d.v_a = v_a;
    d.v_b = v_b;
    const Vector xpa = xi_plus(v_a), xma = xi_minus(v_a);
    const Vector xpb = xi_plus(v_b), xmb = xi_minus(v_b);
    const Vector r = atom_ket(Level::ryd);
    d.xi_mm = kron(xma, xmb);
    d.xi_mp = kron(xma, xpb);
    d.xi_pm = kron(xpa, xmb);
    d.xi_pp = kron(xpa, xpb);
    d.r_xi_minus = kron(r, xmb);
    d.r_xi_plus = kron(r, xpb);
    d.rr = pair_ket(Level::ryd, Level::ryd);
    d.R_sym = kSqrt2Inv * (pair_ket(Level::ryd_plus, Level::ryd_minus) +
                           pair_ket(Level::ryd_minus, Level::ryd_plus));
    d.varpi_plus = kSqrt2Inv * (d.rr + d.R_sym);
    d.varpi_minus = kSqrt2Inv * (d.rr - d.R_sym);
    d.E_plus = kSqrt2Inv * (d.r_xi_plus + d.varpi_minus);
    d.E_minus = kSqrt2Inv * (d.r_xi_plus - d.varpi_minus);
    return d;
}

QuantumOperator forster_hamiltonian(const ModelParams& params) {
    const DressedBasis d = dressed_basis(params.v_a, params.v_b);
    Matrix h = params.interaction() *
               (outer(d.rr, d.R_sym) + outer(d.R_sym, d.rr));
    if (params.forster_defect != 0.0) {
        h += params.forster_defect * outer(d.R_sym, d.R_sym);
    }
    return {std::move(h), kPairBasis};
}

QuantumOperator full_hamiltonian(double t, const ModelParams& params,
                                 const FieldSample& field) {
    if (t < 0.0 || t > params.T) {
        throw std::domain_error("full_hamiltonian: t outside [0, T]");
    }
    const double omega_a = (1.0 + params.epsilon) * field.omega_a();
    const double phi = field.phi_a();

    // H_1: resonant drive on atom a, |xi_+>_a <r| with amplitude
    // omega_a e^{i phi}, identity on atom b.
    const Vector xpa = xi_plus(params.v_a);
    const Vector ra = atom_ket(Level::ryd);
    Matrix h1a = omega_a * std::exp(Complex(0, phi)) * outer(xpa, ra);
    h1a += h1a.adjoint().eval();

    // H_2: detuned constant drives on atom b,
    // omega_b e^{-i Delta t} |r+>_b <xi_+| + omega_b e^{+i Delta t} |r>_b <xi_+| + H.c.
    const Vector xpb = xi_plus(params.v_b);
    Matrix h2b =
        params.omega_b * std::exp(Complex(0, -params.Delta * t)) *
            outer(atom_ket(Level::ryd_plus), xpb) +
        params.omega_b * std::exp(Complex(0, params.Delta * t)) *
            outer(atom_ket(Level::ryd), xpb);
    h2b += h2b.adjoint().eval();

    const Matrix id = Matrix::Identity(kAtomDim, kAtomDim);
    Matrix h = kron(h1a, id) + kron(id, h2b) +
               forster_hamiltonian(params).entries;
    return {std::move(h), kPairBasis};
}

QuantumOperator full_hamiltonian(double t, const ModelParams& params,
                                 const PulseSchedule& pulse) {
    return full_hamiltonian(t, params, pulse.at(t));
}

Stage parse_stage(const std::string& name) {
    if (name == "rotating") return Stage::rotating;
    if (name == "second_order") return Stage::second_order;
    if (name == "diagonalized") return Stage::diagonalized;
    if (name == "effective") return Stage::effective;
    throw std::invalid_argument("unknown stage tag: " + name);
}

Matrix rotating_frame_operator(double t, const ModelParams& params) {
    const DressedBasis d = dressed_basis(params.v_a, params.v_b);
    const Matrix pp = outer(d.varpi_plus, d.varpi_plus);
    const Matrix pm = outer(d.varpi_minus, d.varpi_minus);
    const double phase = params.interaction() * t;
    return Matrix::Identity(kPairDim, kPairDim) +
           (std::exp(Complex(0, phase)) - 1.0) * pp +
           (std::exp(Complex(0, -phase)) - 1.0) * pm;
}

namespace {

void require_baseline_detuning(const ModelParams& params, const char* stage) {
    if (std::abs(params.Delta - params.V) >
        1e-9 * std::max(1.0, std::abs(params.V))) {
        throw std::invalid_argument(std::string("stage_hamiltonian(") + stage +
                                    "): requires the baseline condition "
                                    "Delta = V");
    }
}

}  // namespace

QuantumOperator stage_hamiltonian(Stage stage, double t,
                                  const ModelParams& params,
                                  const FieldSample& field) {
    const DressedBasis d = dressed_basis(params.v_a, params.v_b);
    const double omega_a = (1.0 + params.epsilon) * field.omega_a();
    const Complex drive = omega_a * std::exp(Complex(0, field.phi_a()));
    const double ob = params.omega_b;
    const double delta = params.Delta;

    switch (stage) {
        case Stage::rotating: {
            // Exact transform: R H R^dag + i Rdot R^dag with
            // i Rdot R^dag = -V (|varpi_+><varpi_+| - |varpi_-><varpi_-|).
            const Matrix r = rotating_frame_operator(t, params);
            const Matrix h = full_hamiltonian(t, params, field).entries;
            Matrix out = r * h * r.adjoint();
            out -= params.interaction() *
                   (outer(d.varpi_plus, d.varpi_plus) -
                    outer(d.varpi_minus, d.varpi_minus));
            return {std::move(out), kPairBasis};
        }
        case Stage::second_order: {
            require_baseline_detuning(params, "second_order");
            const Vector r_xm = d.r_xi_minus;
            const Vector r_xp = d.r_xi_plus;
            // Resonant part.
            Matrix h = drive * (outer(d.xi_pm, r_xm) + outer(d.xi_pp, r_xp) +
                                outer(kron(xi_plus(params.v_a),
                                           atom_ket(Level::ryd_plus)),
                                      pair_ket(Level::ryd, Level::ryd_plus)));
            h += (ob * kSqrt2Inv) * outer(r_xp, d.varpi_minus);
            h += h.adjoint().eval();
            // Stark shifts of the detuned drives.
            const Vector xm_r = kron(xi_minus(params.v_a), atom_ket(Level::ryd));
            const Vector xp_r = kron(xi_plus(params.v_a), atom_ket(Level::ryd));
            const Vector xm_rp =
                kron(xi_minus(params.v_a), atom_ket(Level::ryd_plus));
            const Vector xp_rp =
                kron(xi_plus(params.v_a), atom_ket(Level::ryd_plus));
            const Vector rrp = pair_ket(Level::ryd, Level::ryd_plus);
            const double ob2 = ob * ob / delta;
            h += ob2 * (outer(xm_r, xm_r) + 2.0 * outer(xp_r, xp_r) -
                        outer(xm_rp, xm_rp) - outer(xp_rp, xp_rp) +
                        outer(r_xp, r_xp) - outer(rrp, rrp));
            h += (ob * ob / (4.0 * delta)) *
                 (outer(d.varpi_plus, d.varpi_plus) - outer(r_xp, r_xp));
            h += (omega_a * omega_a / (2.0 * delta)) *
                 (outer(d.varpi_plus, d.varpi_plus) -
                  outer(d.varpi_minus, d.varpi_minus));
            // Second-order Raman transition |xi_+ xi_+> <-> |varpi_->.
            Matrix raman = (-ob * drive * kSqrt2Inv / delta) *
                           outer(d.varpi_minus, d.xi_pp);
            h += raman + raman.adjoint().eval();
            return {std::move(h), kPairBasis};
        }
        case Stage::diagonalized: {
            require_baseline_detuning(params, "diagonalized");
            const Vector e_sum = d.E_plus + d.E_minus;
            Matrix h = (3.0 * ob * ob / (8.0 * delta)) * outer(e_sum, e_sum);
            Matrix drive_part =
                drive * (outer(d.xi_pm, d.r_xi_minus) +
                         kSqrt2Inv * outer(d.xi_pp, e_sum));
            h += drive_part + drive_part.adjoint().eval();
            h += (ob * kSqrt2Inv) * (outer(d.E_plus, d.E_plus) -
                                     outer(d.E_minus, d.E_minus));
            return {std::move(h), kPairBasis};
        }
        case Stage::effective: {
            require_baseline_detuning(params, "effective");
            Matrix h = drive * outer(d.xi_pm, d.r_xi_minus);
            h += h.adjoint().eval();
            return {std::move(h), kPairBasis};
        }
    }
    throw std::invalid_argument("stage_hamiltonian: unknown stage");
}

Eigen::Matrix4cd target_gate_matrix(double v_a, double v_b) {
    const double s2a = std::sin(2.0 * v_a);
    const double s2b = std::sin(2.0 * v_b);
    const double c2b = std::cos(2.0 * v_b);
    const double sa2 = std::sin(v_a) * std::sin(v_a);
    const double ca2 = std::cos(v_a) * std::cos(v_a);
    const double sb2 = std::sin(v_b) * std::sin(v_b);
    const double cb2 = std::cos(v_b) * std::cos(v_b);
    Eigen::Matrix4d m;
    m(0, 0) = sa2 + ca2 * c2b;
    m(0, 1) = ca2 * s2b;
    m(0, 2) = -s2a * sb2;
    m(0, 3) = 0.5 * s2a * s2b;
    m(1, 0) = m(0, 1);
    m(1, 1) = sa2 - ca2 * c2b;
    m(1, 2) = 0.5 * s2a * s2b;
    m(1, 3) = -s2a * cb2;
    m(2, 0) = m(0, 2);
    m(2, 1) = m(1, 2);
    m(2, 2) = ca2 + sa2 * c2b;
    m(2, 3) = sa2 * s2b;
    m(3, 0) = m(0, 3);
    m(3, 1) = m(1, 3);
    m(3, 2) = m(2, 3);
    m(3, 3) = ca2 - sa2 * c2b;
    return m.cast<Complex>();
}

QuantumOperator target_gate(double v_a, double v_b) {
    return {Matrix(target_gate_matrix(v_a, v_b)), kComputationalBasis};
}

Eigen::Matrix4cd cz_gate() { return target_gate_matrix(kPi / 2.0, kPi); }

Eigen::Matrix4cd cnot_gate() {
    return target_gate_matrix(kPi / 2.0, kPi / 4.0);
}

std::vector<QuantumOperator> lindblad_operators(double gamma) {
    if (gamma < 0.0) {
        throw std::invalid_argument("lindblad_operators: gamma must be >= 0");
    }
    const double amp = std::sqrt(gamma);
    const Matrix id = Matrix::Identity(kAtomDim, kAtomDim);
    std::vector<QuantumOperator> ops;
    ops.reserve(12);
    for (int atom = 0; atom < 2; ++atom) {
        for (Level src : {Level::ryd, Level::ryd_plus, Level::ryd_minus}) {
            for (Level dst : {Level::ground0, Level::ground1}) {
                const Matrix jump =
                    amp * outer(atom_ket(dst), atom_ket(src));
                Matrix full = atom == 0 ? kron(jump, id) : kron(id, jump);
                ops.emplace_back(std::move(full), kPairBasis);
            }
        }
    }
    return ops;
}

}  // namespace rydgate
