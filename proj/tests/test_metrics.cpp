#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "rydgate/atom_model.hpp"
#include "rydgate/metrics.hpp"

using namespace rydgate;

TEST_CASE("average gate fidelity anchors") {
    CHECK(average_gate_fidelity(Eigen::Matrix4cd::Identity()) ==
          doctest::Approx(1.0));
    // Correctly implemented CZ referred to the CZ target: M = CZ^dag CZ = I.
    const Eigen::Matrix4cd m = cz_gate().adjoint() * cz_gate();
    CHECK(average_gate_fidelity(m) == doctest::Approx(1.0));
    CHECK(average_gate_fidelity(Eigen::Matrix4cd::Zero()) ==
          doctest::Approx(0.0));
}

TEST_CASE("average gate fidelity is global-phase invariant and peaks at I") {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        Eigen::Matrix4cd m;
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                m(i, j) = Complex(dist(rng), dist(rng));
            }
        }
        const double phase = dist(rng) * kPi;
        const Eigen::Matrix4cd rotated = std::exp(Complex(0, phase)) * m;
        CHECK(average_gate_fidelity(rotated) ==
              doctest::Approx(average_gate_fidelity(m)).epsilon(1e-12));
    }
    // For unitary M, F = 1 only at a global phase times the identity.
    Matrix gen(4, 4);
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) gen(i, j) = Complex(dist(rng), dist(rng));
    }
    gen = 0.5 * (gen + gen.adjoint().eval());
    const Eigen::Matrix4cd u = expm_skew(gen, 0.8);
    CHECK(average_gate_fidelity(u) < 1.0 - 1e-8);
    const Eigen::Matrix4cd phase_only =
        std::exp(Complex(0, 0.4)) * Eigen::Matrix4cd::Identity();
    CHECK(average_gate_fidelity(phase_only) == doctest::Approx(1.0));
}

TEST_CASE("state fidelity") {
    Vector a(3), b(3);
    a << 1, 0, 0;
    b << 0, 1, 0;
    CHECK(state_fidelity(a, a) == doctest::Approx(1.0));
    CHECK(state_fidelity(a, b) == doctest::Approx(0.0));
    const Matrix rho = 0.25 * a * a.adjoint() + 0.75 * b * b.adjoint();
    CHECK(state_fidelity(rho, b) == doctest::Approx(0.75));
}

TEST_CASE("truth table from an ideal embedded gate") {
    // Embed the CNOT permutation into a 25-dim propagator.
    Matrix u = Matrix::Identity(kPairDim, kPairDim);
    const Eigen::Matrix4cd cn = cnot_gate();
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const Vector bi = computational_ket(i);
            const Vector bj = computational_ket(j);
            u -= bi * bi.adjoint() * (i == j ? 1.0 : 0.0);
            u += cn(i, j) * bi * bj.adjoint();
        }
    }
    const TruthTable tt = truth_table(u);
    for (int in = 0; in < 4; ++in) {
        for (int out = 0; out < 4; ++out) {
            const double expected = std::norm(cn(out, in));
            CHECK(tt.populations(in, out) == doctest::Approx(expected));
        }
    }
    CHECK(tt.min_success(cn) == doctest::Approx(1.0));
    std::ostringstream csv;
    tt.write_csv(csv);
    CHECK(csv.str().rfind("input,p00,p01,p10,p11\n", 0) == 0);
}

TEST_CASE("truth table of undriven evolution is the identity table") {
    ModelParams p;
    p.T = 1.0;
    p.V = 1800.0;
    p.Delta = p.V;
    p.omega_b = 0.0;
    p.v_a = kPi / 2.0;
    p.v_b = kPi / 4.0;
    PropagationConfig cfg;
    const auto comp = propagate_computational_basis(
        p, [](double) { return FieldSample{}; }, cfg);
    const TruthTable tt = truth_table_from_columns(comp.trace.final());
    for (int in = 0; in < 4; ++in) {
        for (int out = 0; out < 4; ++out) {
            CHECK(tt.populations(in, out) ==
                  doctest::Approx(in == out ? 1.0 : 0.0).epsilon(1e-6));
        }
    }
}

TEST_CASE("accumulated phases hit the design values") {
    const InvariantTrajectory traj = design_trajectory(1.0, 1.0);
    const PhaseTrace trace = accumulated_phases(traj);
    CHECK(std::abs(trace.theta2.back()) < 1e-6);
    CHECK(trace.Theta2.back() == doctest::Approx(kPi).epsilon(1e-6));
    // Half-interval antisymmetry of the dynamic phase.
    const std::size_t mid = trace.times.size() / 2;
    CHECK(trace.times[mid] == doctest::Approx(0.5));
    const double first_half = trace.theta2[mid];
    const double second_half = trace.theta2.back() - trace.theta2[mid];
    CHECK(first_half == doctest::Approx(-second_half).epsilon(1e-6));
}

TEST_CASE("phases extracted from propagation match the closed forms") {
    const InvariantTrajectory traj = design_trajectory(1.0, 1.0);
    PropagationConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-14;
    const PhaseTrace prop = phases_from_propagation(traj, cfg);
    CHECK(std::abs(prop.theta2.back()) < 1e-6);
    CHECK(prop.Theta2.back() == doctest::Approx(kPi).epsilon(1e-6));
    const PhaseTrace closed = accumulated_phases(traj);
    CHECK(prop.Theta2.back() ==
          doctest::Approx(closed.Theta2.back()).epsilon(1e-6));
}

TEST_CASE("perturbative infidelity: zeros and sensitivity link") {
    const InvariantTrajectory opt = design_trajectory(1.0, 1.0);
    CHECK(perturbative_infidelity(opt, 0.0) == 0.0);
    CHECK(perturbative_infidelity(opt, 0.1) < 1e-8);
    CHECK_THROWS_AS((void)perturbative_infidelity(opt, 0.3),
                    std::invalid_argument);
    // (1 - P_eps)/eps^2 equals q_s for the family.
    for (double eta : {0.0, 0.5}) {
        const InvariantTrajectory traj = design_trajectory(1.0, eta);
        const double eps = 0.01;
        const double ratio = perturbative_infidelity(traj, eps) / (eps * eps);
        const double qs = sensitivity_qs(eta).closed_form;
        CHECK(std::abs(ratio - qs) < 1e-3);
    }
}

TEST_CASE("perturbative estimate tracks a direct simulation at small eps") {
    const double eta = 0.5, eps = 0.02;
    const InvariantTrajectory traj = design_trajectory(1.0, eta);
    const double predicted = perturbative_infidelity(traj, eps);
    // Direct effective-model propagation with the (1 + eps) scaling.
    const OperatorSource h =
        make_effective_two_level_source(make_field(traj), eps);
    Vector psi0(2);
    psi0 << 0.0, 1.0;
    PropagationConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-14;
    const auto clean = propagate_state(
        make_effective_two_level_source(make_field(traj)), psi0, 0.0, 1.0,
        std::vector<double>{1.0}, cfg);
    const auto scaled =
        propagate_state(h, psi0, 0.0, 1.0, std::vector<double>{1.0}, cfg);
    const double direct =
        1.0 - std::norm(clean.final().col(0).dot(scaled.final().col(0)));
    CHECK(std::abs(direct - predicted) / direct < 0.10);
}

TEST_CASE("open-system reconstruction reduces to the unitary formula") {
    // Propagate the 16 tomography inputs with gamma = 0 in the effective
    // frame and compare with the projected-propagator fidelity.
    const InvariantTrajectory traj = design_trajectory(1.0, 1.0);
    ModelParams p;
    p.T = 1.0;
    p.V = 1800.0;
    p.Delta = p.V;
    p.omega_b = 60.0;
    p.v_a = kPi / 2.0;
    p.v_b = kPi / 4.0;
    PropagationConfig cfg;
    cfg.rtol = 1e-10;
    cfg.frame = Frame::effective;
    const OperatorSource h =
        make_hamiltonian_source(p, make_field(traj), Frame::effective);

    auto final_density = [&](const Vector& psi) {
        return propagate_lindblad(h, {}, Matrix(psi * psi.adjoint()), 0.0, 1.0,
                                  std::vector<double>{1.0}, cfg)
            .final();
    };
    std::vector<Matrix> basis, pairs_re, pairs_im;
    for (int i = 0; i < 4; ++i) {
        basis.push_back(final_density(computational_ket(i)));
    }
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int i = 0; i < 4; ++i) {
        for (int j = i + 1; j < 4; ++j) {
            pairs_re.push_back(final_density(
                inv_sqrt2 * (computational_ket(i) + computational_ket(j))));
            pairs_im.push_back(final_density(
                inv_sqrt2 * (computational_ket(i) +
                             Complex(0, 1) * computational_ket(j))));
        }
    }
    const double f_open =
        average_gate_fidelity_open(basis, pairs_re, pairs_im, cnot_gate());
    const auto comp =
        propagate_computational_basis(p, make_field(traj), cfg);
    const double f_unitary = average_gate_fidelity(
        Eigen::Matrix4cd(cnot_gate().adjoint() * comp.projected));
    CHECK(f_open == doctest::Approx(f_unitary).epsilon(1e-6));
}

TEST_CASE("fidelity trace csv schema") {
    FidelityTrace trace;
    trace.times = {0.0, 0.5, 1.0};
    trace.values = {1.0, 0.4, 0.99};
    std::ostringstream os;
    trace.write_csv(os, 2.0);
    CHECK(os.str().rfind("t,average-gate\n0,1\n1,0.4\n2,0.99\n", 0) == 0);
}
