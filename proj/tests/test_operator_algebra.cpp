#include <doctest.h>

#include <random>
#include <sstream>

#include "rydgate/operator_algebra.hpp"
#include "rydgate/pulse_design.hpp"

using namespace rydgate;

namespace {

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0, 1, 1, 0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1, 0, 0, -1;
    return m;
}

Matrix random_matrix(int dim, std::mt19937& rng) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            m(i, j) = Complex(dist(rng), dist(rng));
        }
    }
    return m;
}

Matrix random_hermitian(int dim, std::mt19937& rng) {
    const Matrix m = random_matrix(dim, rng);
    return 0.5 * (m + m.adjoint().eval());
}

/// Test-side matrix product, independent of Eigen's.
Matrix naive_product(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i) {
        for (int j = 0; j < b.cols(); ++j) {
            Complex acc = 0.0;
            for (int k = 0; k < a.cols(); ++k) acc += a(i, k) * b(k, j);
            out(i, j) = acc;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("tensor identity and eigenbasis cases") {
    const QuantumOperator i2{Matrix::Identity(2, 2), "a"};
    const QuantumOperator i2b{Matrix::Identity(2, 2), "b"};
    const QuantumOperator id4 = tensor(i2, i2b);
    CHECK(id4.dim == 4);
    CHECK(frobenius_distance(id4.entries, Matrix::Identity(4, 4)) == 0.0);
    CHECK(id4.basis_label == "a*b");

    const QuantumOperator sz{pauli_z(), "a"};
    const QuantumOperator sz_i = tensor(sz, i2b);
    Vector v01(4);
    v01 << 0, 1, 0, 0;  // |0> (x) |1>
    CHECK((sz_i.entries * v01 - v01).norm() == doctest::Approx(0.0));
}

TEST_CASE("tensor of raising operators maps |00> to |rr>") {
    // Index-arithmetic oracle: with per-atom order (|0>,|1>,|r>,|r+>,|r->)
    // and composite index 5*a + b, |00> sits at 0 and |rr> at 5*2 + 2 = 12.
    Matrix raise = Matrix::Zero(5, 5);
    raise(2, 0) = 1.0;  // |r><0|
    const QuantumOperator t =
        tensor(QuantumOperator{raise, "a"}, QuantumOperator{raise, "b"});
    Vector v00 = Vector::Zero(25);
    v00(0) = 1.0;
    const Vector mapped = t.entries * v00;
    for (int k = 0; k < 25; ++k) {
        CHECK(std::abs(mapped(k)) == doctest::Approx(k == 12 ? 1.0 : 0.0));
    }
}

TEST_CASE("commutator Pauli algebra and self-commutator") {
    const QuantumOperator sx{pauli_x(), "q"};
    const QuantumOperator sy{pauli_y(), "q"};
    const QuantumOperator sz{pauli_z(), "q"};
    const QuantumOperator c = commutator(sx, sy);
    CHECK(frobenius_distance(c.entries, Matrix(2.0 * Complex(0, 1) * sz.entries)) <
          1e-14);
    CHECK(frobenius_distance(commutator(sx, sx).entries, Matrix(Matrix::Zero(2, 2))) ==
          0.0);
}

TEST_CASE("commutator against a naive multiplication oracle") {
    std::mt19937 rng(7);
    // Forster-style exchange block in a 25-dim space.
    Matrix hf = Matrix::Zero(25, 25);
    const double v = 3.7;
    hf(12, 19) = hf(19, 12) = v / std::sqrt(2.0);
    hf(12, 23) = hf(23, 12) = v / std::sqrt(2.0);
    Matrix proj = Matrix::Zero(25, 25);
    proj(12, 12) = 1.0;  // |rr><rr|
    const QuantumOperator a{hf, "a*b"};
    const QuantumOperator b{proj, "a*b"};
    const Matrix expected = naive_product(hf, proj) - naive_product(proj, hf);
    CHECK(frobenius_distance(commutator(a, b).entries, expected) < 1e-13);
    CHECK(expected.cwiseAbs().maxCoeff() > 1.0);  // nonzero coupling block
}

TEST_CASE("commutator rejects mismatched operands") {
    const QuantumOperator a{Matrix::Identity(2, 2), "a"};
    const QuantumOperator b{Matrix::Identity(3, 3), "a"};
    const QuantumOperator c{Matrix::Identity(2, 2), "b"};
    CHECK_THROWS_AS((void)commutator(a, b), std::invalid_argument);
    CHECK_THROWS_AS((void)commutator(a, c), std::invalid_argument);
}

TEST_CASE("expm_skew diagonal, identity and rotation cases") {
    const QuantumOperator sz{pauli_z(), "q"};
    const QuantumOperator u = expm_skew(sz, kPi / 2.0);
    CHECK(std::abs(u.entries(0, 0) - std::exp(Complex(0, -kPi / 2.0))) < 1e-14);
    CHECK(std::abs(u.entries(1, 1) - std::exp(Complex(0, kPi / 2.0))) < 1e-14);
    CHECK(std::abs(u.entries(0, 1)) < 1e-15);

    std::mt19937 rng(11);
    const QuantumOperator a{random_hermitian(5, rng), "q5"};
    CHECK(frobenius_distance(expm_skew(a, 0.0).entries,
                             Matrix(Matrix::Identity(5, 5))) < 1e-14);

    // Closed-form two-level rotation: exp(-i theta sx) = cos(theta) I
    // - i sin(theta) sx, so exp(-i pi/2 sx)|0> = -i|1>.
    const QuantumOperator sx{pauli_x(), "q"};
    Vector zero(2);
    zero << 1, 0;
    const Vector rotated = expm_skew(sx, kPi / 2.0).entries * zero;
    CHECK(std::abs(rotated(0)) < 1e-14);
    CHECK(std::abs(rotated(1) - Complex(0, -1)) < 1e-14);
}

TEST_CASE("expm_skew rejects non-Hermitian generators") {
    Matrix m(2, 2);
    m << 0, 1, 0, 0;
    CHECK_THROWS_AS((void)expm_skew(QuantumOperator{m, "q"}, 1.0),
                    std::invalid_argument);
}

TEST_CASE("predicates and scalars") {
    CHECK(is_unitary(QuantumOperator{Matrix::Identity(4, 4), "c"}));
    CHECK(std::abs(trace(QuantumOperator{pauli_x(), "q"})) == 0.0);
    const QuantumOperator u{Matrix::Identity(3, 3), "q"};
    CHECK(frobenius_distance(u, u) == 0.0);
    CHECK(is_hermitian(QuantumOperator{pauli_y(), "q"}));
    Matrix skew(2, 2);
    skew << 0, 1, -1, 0;
    CHECK_FALSE(is_hermitian(skew, 1e-12));
}

TEST_CASE("operator construction rejects non-finite entries") {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS((QuantumOperator{m, "q"}), std::invalid_argument);
}

TEST_CASE("expm_skew unitarity and same-generator composition") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> sdist(-3.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        const Matrix a = random_hermitian(25, rng);
        const double s = sdist(rng);
        const double t = sdist(rng);
        const Matrix u = expm_skew(a, s);
        const Matrix gram = u * u.adjoint();
        CHECK((gram - Matrix::Identity(25, 25)).cwiseAbs().maxCoeff() < 1e-9);
        const Matrix composed = expm_skew(a, s + t);
        const Matrix stepped = expm_skew(a, s) * expm_skew(a, t);
        CHECK((composed - stepped).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("tensor mixed product and associativity") {
    std::mt19937 rng(31);
    for (int trial = 0; trial < 10; ++trial) {
        const Matrix a = random_matrix(5, rng);
        const Matrix b = random_matrix(5, rng);
        const Matrix c = random_matrix(5, rng);
        const Matrix d = random_matrix(5, rng);
        const Matrix lhs = kron(a, b) * kron(c, d);
        const Matrix rhs = kron(Matrix(a * c), Matrix(b * d));
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
        const Matrix assoc_l = kron(kron(a, b), c);
        const Matrix assoc_r = kron(a, kron(b, c));
        CHECK((assoc_l - assoc_r).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("dump format round-trips") {
    std::mt19937 rng(5);
    const QuantumOperator a{random_matrix(4, rng), "c"};
    std::stringstream buf;
    dump_operator(a, buf);
    const QuantumOperator back = parse_operator_dump(buf, 4, "c");
    CHECK(frobenius_distance(a, back) < 1e-15);
}
