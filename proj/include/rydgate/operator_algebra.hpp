#ifndef RYDGATE_OPERATOR_ALGEBRA_HPP
#define RYDGATE_OPERATOR_ALGEBRA_HPP

#include <complex>
#include <iosfwd>
#include <string>

#include <Eigen/Dense>

namespace rydgate {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr double kDefaultTol = 1e-10;

/// Dense operator on a labeled tensor-product basis. Hermiticity/unitarity
/// are not enforced structurally; use the predicates below.
struct QuantumOperator {
    int dim = 0;
    Matrix entries;
    std::string basis_label;

    QuantumOperator() = default;
    QuantumOperator(Matrix m, std::string label);

    Complex operator()(int row, int col) const { return entries(row, col); }
};

struct QuantumState {
    int dim = 0;
    Vector amplitudes;
    std::string basis_label;

    QuantumState() = default;
    QuantumState(Vector v, std::string label);

    double norm() const { return amplitudes.norm(); }
};

/// Kronecker product; the composite basis label is "A*B".
QuantumOperator tensor(const QuantumOperator& a, const QuantumOperator& b);
QuantumState tensor(const QuantumState& a, const QuantumState& b);
Matrix kron(const Matrix& a, const Matrix& b);
Vector kron(const Vector& a, const Vector& b);

/// AB - BA. Throws on dimension or basis-label mismatch.
QuantumOperator commutator(const QuantumOperator& a, const QuantumOperator& b);

/// exp(-i s A) for Hermitian A, via eigendecomposition of the generator.
/// Throws if max|A - A^dag| exceeds tol.
QuantumOperator expm_skew(const QuantumOperator& a, double s,
                          double tol = kDefaultTol);
Matrix expm_skew(const Matrix& a, double s, double tol = kDefaultTol);

bool is_hermitian(const Matrix& m, double tol = kDefaultTol);
bool is_hermitian(const QuantumOperator& a, double tol = kDefaultTol);
bool is_unitary(const Matrix& m, double tol = kDefaultTol);
bool is_unitary(const QuantumOperator& a, double tol = kDefaultTol);
Complex trace(const QuantumOperator& a);
double frobenius_distance(const Matrix& a, const Matrix& b);
double frobenius_distance(const QuantumOperator& a, const QuantumOperator& b);

/// Plain-text dump, one entry per line "row col re im", row-major.
void dump_operator(const QuantumOperator& a, std::ostream& os);
QuantumOperator parse_operator_dump(std::istream& is, int dim,
                                    std::string basis_label);

}  // namespace rydgate

#endif
