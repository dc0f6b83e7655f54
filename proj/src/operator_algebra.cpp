#include "rydgate/operator_algebra.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rydgate {

namespace {

void require_finite(const Matrix& m, const char* what) {
    if (!m.allFinite()) {
        throw std::invalid_argument(std::string(what) +
                                    ": entries contain NaN/Inf");
    }
}

}  // namespace

QuantumOperator::QuantumOperator(Matrix m, std::string label)
    : dim(static_cast<int>(m.rows())),
      entries(std::move(m)),
      basis_label(std::move(label)) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
        throw std::invalid_argument("QuantumOperator: matrix must be square");
    }
    require_finite(entries, "QuantumOperator");
}

QuantumState::QuantumState(Vector v, std::string label)
    : dim(static_cast<int>(v.size())),
      amplitudes(std::move(v)),
      basis_label(std::move(label)) {
    if (dim == 0) {
        throw std::invalid_argument("QuantumState: empty vector");
    }
    if (!amplitudes.allFinite()) {
        throw std::invalid_argument("QuantumState: amplitudes contain NaN/Inf");
    }
}

Matrix kron(const Matrix& a, const Matrix& b) {
    const Eigen::Index ar = a.rows(), ac = a.cols();
    const Eigen::Index br = b.rows(), bc = b.cols();
    Matrix out(ar * br, ac * bc);
    for (Eigen::Index i = 0; i < ar; ++i) {
        for (Eigen::Index j = 0; j < ac; ++j) {
            out.block(i * br, j * bc, br, bc) = a(i, j) * b;
        }
    }
    return out;
}

Vector kron(const Vector& a, const Vector& b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

QuantumOperator tensor(const QuantumOperator& a, const QuantumOperator& b) {
    return {kron(a.entries, b.entries), a.basis_label + "*" + b.basis_label};
}

QuantumState tensor(const QuantumState& a, const QuantumState& b) {
    return {kron(a.amplitudes, b.amplitudes),
            a.basis_label + "*" + b.basis_label};
}

QuantumOperator commutator(const QuantumOperator& a, const QuantumOperator& b) {
    if (a.dim != b.dim) {
        throw std::invalid_argument("commutator: dimension mismatch");
    }
    if (a.basis_label != b.basis_label) {
        throw std::invalid_argument("commutator: basis mismatch (" +
                                    a.basis_label + " vs " + b.basis_label +
                                    ")");
    }
    return {a.entries * b.entries - b.entries * a.entries, a.basis_label};
}

Matrix expm_skew(const Matrix& a, double s, double tol) {
    require_finite(a, "expm_skew");
    const double herm_defect =
        (a - a.adjoint().eval()).cwiseAbs().maxCoeff();
    if (herm_defect > tol) {
        std::ostringstream msg;
        msg << "expm_skew: generator not Hermitian (max|A - A^dag| = "
            << herm_defect << ")";
        throw std::invalid_argument(msg.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("expm_skew: eigendecomposition failed");
    }
    const Eigen::VectorXd& w = es.eigenvalues();
    Vector phases(w.size());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
        phases(k) = std::exp(Complex(0.0, -s * w(k)));
    }
    return es.eigenvectors() * phases.asDiagonal() *
           es.eigenvectors().adjoint();
}

QuantumOperator expm_skew(const QuantumOperator& a, double s, double tol) {
    return {expm_skew(a.entries, s, tol), a.basis_label};
}

bool is_hermitian(const Matrix& m, double tol) {
    return (m - m.adjoint().eval()).cwiseAbs().maxCoeff() <= tol;
}

bool is_hermitian(const QuantumOperator& a, double tol) {
    return is_hermitian(a.entries, tol);
}

bool is_unitary(const Matrix& m, double tol) {
    const Matrix gram = m.adjoint() * m;
    const Matrix id = Matrix::Identity(m.rows(), m.cols());
    return (gram - id).cwiseAbs().maxCoeff() <= tol;
}

bool is_unitary(const QuantumOperator& a, double tol) {
    return is_unitary(a.entries, tol);
}

Complex trace(const QuantumOperator& a) { return a.entries.trace(); }

double frobenius_distance(const Matrix& a, const Matrix& b) {
    return (a - b).norm();
}

double frobenius_distance(const QuantumOperator& a, const QuantumOperator& b) {
    return frobenius_distance(a.entries, b.entries);
}

void dump_operator(const QuantumOperator& a, std::ostream& os) {
    os.precision(17);
    for (int i = 0; i < a.dim; ++i) {
        for (int j = 0; j < a.dim; ++j) {
            const Complex z = a.entries(i, j);
            os << i << ' ' << j << ' ' << z.real() << ' ' << z.imag() << '\n';
        }
    }
}

QuantumOperator parse_operator_dump(std::istream& is, int dim,
                                    std::string basis_label) {
    Matrix m = Matrix::Zero(dim, dim);
    int i = 0, j = 0;
    double re = 0, im = 0;
    while (is >> i >> j >> re >> im) {
        if (i < 0 || i >= dim || j < 0 || j >= dim) {
            throw std::invalid_argument("parse_operator_dump: index out of range");
        }
        m(i, j) = Complex(re, im);
    }
    return {std::move(m), std::move(basis_label)};
}

}  // namespace rydgate
