#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qifs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

constexpr double kDefaultTol = 1e-9;

// Base for all validation / numeric failures in the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class NotHermitianError : public Error {
public:
    explicit NotHermitianError(double deviation)
        : Error("matrix is not Hermitian (max |m_ij - conj(m_ji)| = " +
                std::to_string(deviation) + ")"),
          deviation(deviation) {}
    double deviation;
};

class NotPsdError : public Error {
public:
    explicit NotPsdError(double eigenvalue)
        : Error("matrix is not positive semidefinite (eigenvalue " +
                std::to_string(eigenvalue) + ")"),
          eigenvalue(eigenvalue) {}
    double eigenvalue;
};

class TraceNotOneError : public Error {
public:
    explicit TraceNotOneError(Complex trace)
        : Error("trace is not 1 (trace = " + std::to_string(trace.real()) +
                (trace.imag() >= 0 ? "+" : "") + std::to_string(trace.imag()) + "i)"),
          trace(trace) {}
    Complex trace;
};

class DimensionMismatchError : public Error {
public:
    DimensionMismatchError(long a, long b)
        : Error("dimension mismatch: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

/// A density operator: Hermitian, PSD, unit-trace complex matrix.
/// Construction goes through validate_density(); instances are immutable.
class DensityOperator {
public:
    const Matrix& matrix() const { return mat_; }
    long dim() const { return mat_.rows(); }
    double tol() const { return tol_; }

    friend DensityOperator validate_density(const Matrix& m, double tol);

private:
    DensityOperator(Matrix m, double tol) : mat_(std::move(m)), tol_(tol) {}
    Matrix mat_;
    double tol_;
};

/// Checks Hermiticity, positive semidefiniteness and unit trace, each within
/// tol, and wraps the matrix. Throws NotHermitianError / NotPsdError /
/// TraceNotOneError naming the violating quantity.
DensityOperator validate_density(const Matrix& m, double tol = kDefaultTol);

/// An ordered family of same-dimension Kraus operators.
struct KrausFamily {
    std::vector<Matrix> ops;
    bool normalized = false;  // sum V_i^* V_i = I within tol
    bool unital = false;      // sum V_i V_i^* = I within tol

    long dim() const { return ops.empty() ? 0 : ops.front().rows(); }
    std::size_t size() const { return ops.size(); }
};

/// Builds a KrausFamily, recomputing the normalized/unital flags.
KrausFamily make_kraus_family(std::vector<Matrix> ops, double tol = kDefaultTol);

struct HermitianEig {
    Eigen::VectorXd eigenvalues;  // ascending
    Matrix eigenvectors;          // columns, unitary
};

/// Hermitian eigendecomposition m = Q diag(lambda) Q^*, eigenvalues ascending.
HermitianEig eig_hermitian(const Matrix& m, double tol = kDefaultTol);

/// Hermitian PSD square root. Eigenvalues in [-tol, 0) are clamped to 0;
/// anything below -tol throws NotPsdError.
Matrix psd_sqrt(const Matrix& m, double tol = kDefaultTol);

enum class Metric { D1, D2, D3 };

/// State-space distances:
///   D1 = sqrt(tr[(a-b)^2])           (Frobenius)
///   D2 = tr sqrt((a-b)^2)            (trace norm)
///   D3 = sqrt(2{1 - tr[(a^{1/2} b a^{1/2})^{1/2}]})
double distance(Metric metric, const DensityOperator& a, const DensityOperator& b);

double max_hermitian_deviation(const Matrix& m);

}  // namespace qifs
