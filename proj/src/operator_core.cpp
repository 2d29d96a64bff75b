#include "qifs/operator_core.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace qifs {

double max_hermitian_deviation(const Matrix& m) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

DensityOperator validate_density(const Matrix& m, double tol) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatchError(m.rows(), m.cols());
    }
    if (tol < 0) {
        throw Error("tolerance must be nonnegative");
    }
    const double herm = max_hermitian_deviation(m);
    if (herm > tol) {
        throw NotHermitianError(herm);
    }
    const Complex tr = m.trace();
    if (std::abs(tr - Complex(1.0, 0.0)) > tol) {
        throw TraceNotOneError(tr);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    const double lambda_min = es.eigenvalues().minCoeff();
    if (lambda_min < -tol) {
        throw NotPsdError(lambda_min);
    }
    return DensityOperator(m, tol);
}

KrausFamily make_kraus_family(std::vector<Matrix> ops, double tol) {
    if (ops.empty()) {
        throw Error("Kraus family must be nonempty");
    }
    const long n = ops.front().rows();
    for (const Matrix& v : ops) {
        if (v.rows() != n || v.cols() != n) {
            throw DimensionMismatchError(v.rows(), n);
        }
    }
    Matrix sum_vdv = Matrix::Zero(n, n);
    Matrix sum_vvd = Matrix::Zero(n, n);
    for (const Matrix& v : ops) {
        sum_vdv += v.adjoint() * v;
        sum_vvd += v * v.adjoint();
    }
    const Matrix id = Matrix::Identity(n, n);
    KrausFamily fam;
    fam.ops = std::move(ops);
    fam.normalized = (sum_vdv - id).cwiseAbs().maxCoeff() <= tol;
    fam.unital = (sum_vvd - id).cwiseAbs().maxCoeff() <= tol;
    return fam;
}

HermitianEig eig_hermitian(const Matrix& m, double tol) {
    const double herm = max_hermitian_deviation(m);
    if (herm > tol) {
        throw NotHermitianError(herm);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    if (es.info() != Eigen::Success) {
        throw Error("Hermitian eigensolver failed to converge");
    }
    return HermitianEig{es.eigenvalues(), es.eigenvectors()};
}

Matrix psd_sqrt(const Matrix& m, double tol) {
    HermitianEig eig = eig_hermitian(m, tol);
    const double lambda_min = eig.eigenvalues.minCoeff();
    if (lambda_min < -tol) {
        throw NotPsdError(lambda_min);
    }
    Eigen::VectorXd roots = eig.eigenvalues.cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors * roots.asDiagonal() * eig.eigenvectors.adjoint();
}

double distance(Metric metric, const DensityOperator& a, const DensityOperator& b) {
    if (a.dim() != b.dim()) {
        throw DimensionMismatchError(a.dim(), b.dim());
    }
    const Matrix diff = a.matrix() - b.matrix();
    switch (metric) {
        case Metric::D1: {
            const double t = (diff * diff).trace().real();
            return std::sqrt(std::max(t, 0.0));
        }
        case Metric::D2: {
            Eigen::SelfAdjointEigenSolver<Matrix> es(diff, Eigen::EigenvaluesOnly);
            return es.eigenvalues().cwiseAbs().sum();
        }
        case Metric::D3: {
            const Matrix ra = psd_sqrt(a.matrix(), a.tol());
            const Matrix inner = psd_sqrt(ra * b.matrix() * ra, a.tol());
            const double fid = inner.trace().real();
            return std::sqrt(std::max(2.0 * (1.0 - fid), 0.0));
        }
    }
    throw Error("unknown metric");
}

}  // namespace qifs
