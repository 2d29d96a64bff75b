#pragma once

// Shared generators for randomized tests. Everything is seeded through
// SplitMix64 so failures reproduce exactly.

#include "qifs/invariant_measure.hpp"
#include "qifs/qifs_core.hpp"
#include "qifs/rng.hpp"

namespace qifs::testing {

inline Matrix random_complex_matrix(SplitMix64& rng, long n, double scale = 1.0) {
    Matrix m(n, n);
    for (long i = 0; i < n; ++i) {
        for (long j = 0; j < n; ++j) {
            m(i, j) = Complex(scale * (rng.uniform() - 0.5), scale * (rng.uniform() - 0.5));
        }
    }
    return m;
}

inline Matrix random_hermitian(SplitMix64& rng, long n) {
    Matrix g = random_complex_matrix(rng, n);
    return 0.5 * (g + g.adjoint());
}

inline Matrix random_psd(SplitMix64& rng, long n) {
    Matrix g = random_complex_matrix(rng, n);
    return g * g.adjoint();
}

inline DensityOperator random_density(SplitMix64& rng, long n) {
    Matrix m = random_psd(rng, n);
    m /= m.trace().real();
    return validate_density(m, 1e-9);
}

inline Eigen::MatrixXd random_column_stochastic(SplitMix64& rng, long m,
                                                double floor = 0.05) {
    Eigen::MatrixXd p(m, m);
    for (long j = 0; j < m; ++j) {
        double sum = 0.0;
        for (long i = 0; i < m; ++i) {
            p(i, j) = floor + rng.uniform();
            sum += p(i, j);
        }
        p.col(j) /= sum;
    }
    return p;
}

// Random Kraus family with sum V_i^* V_i = I: normalizes raw matrices by the
// inverse square root of their Gram sum.
inline KrausFamily random_normalized_kraus(SplitMix64& rng, long n, std::size_t k) {
    std::vector<Matrix> raw;
    raw.reserve(k);
    Matrix gram = Matrix::Zero(n, n);
    for (std::size_t i = 0; i < k; ++i) {
        raw.push_back(random_complex_matrix(rng, n));
        gram += raw.back().adjoint() * raw.back();
    }
    HermitianEig eig = eig_hermitian(gram, 1e-9);
    Matrix inv_sqrt = eig.eigenvectors *
                      eig.eigenvalues.cwiseSqrt().cwiseInverse().asDiagonal().toDenseMatrix() *
                      eig.eigenvectors.adjoint();
    for (Matrix& v : raw) {
        v = v * inv_sqrt;
    }
    return make_kraus_family(std::move(raw), 1e-9);
}

inline Eigen::VectorXd stationary_of_column_stochastic(const Eigen::MatrixXd& p) {
    // Direct linear solve of (P - I) pi = 0 with sum pi = 1.
    const long m = p.rows();
    Eigen::MatrixXd a(m + 1, m);
    a.topRows(m) = p - Eigen::MatrixXd::Identity(m, m);
    a.bottomRows(1).setOnes();
    Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
    b(m) = 1.0;
    return a.colPivHouseholderQr().solve(b);
}

}  // namespace qifs::testing
