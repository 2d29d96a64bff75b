#include "qifs/qifs_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "qifs/rng.hpp"

namespace qifs {

namespace {

void check_branch_index(const QifsSystem& sys, std::size_t i) {
    if (i >= sys.branch_count()) {
        throw Error("branch index " + std::to_string(i + 1) + " out of range 1.." +
                    std::to_string(sys.branch_count()));
    }
}

void check_column_stochastic(const Eigen::MatrixXd& p, double tol) {
    if (p.rows() != p.cols()) {
        throw NotStochasticError("matrix is not square");
    }
    if (p.minCoeff() < -tol) {
        throw NotStochasticError("negative entry " + std::to_string(p.minCoeff()));
    }
    for (long j = 0; j < p.cols(); ++j) {
        const double s = p.col(j).sum();
        if (std::abs(s - 1.0) > std::max(tol, 1e-12)) {
            throw NotStochasticError("column " + std::to_string(j + 1) + " sums to " +
                                     std::to_string(s));
        }
    }
}

}  // namespace

QifsSystem make_system(KrausFamily dynamics, KrausFamily probabilities, double tol) {
    if (dynamics.size() != probabilities.size()) {
        throw Error("dynamics and probability families have different branch counts");
    }
    if (dynamics.dim() != probabilities.dim()) {
        throw DimensionMismatchError(dynamics.dim(), probabilities.dim());
    }
    bool homogeneous = true;
    for (std::size_t i = 0; i < dynamics.size(); ++i) {
        if ((dynamics.ops[i] - probabilities.ops[i]).cwiseAbs().maxCoeff() > tol) {
            homogeneous = false;
            break;
        }
    }
    return QifsSystem{std::move(dynamics), std::move(probabilities), homogeneous, tol};
}

QifsSystem make_homogeneous_system(KrausFamily dynamics, double tol) {
    KrausFamily probs = dynamics;
    return QifsSystem{std::move(dynamics), std::move(probs), true, tol};
}

DensityOperator branch_apply(const QifsSystem& sys, std::size_t i, const DensityOperator& rho) {
    check_branch_index(sys, i);
    const Matrix& v = sys.dynamics.ops[i];
    Matrix image = v * rho.matrix() * v.adjoint();
    double tr = image.trace().real();
    if (tr <= sys.tol) {
        // Degenerate branch: image of the maximally mixed state.
        image = v * v.adjoint();
        tr = image.trace().real();
        if (tr <= 0.0) {
            throw DegenerateBranchError(i);
        }
    }
    return validate_density(image / tr, std::max(sys.tol, 1e-9));
}

double branch_prob(const QifsSystem& sys, std::size_t i, const DensityOperator& rho) {
    check_branch_index(sys, i);
    const Matrix& w = sys.probabilities.ops[i];
    if (w.rows() != rho.dim()) {
        throw DimensionMismatchError(w.rows(), rho.dim());
    }
    const double p = (w * rho.matrix() * w.adjoint()).trace().real();
    return std::clamp(p, 0.0, 1.0);
}

DensityOperator lambda_apply(const QifsSystem& sys, const DensityOperator& rho) {
    const long n = sys.dim();
    Matrix out = Matrix::Zero(n, n);
    if (sys.homogeneous) {
        for (const Matrix& v : sys.dynamics.ops) {
            out += v * rho.matrix() * v.adjoint();
        }
    } else {
        for (std::size_t i = 0; i < sys.branch_count(); ++i) {
            const double p = branch_prob(sys, i, rho);
            if (p <= 0.0) {
                continue;
            }
            out += p * branch_apply(sys, i, rho).matrix();
        }
    }
    const double tr = out.trace().real();
    if (tr <= sys.tol) {
        throw TraceCollapseError();
    }
    double tol = sys.tol;
    if (!sys.probabilities.normalized || std::abs(tr - 1.0) > tol) {
        out /= tr;
    }
    return validate_density(out, std::max(tol, 1e-9));
}

FixedPointResult fixed_point_iterate(const QifsSystem& sys, const DensityOperator& rho0,
                                     double tol, int max_iter) {
    if (max_iter < 1) {
        throw Error("max_iter must be >= 1");
    }
    DensityOperator rho = rho0;
    double residual = 0.0;
    for (int it = 1; it <= max_iter; ++it) {
        DensityOperator next = lambda_apply(sys, rho);
        residual = distance(Metric::D1, next, rho);
        rho = std::move(next);
        if (residual <= tol) {
            return FixedPointResult{std::move(rho), it, residual, true};
        }
    }
    return FixedPointResult{std::move(rho), max_iter, residual, false};
}

Matrix channel_superoperator(const KrausFamily& dynamics) {
    const long n = dynamics.dim();
    Matrix super = Matrix::Zero(n * n, n * n);
    for (const Matrix& v : dynamics.ops) {
        // vec(V rho V^*) = (conj(V) kron V) vec(rho), column-major vec.
        const Matrix vc = v.conjugate();
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                super.block(i * n, j * n, n, n) += vc(i, j) * v;
            }
        }
    }
    return super;
}

SpectralResult fixed_point_spectral(const KrausFamily& dynamics, double tol) {
    const long n = dynamics.dim();
    const Matrix super = channel_superoperator(dynamics);
    Eigen::ComplexEigenSolver<Matrix> es(super);
    if (es.info() != Eigen::Success) {
        throw Error("superoperator eigensolver failed");
    }

    int multiplicity = 0;
    double gap = std::numeric_limits<double>::infinity();
    double closest = std::numeric_limits<double>::infinity();
    std::vector<long> unit_indices;
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        const double d = std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0));
        closest = std::min(closest, d);
        if (d <= tol) {
            ++multiplicity;
            unit_indices.push_back(i);
        } else {
            gap = std::min(gap, d);
        }
    }
    if (unit_indices.empty()) {
        throw NoUnitEigenvalueError(closest);
    }

    // Pick the unit eigenvector whose Hermitization has the largest trace
    // magnitude; eigenvectors with vanishing trace cannot be normalized.
    Matrix best = Matrix::Zero(n, n);
    double best_tr = -1.0;
    for (long idx : unit_indices) {
        Vector v = es.eigenvectors().col(idx);
        Matrix m = Eigen::Map<const Matrix>(v.data(), n, n);
        Matrix h = 0.5 * (m + m.adjoint());
        const double tr = std::abs(h.trace().real());
        if (tr > best_tr) {
            best_tr = tr;
            best = std::move(h);
        }
    }
    if (best_tr <= tol) {
        throw Error("unit eigenspace contains no trace-normalizable state");
    }
    best /= best.trace().real();

    // Floating-point residue can leave eigenvalues slightly negative; clamp
    // within a loose tolerance before validating.
    HermitianEig eig = eig_hermitian(best, 1e-7);
    if (eig.eigenvalues.minCoeff() < 0.0 && eig.eigenvalues.minCoeff() > -1e-7) {
        Eigen::VectorXd clamped = eig.eigenvalues.cwiseMax(0.0);
        best = eig.eigenvectors * clamped.asDiagonal() * eig.eigenvectors.adjoint();
        best /= best.trace().real();
    }
    DensityOperator rho = validate_density(best, 1e-7);
    return SpectralResult{std::move(rho), std::isfinite(gap) ? gap : 0.0, multiplicity};
}

QifsSystem build_classical_2map(const Eigen::Matrix2d& p, double q1, double q2, double tol) {
    check_column_stochastic(p, tol);
    Matrix v1 = Matrix::Zero(2, 2);
    Matrix v2 = Matrix::Zero(2, 2);
    v1(0, 0) = std::sqrt(p(0, 0));
    v1(0, 1) = std::sqrt(p(0, 1));
    v2(1, 0) = std::sqrt(p(1, 0));
    v2(1, 1) = std::sqrt(p(1, 1));
    KrausFamily dyn = make_kraus_family({v1, v2}, tol);
    KrausFamily prob = make_kraus_family({std::sqrt(q1) * v1, std::sqrt(q2) * v2}, tol);
    return make_system(std::move(dyn), std::move(prob), tol);
}

QifsSystem build_classical_diagmap(const Eigen::MatrixXd& p, double tol) {
    check_column_stochastic(p, tol);
    const long m = p.rows();
    std::vector<Matrix> ops;
    ops.reserve(static_cast<std::size_t>(m * m));
    for (long i = 0; i < m; ++i) {
        for (long j = 0; j < m; ++j) {
            Matrix v = Matrix::Zero(m, m);
            v(i, j) = std::sqrt(p(i, j));
            ops.push_back(std::move(v));
        }
    }
    return make_homogeneous_system(make_kraus_family(std::move(ops), tol), tol);
}

const Matrix& pauli(int i) {
    static const Matrix s1 = (Matrix(2, 2) << 0, 1, 1, 0).finished();
    static const Matrix s2 =
        (Matrix(2, 2) << 0, Complex(0, -1), Complex(0, 1), 0).finished();
    static const Matrix s3 = (Matrix(2, 2) << 1, 0, 0, -1).finished();
    switch (i) {
        case 1: return s1;
        case 2: return s2;
        case 3: return s3;
        default: throw Error("Pauli index must be 1, 2 or 3");
    }
}

QifsSystem build_depolarizing(double p, double tol) {
    if (p < 0.0 || p > 1.0) {
        throw Error("depolarizing parameter must lie in [0, 1]");
    }
    std::vector<Matrix> unitaries = {Matrix::Identity(2, 2), pauli(1), pauli(2), pauli(3)};
    const double weights[4] = {1.0 - p, p / 3.0, p / 3.0, p / 3.0};
    std::vector<Matrix> probs;
    probs.reserve(4);
    for (int i = 0; i < 4; ++i) {
        probs.push_back(std::sqrt(weights[i]) * unitaries[i]);
    }
    return make_system(make_kraus_family(std::move(unitaries), tol),
                       make_kraus_family(std::move(probs), tol), tol);
}

int commutant_dimension(const KrausFamily& ops, double singular_tol) {
    const long n = ops.dim();
    const long nn = n * n;
    // Constraints M U - U M = 0 and M U^* - U^* M = 0, vectorized column-major:
    // vec(M U) = (U^T kron I) vec(M), vec(U M) = (I kron U) vec(M).
    const long rows = 2 * nn * static_cast<long>(ops.size());
    Matrix constraints = Matrix::Zero(rows, nn);
    const Matrix id = Matrix::Identity(n, n);
    auto kron = [n](const Matrix& a, const Matrix& b) {
        Matrix out(n * n, n * n);
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                out.block(i * n, j * n, n, n) = a(i, j) * b;
            }
        }
        return out;
    };
    long r = 0;
    for (const Matrix& u : ops.ops) {
        constraints.block(r, 0, nn, nn) = kron(u.transpose(), id) - kron(id, u);
        r += nn;
        const Matrix ud = u.adjoint();
        constraints.block(r, 0, nn, nn) = kron(ud.transpose(), id) - kron(id, ud);
        r += nn;
    }
    Eigen::JacobiSVD<Matrix> svd(constraints);
    int rank = 0;
    const double scale = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
    for (long i = 0; i < svd.singularValues().size(); ++i) {
        if (svd.singularValues()(i) > singular_tol * std::max(1.0, scale)) {
            ++rank;
        }
    }
    return static_cast<int>(nn) - rank;
}

double estimate_lipschitz_ratio(const QifsSystem& sys, int samples, std::uint64_t seed) {
    const long n = sys.dim();
    SplitMix64 rng(seed);
    auto random_state = [&]() {
        Matrix g(n, n);
        for (long i = 0; i < n; ++i) {
            for (long j = 0; j < n; ++j) {
                g(i, j) = Complex(rng.uniform() - 0.5, rng.uniform() - 0.5);
            }
        }
        Matrix m = g * g.adjoint();
        m /= m.trace().real();
        return validate_density(m, 1e-9);
    };
    double worst = 0.0;
    for (int s = 0; s < samples; ++s) {
        DensityOperator a = random_state();
        DensityOperator b = random_state();
        const double base = distance(Metric::D1, a, b);
        if (base < 1e-12) {
            continue;
        }
        for (std::size_t i = 0; i < sys.branch_count(); ++i) {
            const double mapped =
                distance(Metric::D1, branch_apply(sys, i, a), branch_apply(sys, i, b));
            worst = std::max(worst, mapped / base);
        }
    }
    return worst;
}

}  // namespace qifs
