#pragma once

#include "qifs/operator_core.hpp"

namespace qifs {

class DegenerateBranchError : public Error {
public:
    explicit DegenerateBranchError(std::size_t branch)
        : Error("branch " + std::to_string(branch + 1) + " is the zero operator") {}
};

class TraceCollapseError : public Error {
public:
    TraceCollapseError() : Error("channel output has vanishing trace") {}
};

class NotStochasticError : public Error {
public:
    explicit NotStochasticError(const std::string& detail)
        : Error("matrix is not stochastic: " + detail) {}
};

class NotConvergedError : public Error {
public:
    NotConvergedError(int iterations, double residual)
        : Error("iteration did not converge after " + std::to_string(iterations) +
                " steps (residual " + std::to_string(residual) + ")"),
          iterations(iterations),
          residual(residual) {}
    int iterations;
    double residual;
};

class NoUnitEigenvalueError : public Error {
public:
    explicit NoUnitEigenvalueError(double closest)
        : Error("superoperator has no eigenvalue within tolerance of 1 (closest |lambda-1| = " +
                std::to_string(closest) + ")") {}
};

/// A quantum iterated function system: branch maps F_i(rho) = V_i rho V_i^* / tr(.)
/// driven by the dynamics family, with branch weights p_i(rho) = tr(W_i rho W_i^*)
/// from the probability family. Homogeneous means W_i = V_i entrywise.
struct QifsSystem {
    KrausFamily dynamics;       // the V_i
    KrausFamily probabilities;  // the W_i
    bool homogeneous = false;
    double tol = kDefaultTol;

    long dim() const { return dynamics.dim(); }
    std::size_t branch_count() const { return dynamics.size(); }
};

/// Pairs dynamics with probabilities, checking sizes and deriving the
/// homogeneity flag by entrywise comparison.
QifsSystem make_system(KrausFamily dynamics, KrausFamily probabilities,
                       double tol = kDefaultTol);

/// Homogeneous system: W_i = V_i.
QifsSystem make_homogeneous_system(KrausFamily dynamics, double tol = kDefaultTol);

/// F_i(rho) = V_i rho V_i^* / tr(V_i rho V_i^*).  When the trace is <= tol the
/// degenerate-branch convention applies: the image of the maximally mixed state,
/// V_i V_i^* / tr(V_i V_i^*).  Throws DegenerateBranchError only for V_i = 0.
DensityOperator branch_apply(const QifsSystem& sys, std::size_t i, const DensityOperator& rho);

/// p_i(rho) = tr(W_i rho W_i^*), clamped to [0, 1] within tol.
double branch_prob(const QifsSystem& sys, std::size_t i, const DensityOperator& rho);

/// Lambda(rho) = sum_i p_i(rho) F_i(rho); in the homogeneous case this reduces
/// to sum_i V_i rho V_i^*.
DensityOperator lambda_apply(const QifsSystem& sys, const DensityOperator& rho);

struct FixedPointResult {
    DensityOperator rho;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Iterates rho <- Lambda(rho) until the D1 step drops below tol.
FixedPointResult fixed_point_iterate(const QifsSystem& sys, const DensityOperator& rho0,
                                     double tol = 1e-12, int max_iter = 10000);

struct SpectralResult {
    DensityOperator rho;
    double eigenvalue_gap = 0.0;  // distance from 1 of the nearest non-unit eigenvalue
    int multiplicity = 0;         // dimension of the eigenvalue-1 eigenspace
};

/// Builds the N^2 x N^2 superoperator of the homogeneous channel
/// rho -> sum_i V_i rho V_i^* acting on vectorized rho, and extracts a
/// fixed state from its unit-eigenvalue eigenspace (Hermitized and
/// trace-normalized). Reports the eigenspace multiplicity.
SpectralResult fixed_point_spectral(const KrausFamily& dynamics, double tol = 1e-8);

/// Superoperator matrix of rho -> sum_i V_i rho V_i^* under column-major
/// vectorization: sum_i conj(V_i) (x) V_i.
Matrix channel_superoperator(const KrausFamily& dynamics);

/// Two-branch embedding of a 2x2 column-stochastic matrix:
///   V_1 = [[sqrt(p11), sqrt(p12)], [0, 0]],  V_2 = [[0, 0], [sqrt(p21), sqrt(p22)]].
/// The weights q enter as W_i = sqrt(q_i) V_i; q = 1 gives the homogeneous system
/// whose fixed point carries the stationary vector of P on its diagonal.
QifsSystem build_classical_2map(const Eigen::Matrix2d& p_column_stochastic,
                                double q1 = 1.0, double q2 = 1.0,
                                double tol = kDefaultTol);

/// m^2 matrix-unit embedding of an m x m column-stochastic matrix:
/// V_(i,j) = sqrt(p_ij) E_ij, ordered row-major. For m = 2 this is the
/// four-map family V_1..V_4. The m > 2 case extends the same construction.
QifsSystem build_classical_diagmap(const Eigen::MatrixXd& p_column_stochastic,
                                   double tol = kDefaultTol);

/// Depolarizing channel on N = 2: branches I, sigma_1, sigma_2, sigma_3 with
/// weights (1-p, p/3, p/3, p/3) carried by W_i = sqrt(weight) U_i.
QifsSystem build_depolarizing(double p, double tol = kDefaultTol);

/// Dimension of {M : M U_i = U_i M and M U_i^* = U_i^* M for all i} as a
/// complex vector space. Equals 1 exactly when the family admits no common
/// block-diagonal structure, which forces uniqueness of the maximally mixed
/// invariant state (the criterion assumes strictly positive branch weights).
int commutant_dimension(const KrausFamily& ops, double singular_tol = 1e-8);

/// Samples state pairs and reports max over branches of
/// D1(F_i(a), F_i(b)) / D1(a, b). Advisory contraction diagnostic only;
/// hyperbolicity is not verified analytically.
double estimate_lipschitz_ratio(const QifsSystem& sys, int samples = 200,
                                std::uint64_t seed = 1);

const Matrix& pauli(int i);  // i in {1, 2, 3}

}  // namespace qifs
