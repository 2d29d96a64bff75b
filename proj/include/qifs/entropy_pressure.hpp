#pragma once

#include "qifs/invariant_measure.hpp"

namespace qifs {

class NonPositiveValueError : public Error {
public:
    explicit NonPositiveValueError(double value)
        : Error("objective requires positive values, got " + std::to_string(value)) {}
};

class NotStationaryError : public Error {
public:
    explicit NotStationaryError(double gap)
        : Error("vector is not stationary for the chain (gap " + std::to_string(gap) + ")") {}
};

/// The finite convex reduction of the variational entropy
///   h0(nu) = inf_f integral log(sum_i f(F_i(rho)) / f(rho)) dnu(rho)
/// for an atomic pushforward-invariant nu: f only enters through its values
/// on the deduplicated set S of branch images of the atoms.
struct EntropyProblem {
    QifsSystem system;
    AtomicMeasure measure;
    std::vector<DensityOperator> image_set;      // S, deduplicated
    std::vector<std::vector<int>> image_index;   // s(i, j): [atom j][branch i] -> index in S
    std::vector<std::vector<double>> weights;    // p_i(rho_j): [atom j][branch i]
};

/// Builds the problem, checking that the measure is pushforward-invariant
/// within tol. Degenerate branch images use the qifs-core convention so the
/// image index is total.
EntropyProblem make_entropy_problem(QifsSystem system, AtomicMeasure measure,
                                    double invariance_tol = 1e-7);

/// sum_j w_j [ log(sum_i c_{s(i,j)}) - sum_i p_i(rho_j) log c_{s(i,j)} ].
/// All k branch images appear in the first sum; zero-probability branches
/// contribute nothing to the second.
double entropy_objective(const EntropyProblem& prob, const std::vector<double>& c);

struct EntropyResult {
    double h0 = 0.0;
    std::vector<double> minimizer;  // c values over the image set, gauge sum(log c) = 0
    int iterations = 0;
    double gradient_norm = 0.0;
    bool converged = false;
};

/// Minimizes the objective over theta = log c (convex: log-sum-exp minus
/// linear) by gradient descent with backtracking, gauge-fixed to sum(theta) = 0.
/// tol bounds the gradient infinity norm; below ~1e-8 the line search hits
/// the floating-point noise floor of the objective.
EntropyResult entropy_atomic(const EntropyProblem& prob, double tol = 1e-8,
                             int max_iter = 100000);

enum class Orientation { Row, Column };

/// Classical shift-space entropy problem for a stationary Markov chain (P, pi).
struct ShiftEntropyProblem {
    Eigen::MatrixXd p;
    Orientation orientation = Orientation::Row;
    Eigen::VectorXd pi;
};

ShiftEntropyProblem make_shift_problem(Eigen::MatrixXd p, Orientation orientation,
                                       double tol = 1e-9);

struct ShiftEntropyResult {
    double h = 0.0;
    Eigen::MatrixXd minimizer;  // the a_ij (zero where p has no support)
    int iterations = 0;
    bool converged = false;
};

/// Minimizes sum_i pi_i log(sum_l a_li) - sum_{i,j} pi_i p_ij log a_ij over
/// positive a supported on the chain's transitions (row orientation; mirrored
/// for column). Warm-started at the reversed kernel a_ij = pi_i p_ij / pi_j,
/// which attains the infimum H(P); for two-state chains this is a_ij = p_ji.
ShiftEntropyResult shift_entropy(const ShiftEntropyProblem& prob, double tol = 1e-8,
                                 int max_iter = 100000);

/// -sum_{i,j} pi_i p_ij log p_ij with 0 log 0 = 0 (row orientation;
/// transposed for column).
double shannon_entropy(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi,
                       Orientation orientation = Orientation::Row, double tol = 1e-9);

/// Pressure functional F0 = h0(measure) - (1/T) tr(H * barycenter(measure)).
struct PressureProblem {
    Matrix hamiltonian;
    double temperature = 1.0;
};

double pressure_value(const PressureProblem& prob, const EntropyProblem& eprob);

struct PressureSearchResult {
    Eigen::Vector2d best_pi;
    double best_value = 0.0;
    std::vector<std::array<double, 2>> grid;  // (pi_1, value) rows for plotting
};

/// Scans a grid of 2x2 column-stochastic matrices P(pi) = [pi, pi] (columns
/// both equal to pi), builds the four-map embedding with invariant measure
/// eta(pi), and maximizes F0 over the grid.
PressureSearchResult pressure_search(const PressureProblem& prob, int grid_points);

}  // namespace qifs
