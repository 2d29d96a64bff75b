#include "qifs/entropy_pressure.hpp"

#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <numeric>

namespace qifs {

namespace {

// Gradient descent with backtracking line search on a smooth convex function.
// Returns (iterations, final gradient infinity norm, converged).
template <typename Objective, typename Gradient>
std::array<double, 3> minimize_convex(Eigen::VectorXd& theta, Objective obj,
                                      Gradient grad, double tol, int max_iter) {
    double step = 1.0;
    double value = obj(theta);
    int it = 0;
    double gnorm = 0.0;
    for (; it < max_iter; ++it) {
        Eigen::VectorXd g = grad(theta);
        gnorm = g.lpNorm<Eigen::Infinity>();
        if (gnorm <= tol) {
            return {static_cast<double>(it), gnorm, 1.0};
        }
        const double slope = g.squaredNorm();
        double t = step;
        while (true) {
            Eigen::VectorXd candidate = theta - t * g;
            const double cand_value = obj(candidate);
            if (cand_value <= value - 1e-4 * t * slope) {
                theta = std::move(candidate);
                value = cand_value;
                step = std::min(t * 2.0, 1e6);
                break;
            }
            t *= 0.5;
            if (t < 1e-18) {
                // Step underflow: gradient is numerically flat.
                return {static_cast<double>(it), gnorm, gnorm <= 1e3 * tol ? 1.0 : 0.0};
            }
        }
    }
    return {static_cast<double>(it), gnorm, 0.0};
}

Eigen::VectorXd stationary_vector(const Eigen::MatrixXd& transition_columns) {
    // Right eigenvector of eigenvalue 1 for a column-stochastic matrix.
    Eigen::EigenSolver<Eigen::MatrixXd> es(transition_columns);
    long best = 0;
    double best_gap = std::numeric_limits<double>::infinity();
    for (long i = 0; i < es.eigenvalues().size(); ++i) {
        const double gap = std::abs(es.eigenvalues()(i) - Complex(1.0, 0.0));
        if (gap < best_gap) {
            best_gap = gap;
            best = i;
        }
    }
    if (best_gap > 1e-8) {
        throw NotStationaryError(best_gap);
    }
    Eigen::VectorXd pi = es.eigenvectors().col(best).real();
    const double sum = pi.sum();
    if (std::abs(sum) < 1e-12) {
        throw NotStationaryError(1.0);
    }
    pi /= sum;
    return pi;
}

}  // namespace

EntropyProblem make_entropy_problem(QifsSystem system, AtomicMeasure measure,
                                    double invariance_tol) {
    const InvarianceReport inv = check_invariance(system, measure, invariance_tol);
    if (!inv.invariant) {
        throw Error("measure is not pushforward-invariant (transport gap " +
                    std::to_string(inv.transport_gap) + ")");
    }
    EntropyProblem prob;
    const std::size_t k = system.branch_count();
    for (const auto& atom : measure.atoms) {
        std::vector<int> indices;
        std::vector<double> probs;
        indices.reserve(k);
        probs.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            DensityOperator image = branch_apply(system, i, atom.state);
            int found = -1;
            for (std::size_t s = 0; s < prob.image_set.size(); ++s) {
                if (distance(Metric::D1, prob.image_set[s], image) <= measure.dedup_tol) {
                    found = static_cast<int>(s);
                    break;
                }
            }
            if (found < 0) {
                found = static_cast<int>(prob.image_set.size());
                prob.image_set.push_back(std::move(image));
            }
            indices.push_back(found);
            probs.push_back(branch_prob(system, i, atom.state));
        }
        prob.image_index.push_back(std::move(indices));
        prob.weights.push_back(std::move(probs));
    }
    prob.system = std::move(system);
    prob.measure = std::move(measure);
    return prob;
}

double entropy_objective(const EntropyProblem& prob, const std::vector<double>& c) {
    if (c.size() != prob.image_set.size()) {
        throw Error("expected " + std::to_string(prob.image_set.size()) + " c values");
    }
    for (double v : c) {
        if (v <= 0.0) {
            throw NonPositiveValueError(v);
        }
    }
    double total = 0.0;
    for (std::size_t j = 0; j < prob.measure.atoms.size(); ++j) {
        double branch_sum = 0.0;
        double weighted_log = 0.0;
        for (std::size_t i = 0; i < prob.image_index[j].size(); ++i) {
            const double ci = c[static_cast<std::size_t>(prob.image_index[j][i])];
            branch_sum += ci;
            const double p = prob.weights[j][i];
            if (p > 0.0) {
                weighted_log += p * std::log(ci);
            }
        }
        total += prob.measure.atoms[j].weight * (std::log(branch_sum) - weighted_log);
    }
    return total;
}

EntropyResult entropy_atomic(const EntropyProblem& prob, double tol, int max_iter) {
    const std::size_t m = prob.image_set.size();

    auto obj = [&](const Eigen::VectorXd& theta) {
        double total = 0.0;
        for (std::size_t j = 0; j < prob.measure.atoms.size(); ++j) {
            // log-sum-exp with max shift
            double mx = -std::numeric_limits<double>::infinity();
            for (int s : prob.image_index[j]) {
                mx = std::max(mx, theta(s));
            }
            double z = 0.0;
            double linear = 0.0;
            for (std::size_t i = 0; i < prob.image_index[j].size(); ++i) {
                z += std::exp(theta(prob.image_index[j][i]) - mx);
                linear += prob.weights[j][i] * theta(prob.image_index[j][i]);
            }
            total += prob.measure.atoms[j].weight * (mx + std::log(z) - linear);
        }
        return total;
    };
    auto grad = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<long>(m));
        for (std::size_t j = 0; j < prob.measure.atoms.size(); ++j) {
            double mx = -std::numeric_limits<double>::infinity();
            for (int s : prob.image_index[j]) {
                mx = std::max(mx, theta(s));
            }
            double z = 0.0;
            for (int s : prob.image_index[j]) {
                z += std::exp(theta(s) - mx);
            }
            const double w = prob.measure.atoms[j].weight;
            for (std::size_t i = 0; i < prob.image_index[j].size(); ++i) {
                const int s = prob.image_index[j][i];
                g(s) += w * (std::exp(theta(s) - mx) / z - prob.weights[j][i]);
            }
        }
        return g;
    };

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<long>(m));
    auto [iters, gnorm, ok] = minimize_convex(theta, obj, grad, tol, max_iter);
    theta.array() -= theta.mean();  // gauge: sum(log c) = 0

    EntropyResult result;
    result.h0 = obj(theta);
    result.minimizer.resize(m);
    for (std::size_t s = 0; s < m; ++s) {
        result.minimizer[s] = std::exp(theta(static_cast<long>(s)));
    }
    result.iterations = static_cast<int>(iters);
    result.gradient_norm = gnorm;
    result.converged = ok != 0.0;
    return result;
}

ShiftEntropyProblem make_shift_problem(Eigen::MatrixXd p, Orientation orientation,
                                       double tol) {
    if (p.rows() != p.cols()) {
        throw NotStochasticError("matrix is not square");
    }
    if (p.minCoeff() < -tol) {
        throw NotStochasticError("negative entry");
    }
    const Eigen::MatrixXd columns =
        orientation == Orientation::Column ? p : Eigen::MatrixXd(p.transpose());
    for (long j = 0; j < columns.cols(); ++j) {
        if (std::abs(columns.col(j).sum() - 1.0) > std::max(tol, 1e-12)) {
            throw NotStochasticError("row/column " + std::to_string(j + 1) +
                                     " does not sum to 1");
        }
    }
    ShiftEntropyProblem prob;
    prob.pi = stationary_vector(columns);
    prob.p = std::move(p);
    prob.orientation = orientation;
    return prob;
}

double shannon_entropy(const Eigen::MatrixXd& p, const Eigen::VectorXd& pi,
                       Orientation orientation, double tol) {
    const Eigen::MatrixXd rows =
        orientation == Orientation::Row ? p : Eigen::MatrixXd(p.transpose());
    const long m = rows.rows();
    if (pi.size() != m) {
        throw DimensionMismatchError(pi.size(), m);
    }
    for (long i = 0; i < m; ++i) {
        if (std::abs(rows.row(i).sum() - 1.0) > std::max(tol, 1e-12) ||
            rows.row(i).minCoeff() < -tol) {
            throw NotStochasticError("row " + std::to_string(i + 1));
        }
    }
    const Eigen::VectorXd image = rows.transpose() * pi;
    const double stat_gap = (image - pi).cwiseAbs().maxCoeff();
    if (stat_gap > std::max(tol, 1e-9)) {
        throw NotStationaryError(stat_gap);
    }
    double h = 0.0;
    for (long i = 0; i < m; ++i) {
        for (long j = 0; j < m; ++j) {
            const double pij = rows(i, j);
            if (pij > 0.0) {
                h -= pi(i) * pij * std::log(pij);
            }
        }
    }
    return h;
}

ShiftEntropyResult shift_entropy(const ShiftEntropyProblem& prob, double tol,
                                 int max_iter) {
    // Internally row-oriented: pi P = pi with rows summing to 1.
    const Eigen::MatrixXd rows = prob.orientation == Orientation::Row
                                     ? prob.p
                                     : Eigen::MatrixXd(prob.p.transpose());
    const Eigen::VectorXd& pi = prob.pi;
    const long m = rows.rows();

    // Optimize log a over the support of P only. Entries with p_ij = 0
    // contribute 0 * log a_ij to the linear term and only inflate the
    // column sums, so the infimum sends them to 0; they are fixed at 0.
    std::vector<std::pair<long, long>> support;
    for (long i = 0; i < m; ++i) {
        for (long j = 0; j < m; ++j) {
            if (rows(i, j) > 0.0) {
                support.emplace_back(i, j);
            }
        }
    }

    auto obj = [&](const Eigen::VectorXd& theta) {
        // sum_i pi_i log(sum_l a_li) - sum_{ij} pi_i p_ij theta_ij
        Eigen::VectorXd colsum = Eigen::VectorXd::Zero(m);
        double linear = 0.0;
        for (std::size_t v = 0; v < support.size(); ++v) {
            const auto [i, j] = support[v];
            colsum(j) += std::exp(theta(static_cast<long>(v)));
            linear += pi(i) * rows(i, j) * theta(static_cast<long>(v));
        }
        double total = -linear;
        for (long i = 0; i < m; ++i) {
            total += pi(i) * std::log(colsum(i));
        }
        return total;
    };
    auto grad = [&](const Eigen::VectorXd& theta) {
        Eigen::VectorXd colsum = Eigen::VectorXd::Zero(m);
        for (std::size_t v = 0; v < support.size(); ++v) {
            colsum(support[v].second) += std::exp(theta(static_cast<long>(v)));
        }
        Eigen::VectorXd g(static_cast<long>(support.size()));
        for (std::size_t v = 0; v < support.size(); ++v) {
            const auto [i, j] = support[v];
            const double a = std::exp(theta(static_cast<long>(v)));
            g(static_cast<long>(v)) = pi(j) * a / colsum(j) - pi(i) * rows(i, j);
        }
        return g;
    };

    // Reversed-kernel warm start a_ij = pi_i p_ij / pi_j: each column of a
    // sums to 1 and the objective equals H(P) exactly.
    Eigen::VectorXd theta(static_cast<long>(support.size()));
    for (std::size_t v = 0; v < support.size(); ++v) {
        const auto [i, j] = support[v];
        theta(static_cast<long>(v)) = std::log(pi(i) * rows(i, j) / pi(j));
    }

    auto [iters, gnorm, ok] = minimize_convex(theta, obj, grad, tol, max_iter);

    ShiftEntropyResult result;
    result.h = obj(theta);
    result.minimizer = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t v = 0; v < support.size(); ++v) {
        const auto [i, j] = support[v];
        result.minimizer(i, j) = std::exp(theta(static_cast<long>(v)));
    }
    if (prob.orientation == Orientation::Column) {
        result.minimizer.transposeInPlace();
    }
    result.iterations = static_cast<int>(iters);
    result.converged = ok != 0.0;
    return result;
}

double pressure_value(const PressureProblem& prob, const EntropyProblem& eprob) {
    if (prob.temperature <= 0.0) {
        throw Error("temperature must be positive");
    }
    if (prob.hamiltonian.rows() != eprob.system.dim()) {
        throw DimensionMismatchError(prob.hamiltonian.rows(), eprob.system.dim());
    }
    const double herm = max_hermitian_deviation(prob.hamiltonian);
    if (herm > 1e-9) {
        throw NotHermitianError(herm);
    }
    const EntropyResult entropy = entropy_atomic(eprob);
    const DensityOperator rho = barycenter(eprob.measure);
    const double energy = (prob.hamiltonian * rho.matrix()).trace().real();
    return entropy.h0 - energy / prob.temperature;
}

PressureSearchResult pressure_search(const PressureProblem& prob, int grid_points) {
    if (grid_points < 2) {
        throw Error("grid needs at least 2 points");
    }
    if (prob.hamiltonian.rows() != 2) {
        throw Error("pressure search scans two-state embeddings (H must be 2x2)");
    }
    PressureSearchResult result;
    result.best_value = -std::numeric_limits<double>::infinity();
    result.grid.reserve(static_cast<std::size_t>(grid_points));
    const double step = 1.0 / (grid_points + 1);
    for (int g = 1; g <= grid_points; ++g) {
        const double pi1 = g * step;
        // P with both columns equal to pi is column-stochastic with P pi = pi.
        Eigen::MatrixXd p(2, 2);
        p << pi1, pi1, 1.0 - pi1, 1.0 - pi1;
        QifsSystem sys = build_classical_diagmap(p);
        const Matrix e11 = (Matrix(2, 2) << 1, 0, 0, 0).finished();
        const Matrix e22 = (Matrix(2, 2) << 0, 0, 0, 1).finished();
        AtomicMeasure eta = make_atomic_measure(
            {{pi1, validate_density(e11)}, {1.0 - pi1, validate_density(e22)}});
        EntropyProblem eprob = make_entropy_problem(sys, std::move(eta));
        const double value = pressure_value(prob, eprob);
        result.grid.push_back({pi1, value});
        if (value > result.best_value) {
            result.best_value = value;
            result.best_pi = Eigen::Vector2d(pi1, 1.0 - pi1);
        }
    }
    return result;
}

}  // namespace qifs
