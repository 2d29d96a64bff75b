#pragma once

#include "qifs/qifs_core.hpp"

namespace qifs {

class MassLeakError : public Error {
public:
    explicit MassLeakError(double mass)
        : Error("pushforward mass drifted to " + std::to_string(mass)) {}
};

class ProbabilityLeakError : public Error {
public:
    explicit ProbabilityLeakError(double sum, int step)
        : Error("branch probabilities sum to " + std::to_string(sum) + " at step " +
                std::to_string(step)) {}
};

class EmptyWindowError : public Error {
public:
    EmptyWindowError() : Error("burn-in leaves no trajectory states") {}
};

/// A finite convex combination of point masses at density operators.
/// Atoms are kept pairwise distinct under D1 > dedup_tol.
struct AtomicMeasure {
    struct Atom {
        double weight;
        DensityOperator state;
    };
    std::vector<Atom> atoms;
    double dedup_tol = 1e-8;
};

/// Normalizes weights and merges atoms within dedup_tol (weighted-mean state).
AtomicMeasure make_atomic_measure(std::vector<AtomicMeasure::Atom> atoms,
                                  double dedup_tol = 1e-8);

/// Markov-operator pushforward: sum_j sum_i w_j p_i(rho_j) delta_{F_i(rho_j)},
/// merged within dedup_tol, zero-weight branches dropped. Under normalized
/// probabilities the total mass is renormalized (drift beyond 100x tol throws).
AtomicMeasure pushforward(const QifsSystem& sys, const AtomicMeasure& mu);

struct InvarianceReport {
    bool invariant = false;
    double transport_gap = 0.0;
};

/// Greedy transport diagnostic between mu and its pushforward: atoms are
/// paired within dedup_tol and the unmatched mass plus weight mismatch is
/// reported as the gap.
InvarianceReport check_invariance(const QifsSystem& sys, const AtomicMeasure& mu,
                                  double tol = 1e-9);

/// sum_j w_j rho_j, revalidated as a density operator.
DensityOperator barycenter(const AtomicMeasure& mu);

struct Trajectory {
    std::uint64_t seed = 0;
    std::vector<DensityOperator> states;  // length steps + 1
    std::vector<int> symbols;             // 1-based, length steps
    std::string generator;                // RNG algorithm name
};

/// Chaos-game sampling of the Markov operator: at each step branch i is drawn
/// with probability p_i(rho_t) and rho_{t+1} = F_i(rho_t). Identical seeds
/// give identical trajectories.
Trajectory chaos_game(const QifsSystem& sys, const DensityOperator& rho_init,
                      int steps, std::uint64_t seed);

/// Arithmetic mean of the post-burn-in states.
DensityOperator empirical_barycenter(const Trajectory& traj, int burn_in);

}  // namespace qifs
