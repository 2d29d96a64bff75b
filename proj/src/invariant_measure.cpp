#include "qifs/invariant_measure.hpp"

#include <algorithm>
#include <cmath>

#include "qifs/rng.hpp"

namespace qifs {

namespace {

// Merges atoms within dedup_tol; the merged state is the weighted mean, which
// keeps the barycenter exact.
std::vector<AtomicMeasure::Atom> merge_atoms(std::vector<AtomicMeasure::Atom> atoms,
                                             double dedup_tol) {
    std::vector<AtomicMeasure::Atom> merged;
    for (AtomicMeasure::Atom& atom : atoms) {
        if (atom.weight <= 0.0) {
            continue;
        }
        bool absorbed = false;
        for (AtomicMeasure::Atom& existing : merged) {
            if (distance(Metric::D1, existing.state, atom.state) <= dedup_tol) {
                const double total = existing.weight + atom.weight;
                Matrix mean = (existing.weight * existing.state.matrix() +
                               atom.weight * atom.state.matrix()) /
                              total;
                existing.state = validate_density(mean, 1e-7);
                existing.weight = total;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) {
            merged.push_back(std::move(atom));
        }
    }
    return merged;
}

}  // namespace

AtomicMeasure make_atomic_measure(std::vector<AtomicMeasure::Atom> atoms,
                                  double dedup_tol) {
    if (atoms.empty()) {
        throw Error("atomic measure needs at least one atom");
    }
    double total = 0.0;
    for (const auto& atom : atoms) {
        if (atom.weight <= 0.0) {
            throw Error("atom weights must be positive");
        }
        total += atom.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw Error("atom weights sum to " + std::to_string(total) + ", expected 1");
    }
    AtomicMeasure mu;
    mu.dedup_tol = dedup_tol;
    mu.atoms = merge_atoms(std::move(atoms), dedup_tol);
    return mu;
}

AtomicMeasure pushforward(const QifsSystem& sys, const AtomicMeasure& mu) {
    std::vector<AtomicMeasure::Atom> pushed;
    for (const auto& atom : mu.atoms) {
        for (std::size_t i = 0; i < sys.branch_count(); ++i) {
            const double p = branch_prob(sys, i, atom.state);
            if (p <= 0.0) {
                continue;
            }
            pushed.push_back({atom.weight * p, branch_apply(sys, i, atom.state)});
        }
    }
    if (pushed.empty()) {
        throw MassLeakError(0.0);
    }
    double total = 0.0;
    for (const auto& atom : pushed) {
        total += atom.weight;
    }
    if (sys.probabilities.normalized && std::abs(total - 1.0) > 100.0 * sys.tol) {
        throw MassLeakError(total);
    }
    for (auto& atom : pushed) {
        atom.weight /= total;
    }
    AtomicMeasure out;
    out.dedup_tol = mu.dedup_tol;
    out.atoms = merge_atoms(std::move(pushed), mu.dedup_tol);
    return out;
}

InvarianceReport check_invariance(const QifsSystem& sys, const AtomicMeasure& mu,
                                  double tol) {
    const AtomicMeasure pushed = pushforward(sys, mu);
    std::vector<double> remaining;
    remaining.reserve(pushed.atoms.size());
    for (const auto& atom : pushed.atoms) {
        remaining.push_back(atom.weight);
    }
    double gap = 0.0;
    for (const auto& atom : mu.atoms) {
        double want = atom.weight;
        for (std::size_t j = 0; j < pushed.atoms.size() && want > 0.0; ++j) {
            if (remaining[j] <= 0.0) {
                continue;
            }
            if (distance(Metric::D1, atom.state, pushed.atoms[j].state) <= mu.dedup_tol) {
                const double moved = std::min(want, remaining[j]);
                remaining[j] -= moved;
                want -= moved;
            }
        }
        gap += want;  // mass of mu with no matching pushforward atom
    }
    double unmatched = 0.0;
    for (double r : remaining) {
        unmatched += std::max(r, 0.0);
    }
    gap = std::max(gap, unmatched);
    return InvarianceReport{gap <= tol, gap};
}

DensityOperator barycenter(const AtomicMeasure& mu) {
    const long n = mu.atoms.front().state.dim();
    Matrix sum = Matrix::Zero(n, n);
    for (const auto& atom : mu.atoms) {
        sum += atom.weight * atom.state.matrix();
    }
    return validate_density(sum, 1e-9);
}

Trajectory chaos_game(const QifsSystem& sys, const DensityOperator& rho_init,
                      int steps, std::uint64_t seed) {
    if (steps < 0) {
        throw Error("steps must be >= 0");
    }
    if (!sys.probabilities.normalized) {
        throw Error("chaos game needs a normalized probability family");
    }
    Trajectory traj;
    traj.seed = seed;
    traj.generator = SplitMix64::name();
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.symbols.reserve(static_cast<std::size_t>(steps));
    traj.states.push_back(rho_init);

    SplitMix64 rng(seed);
    const std::size_t k = sys.branch_count();
    for (int t = 0; t < steps; ++t) {
        const DensityOperator& rho = traj.states.back();
        std::vector<double> probs(k);
        double sum = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            probs[i] = branch_prob(sys, i, rho);
            sum += probs[i];
        }
        if (std::abs(sum - 1.0) > 1e-6) {
            throw ProbabilityLeakError(sum, t);
        }
        const double u = rng.uniform() * sum;
        double acc = 0.0;
        std::size_t chosen = k - 1;
        for (std::size_t i = 0; i < k; ++i) {
            acc += probs[i];
            if (u < acc) {
                chosen = i;
                break;
            }
        }
        traj.symbols.push_back(static_cast<int>(chosen) + 1);
        traj.states.push_back(branch_apply(sys, chosen, rho));
    }
    return traj;
}

DensityOperator empirical_barycenter(const Trajectory& traj, int burn_in) {
    if (burn_in < 0 || static_cast<std::size_t>(burn_in) >= traj.states.size()) {
        throw EmptyWindowError();
    }
    const long n = traj.states.front().dim();
    Matrix sum = Matrix::Zero(n, n);
    long count = 0;
    for (std::size_t t = static_cast<std::size_t>(burn_in); t < traj.states.size(); ++t) {
        sum += traj.states[t].matrix();
        ++count;
    }
    return validate_density(sum / static_cast<double>(count), 1e-7);
}

}  // namespace qifs
