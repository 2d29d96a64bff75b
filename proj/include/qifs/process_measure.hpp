#pragma once

#include <optional>

#include "qifs/qifs_core.hpp"

namespace qifs {

/// Finite outcome word; symbols are 1-based, matching the cylinder indices
/// x_1..x_n of the process.
using CylinderWord = std::vector<int>;

class ZeroConditioningEventError : public Error {
public:
    ZeroConditioningEventError() : Error("conditioning event has measure zero") {}
};

class EnumerationTooLargeError : public Error {
public:
    explicit EnumerationTooLargeError(double terms)
        : Error("word enumeration would need " + std::to_string(terms) +
                " terms (limit 1e6)") {}
};

class RhoNotInvariantError : public Error {
public:
    explicit RhoNotInvariantError(double gap)
        : Error("rho0 is not a Lambda fixed point (D1 gap " + std::to_string(gap) + ")") {}
};

class NormalizationViolatedError : public Error {
public:
    explicit NormalizationViolatedError(double deviation)
        : Error("sum W_i^* W_i differs from identity by " + std::to_string(deviation)) {}
};

class InvalidIndexSetError : public Error {
public:
    explicit InvalidIndexSetError(const std::string& detail)
        : Error("invalid projection index set: " + detail) {}
};

enum class ProcessKind { Homogeneous, Nonhomogeneous };

/// A quantum stochastic process: a QIFS together with the pre-measurement
/// state rho0.
struct ProcessSpec {
    QifsSystem system;
    DensityOperator rho0;
    ProcessKind kind = ProcessKind::Homogeneous;
    bool strict = true;  // enforce sum W^*W = I for nonhomogeneous measures
};

ProcessSpec make_process(QifsSystem system, DensityOperator rho0, ProcessKind kind,
                         bool strict = true);

/// Homogeneous cylinder measure
///   mu(x_1..x_n) = tr(V_{x_n} ... V_{x_1} rho0 V_{x_1}^* ... V_{x_n}^*),
/// clamped to [0, 1].
double measure_homogeneous(const ProcessSpec& spec, const CylinderWord& w);

/// Nonhomogeneous cylinder measure: the telescoping product
///   tr(W_{x_1} rho0 W_{x_1}^*) prod_{i>=2} tr(W_{x_i} R_{i-1} W_{x_i}^*) / tr(R_{i-1})
/// where R_i = V_{x_i} ... V_{x_1} rho0 V_{x_1}^* ... V_{x_i}^*. A vanishing
/// denominator falls back to the degenerate-branch convention state.
double measure_nonhomogeneous(const ProcessSpec& spec, const CylinderWord& w);

/// Dispatches on spec.kind.
double measure(const ProcessSpec& spec, const CylinderWord& w);

/// mu(w) / mu(given); `given` must be a strict prefix of w.
double conditional_prob(const ProcessSpec& spec, const CylinderWord& w,
                        const CylinderWord& given);

struct CheckReport {
    std::string check;
    bool holds = false;
    double max_gap = 0.0;
    CylinderWord witness;
    int skipped_conditions = 0;  // conditioning events below tolerance
};

/// Compares mu(X_n | X_1..X_{n-1}) with mu(X_n | X_{n-1}) over all words up
/// to `depth`; the one-step conditional marginalizes over all prefixes.
CheckReport check_markov(const ProcessSpec& spec, int depth, double tol = 1e-9);

/// Checks mu(X_1..X_n = w) = mu(X_m..X_{m+n-1} = w) for all words of length n,
/// summing over the k^{m-1} unobserved prefixes. Requires rho0 Lambda-fixed.
CheckReport check_stationarity(const ProcessSpec& spec, int m, int n, double tol = 1e-9);

/// mu_ij(n) = mu(X_{1+n} = j | X_1 = i), interior times marginalized.
/// Time origin is anchored at 1; under a Lambda-fixed rho0 the origin is
/// immaterial by stationarity.
double transition_prob(const ProcessSpec& spec, int i, int j, int n);

struct ChapmanKolmogorovReport {
    bool holds = false;
    Eigen::MatrixXd lhs;  // sum_k mu_ik(m) mu_kj(n)
    Eigen::MatrixXd rhs;  // mu_ij(m+n)
    double max_gap = 0.0;
};

/// Tests mu_ij(m+n) = sum_k mu_ik(m) mu_kj(n) for all (i, j).
ChapmanKolmogorovReport check_chapman_kolmogorov(const ProcessSpec& spec, int m, int n,
                                                 double tol = 1e-9);

/// Orthogonal projections P_i with sum P_i = I; the instrument maps
/// E -> sum_{i in E} P_i rho P_i.
struct ProjectiveInstrument {
    std::vector<Matrix> projections;
};

ProjectiveInstrument make_instrument(std::vector<Matrix> projections,
                                     double tol = kDefaultTol);

/// Joint probability that successive measurements land in the given index
/// sets: applies I(E_t) for each set in order, then takes the trace.
double instrument_fdd(const ProjectiveInstrument& instr, const DensityOperator& rho,
                      const std::vector<std::vector<int>>& sets);

/// All words of the given length over {1..k}, lexicographic. Throws
/// EnumerationTooLargeError past 1e6 words.
std::vector<CylinderWord> enumerate_words(std::size_t k, int length);

}  // namespace qifs
