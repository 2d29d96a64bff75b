#include "qifs/process_measure.hpp"

#include <algorithm>
#include <cmath>

namespace qifs {

namespace {

constexpr double kEnumerationLimit = 1e6;

void check_word(const ProcessSpec& spec, const CylinderWord& w) {
    if (w.empty()) {
        throw Error("cylinder word must be nonempty");
    }
    const int k = static_cast<int>(spec.system.branch_count());
    for (int s : w) {
        if (s < 1 || s > k) {
            throw Error("symbol " + std::to_string(s) + " outside alphabet 1.." +
                        std::to_string(k));
        }
    }
}

// Clamps only floating-point noise at the boundary. Non-normalized Kraus
// families produce legitimate values outside [0, 1]; those pass through.
double clamp_prob(double p, double tol) {
    if (p >= -tol && p < 0.0) {
        return 0.0;
    }
    if (p > 1.0 && p <= 1.0 + tol) {
        return 1.0;
    }
    return p;
}

// Running product V_{x_m} ... V_{x_1} rho0 V_{x_1}^* ... V_{x_m}^*.
Matrix running_product(const ProcessSpec& spec, const CylinderWord& w) {
    Matrix r = spec.rho0.matrix();
    for (int s : w) {
        const Matrix& v = spec.system.dynamics.ops[static_cast<std::size_t>(s - 1)];
        r = v * r * v.adjoint();
    }
    return r;
}

void check_enumeration(std::size_t k, int length) {
    double total = 1.0;
    for (int i = 0; i < length; ++i) {
        total *= static_cast<double>(k);
        if (total > kEnumerationLimit) {
            throw EnumerationTooLargeError(total);
        }
    }
}

}  // namespace

ProcessSpec make_process(QifsSystem system, DensityOperator rho0, ProcessKind kind,
                         bool strict) {
    if (system.dim() != rho0.dim()) {
        throw DimensionMismatchError(system.dim(), rho0.dim());
    }
    if (kind == ProcessKind::Homogeneous && !system.homogeneous) {
        throw Error("homogeneous process requires a homogeneous system (W_i = V_i)");
    }
    return ProcessSpec{std::move(system), std::move(rho0), kind, strict};
}

double measure_homogeneous(const ProcessSpec& spec, const CylinderWord& w) {
    check_word(spec, w);
    const double mu = running_product(spec, w).trace().real();
    return clamp_prob(mu, spec.system.tol);
}

double measure_nonhomogeneous(const ProcessSpec& spec, const CylinderWord& w) {
    check_word(spec, w);
    if (spec.strict) {
        const long n = spec.system.dim();
        Matrix sum = Matrix::Zero(n, n);
        for (const Matrix& wi : spec.system.probabilities.ops) {
            sum += wi.adjoint() * wi;
        }
        const double dev = (sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
        if (dev > std::max(spec.system.tol, 1e-9)) {
            throw NormalizationViolatedError(dev);
        }
    }

    const auto& vs = spec.system.dynamics.ops;
    const auto& ws = spec.system.probabilities.ops;
    const Matrix& w1 = ws[static_cast<std::size_t>(w.front() - 1)];
    double mu = (w1 * spec.rho0.matrix() * w1.adjoint()).trace().real();

    Matrix running = spec.rho0.matrix();  // V_{x_{i-1}}..V_{x_1} rho0 ..
    for (std::size_t t = 1; t < w.size(); ++t) {
        const Matrix& v = vs[static_cast<std::size_t>(w[t - 1] - 1)];
        running = v * running * v.adjoint();
        double denom = running.trace().real();
        Matrix state;
        if (denom <= spec.system.tol) {
            // Degenerate branch convention: continue from the image of the
            // maximally mixed state under the last applied V.
            state = v * v.adjoint();
            const double tr = state.trace().real();
            if (tr <= 0.0) {
                throw DegenerateBranchError(static_cast<std::size_t>(w[t - 1] - 1));
            }
            state /= tr;
            running = state;
        } else {
            state = running / denom;
        }
        const Matrix& wt = ws[static_cast<std::size_t>(w[t] - 1)];
        mu *= (wt * state * wt.adjoint()).trace().real();
    }
    return clamp_prob(mu, spec.system.tol);
}

double measure(const ProcessSpec& spec, const CylinderWord& w) {
    return spec.kind == ProcessKind::Homogeneous ? measure_homogeneous(spec, w)
                                                 : measure_nonhomogeneous(spec, w);
}

double conditional_prob(const ProcessSpec& spec, const CylinderWord& w,
                        const CylinderWord& given) {
    if (given.size() >= w.size() ||
        !std::equal(given.begin(), given.end(), w.begin())) {
        throw Error("conditioning word must be a strict prefix");
    }
    const double denom = measure(spec, given);
    if (denom <= spec.system.tol) {
        throw ZeroConditioningEventError();
    }
    return measure(spec, w) / denom;
}

std::vector<CylinderWord> enumerate_words(std::size_t k, int length) {
    check_enumeration(k, length);
    std::vector<CylinderWord> words;
    CylinderWord current(static_cast<std::size_t>(length), 1);
    while (true) {
        words.push_back(current);
        int pos = length - 1;
        while (pos >= 0) {
            if (current[static_cast<std::size_t>(pos)] < static_cast<int>(k)) {
                ++current[static_cast<std::size_t>(pos)];
                break;
            }
            current[static_cast<std::size_t>(pos)] = 1;
            --pos;
        }
        if (pos < 0) {
            break;
        }
    }
    return words;
}

CheckReport check_markov(const ProcessSpec& spec, int depth, double tol) {
    if (depth < 3) {
        throw Error("Markov check needs depth >= 3");
    }
    const std::size_t k = spec.system.branch_count();
    check_enumeration(k, depth);

    CheckReport report{"markov", true, 0.0, {}, 0};
    for (int n = 3; n <= depth; ++n) {
        // One-step conditionals mu(X_n = b | X_{n-1} = a) at position n,
        // marginalized over all length-(n-2) prefixes.
        std::vector<std::vector<double>> joint(k + 1, std::vector<double>(k + 1, 0.0));
        std::vector<double> marginal(k + 1, 0.0);
        for (const CylinderWord& prefix : enumerate_words(k, n - 2)) {
            for (int a = 1; a <= static_cast<int>(k); ++a) {
                CylinderWord wa = prefix;
                wa.push_back(a);
                const double pa = measure(spec, wa);
                marginal[static_cast<std::size_t>(a)] += pa;
                for (int b = 1; b <= static_cast<int>(k); ++b) {
                    CylinderWord wab = wa;
                    wab.push_back(b);
                    joint[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
                        measure(spec, wab);
                }
            }
        }

        for (const CylinderWord& word : enumerate_words(k, n)) {
            CylinderWord prefix(word.begin(), word.end() - 1);
            const double mu_prefix = measure(spec, prefix);
            if (mu_prefix <= tol) {
                ++report.skipped_conditions;
                continue;
            }
            const int a = word[static_cast<std::size_t>(n - 2)];
            const int b = word.back();
            if (marginal[static_cast<std::size_t>(a)] <= tol) {
                ++report.skipped_conditions;
                continue;
            }
            const double full = measure(spec, word) / mu_prefix;
            const double one_step = joint[static_cast<std::size_t>(a)]
                                         [static_cast<std::size_t>(b)] /
                                    marginal[static_cast<std::size_t>(a)];
            const double gap = std::abs(full - one_step);
            if (gap > report.max_gap) {
                report.max_gap = gap;
                report.witness = word;
            }
        }
    }
    report.holds = report.max_gap <= tol;
    return report;
}

CheckReport check_stationarity(const ProcessSpec& spec, int m, int n, double tol) {
    if (m < 1 || n < 1) {
        throw Error("stationarity check needs m, n >= 1");
    }
    const std::size_t k = spec.system.branch_count();
    check_enumeration(k, m - 1 + n);

    const DensityOperator image = lambda_apply(spec.system, spec.rho0);
    const double inv_gap = distance(Metric::D1, image, spec.rho0);
    if (inv_gap > std::max(tol, 1e-7)) {
        throw RhoNotInvariantError(inv_gap);
    }

    CheckReport report{"stationarity", true, 0.0, {}, 0};
    for (const CylinderWord& word : enumerate_words(k, n)) {
        const double direct = measure(spec, word);
        double shifted = 0.0;
        if (m == 1) {
            shifted = direct;
        } else {
            for (const CylinderWord& prefix : enumerate_words(k, m - 1)) {
                CylinderWord full = prefix;
                full.insert(full.end(), word.begin(), word.end());
                shifted += measure(spec, full);
            }
        }
        const double gap = std::abs(direct - shifted);
        if (gap > report.max_gap) {
            report.max_gap = gap;
            report.witness = word;
        }
    }
    report.holds = report.max_gap <= tol;
    return report;
}

double transition_prob(const ProcessSpec& spec, int i, int j, int n) {
    if (n < 1) {
        throw Error("transition step count must be >= 1");
    }
    const std::size_t k = spec.system.branch_count();
    check_enumeration(k, n + 1);
    const double base = measure(spec, CylinderWord{i});
    if (base <= spec.system.tol) {
        throw ZeroConditioningEventError();
    }
    double joint = 0.0;
    if (n == 1) {
        joint = measure(spec, CylinderWord{i, j});
    } else {
        for (const CylinderWord& interior : enumerate_words(k, n - 1)) {
            CylinderWord word{i};
            word.insert(word.end(), interior.begin(), interior.end());
            word.push_back(j);
            joint += measure(spec, word);
        }
    }
    return joint / base;
}

ChapmanKolmogorovReport check_chapman_kolmogorov(const ProcessSpec& spec, int m, int n,
                                                 double tol) {
    const int k = static_cast<int>(spec.system.branch_count());
    ChapmanKolmogorovReport report;
    report.lhs = Eigen::MatrixXd::Zero(k, k);
    report.rhs = Eigen::MatrixXd::Zero(k, k);
    for (int i = 1; i <= k; ++i) {
        for (int j = 1; j <= k; ++j) {
            double sum = 0.0;
            for (int mid = 1; mid <= k; ++mid) {
                sum += transition_prob(spec, i, mid, m) * transition_prob(spec, mid, j, n);
            }
            report.lhs(i - 1, j - 1) = sum;
            report.rhs(i - 1, j - 1) = transition_prob(spec, i, j, m + n);
        }
    }
    report.max_gap = (report.lhs - report.rhs).cwiseAbs().maxCoeff();
    report.holds = report.max_gap <= tol;
    return report;
}

ProjectiveInstrument make_instrument(std::vector<Matrix> projections, double tol) {
    if (projections.empty()) {
        throw Error("instrument needs at least one projection");
    }
    const long n = projections.front().rows();
    Matrix sum = Matrix::Zero(n, n);
    for (const Matrix& p : projections) {
        if (p.rows() != n || p.cols() != n) {
            throw DimensionMismatchError(p.rows(), n);
        }
        const double herm = max_hermitian_deviation(p);
        if (herm > tol) {
            throw NotHermitianError(herm);
        }
        const double idem = (p * p - p).cwiseAbs().maxCoeff();
        if (idem > tol) {
            throw Error("projection is not idempotent (deviation " +
                        std::to_string(idem) + ")");
        }
        sum += p;
    }
    const double complete = (sum - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    if (complete > tol) {
        throw Error("projections do not sum to identity (deviation " +
                    std::to_string(complete) + ")");
    }
    return ProjectiveInstrument{std::move(projections)};
}

double instrument_fdd(const ProjectiveInstrument& instr, const DensityOperator& rho,
                      const std::vector<std::vector<int>>& sets) {
    const int count = static_cast<int>(instr.projections.size());
    Matrix state = rho.matrix();
    for (const std::vector<int>& set : sets) {
        if (set.empty()) {
            throw InvalidIndexSetError("empty set");
        }
        Matrix next = Matrix::Zero(state.rows(), state.cols());
        for (int idx : set) {
            if (idx < 1 || idx > count) {
                throw InvalidIndexSetError("index " + std::to_string(idx) +
                                           " outside 1.." + std::to_string(count));
            }
            const Matrix& p = instr.projections[static_cast<std::size_t>(idx - 1)];
            next += p * state * p;
        }
        state = std::move(next);
    }
    return std::clamp(state.trace().real(), 0.0, 1.0);
}

}  // namespace qifs
