#include <doctest.h>

#include <cmath>

#include "qifs/process_measure.hpp"
#include "test_support.hpp"

using namespace qifs;
using namespace qifs::testing;

namespace {

Eigen::Matrix2d example_p() {
    Eigen::Matrix2d p;
    p << 0.5, 0.25, 0.5, 0.75;
    return p;
}

DensityOperator diag_state(double a, double b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return validate_density(m);
}

ProcessSpec classical_process() {
    QifsSystem sys = build_classical_2map(example_p());
    // Stationary vector of example_p is (1/3, 2/3).
    return make_process(std::move(sys), diag_state(1.0 / 3.0, 2.0 / 3.0),
                        ProcessKind::Homogeneous);
}

}  // namespace

TEST_CASE("cylinder measures of the classical embedding match chain probabilities") {
    ProcessSpec spec = classical_process();
    // mu(i) = pi_i
    CHECK(measure(spec, {1}) == doctest::Approx(1.0 / 3.0));
    CHECK(measure(spec, {2}) == doctest::Approx(2.0 / 3.0));
    // mu(1,2) = p21 pi_1 = 0.5 / 3
    CHECK(measure(spec, {1, 2}) == doctest::Approx(1.0 / 6.0));
    // mu(2,2) = p22 pi_2
    CHECK(measure(spec, {2, 2}) == doctest::Approx(0.75 * 2.0 / 3.0));
    // Three-step word: pi_1 p21 p12
    CHECK(measure(spec, {1, 2, 1}) == doctest::Approx((1.0 / 3.0) * 0.5 * 0.25));
}

TEST_CASE("cylinder measures are additive over one-symbol extensions") {
    SplitMix64 rng(41);
    KrausFamily dyn = random_normalized_kraus(rng, 2, 3);
    ProcessSpec spec = make_process(make_homogeneous_system(dyn), random_density(rng, 2),
                                    ProcessKind::Homogeneous);
    for (const CylinderWord& w : enumerate_words(3, 3)) {
        double total = 0.0;
        for (int s = 1; s <= 3; ++s) {
            CylinderWord ext = w;
            ext.push_back(s);
            total += measure(spec, ext);
        }
        CHECK(total == doctest::Approx(measure(spec, w)).epsilon(1e-10));
    }
}

TEST_CASE("nonhomogeneous measure reduces to homogeneous when W = V") {
    SplitMix64 rng(42);
    KrausFamily dyn = random_normalized_kraus(rng, 2, 2);
    QifsSystem sys = make_system(dyn, dyn);
    DensityOperator rho = random_density(rng, 2);
    ProcessSpec homog = make_process(sys, rho, ProcessKind::Homogeneous);
    ProcessSpec nonh = make_process(sys, rho, ProcessKind::Nonhomogeneous);
    for (const CylinderWord& w : enumerate_words(2, 4)) {
        CHECK(measure(homog, w) == doctest::Approx(measure(nonh, w)).epsilon(1e-10));
    }
}

TEST_CASE("strict nonhomogeneous measure rejects non-normalized weights") {
    Matrix w1 = Matrix::Identity(2, 2) * 0.9;
    Matrix w2 = Matrix::Identity(2, 2) * 0.3;
    QifsSystem sys = make_system(make_kraus_family({w1, w2}),
                                 make_kraus_family({w1, w2}));
    ProcessSpec spec = make_process(sys, diag_state(0.5, 0.5),
                                    ProcessKind::Nonhomogeneous, true);
    CHECK_THROWS_AS(measure(spec, {1, 2}), NormalizationViolatedError);
}

TEST_CASE("conditional_prob divides by the prefix measure") {
    ProcessSpec spec = classical_process();
    // mu(X_2 = 2 | X_1 = 1) = p21 = 0.5
    CHECK(conditional_prob(spec, {1, 2}, {1}) == doctest::Approx(0.5));
    CHECK(conditional_prob(spec, {2, 1}, {2}) == doctest::Approx(0.25));
}

TEST_CASE("conditional_prob throws on zero conditioning event") {
    Eigen::Matrix2d p = Eigen::Matrix2d::Identity();
    QifsSystem sys = build_classical_2map(p);
    ProcessSpec spec = make_process(sys, diag_state(1.0, 0.0), ProcessKind::Homogeneous);
    CHECK_THROWS_AS(conditional_prob(spec, {2, 1}, {2}), ZeroConditioningEventError);
}

TEST_CASE("classical embedding passes the Markov check") {
    CheckReport report = check_markov(classical_process(), 4);
    CHECK(report.holds);
    CHECK(report.max_gap <= 1e-9);
}

TEST_CASE("a non-Markovian process fails the Markov check") {
    // V1 = diag(1, 0), V2 = diag(1, 2) at I/2. The set function here is not a
    // probability, and the conditional on a length-2 history of 2's differs
    // from the one-step conditional (65/17 vs 11/3).
    Matrix v1 = Matrix::Zero(2, 2);
    v1(0, 0) = 1.0;
    Matrix v2 = Matrix::Zero(2, 2);
    v2(0, 0) = 1.0;
    v2(1, 1) = 2.0;
    QifsSystem sys = make_homogeneous_system(make_kraus_family({v1, v2}));
    ProcessSpec spec = make_process(sys, diag_state(0.5, 0.5), ProcessKind::Homogeneous);
    CheckReport report = check_markov(spec, 3);
    CHECK_FALSE(report.holds);
    CHECK(report.max_gap > 0.1);
    CHECK_FALSE(report.witness.empty());
}

TEST_CASE("stationarity holds for the classical embedding at its fixed point") {
    CheckReport report = check_stationarity(classical_process(), 3, 2);
    CHECK(report.holds);
    CHECK(report.max_gap <= 1e-9);
}

TEST_CASE("check_stationarity rejects a non-invariant rho0") {
    QifsSystem sys = build_classical_2map(example_p());
    ProcessSpec spec = make_process(sys, diag_state(0.9, 0.1), ProcessKind::Homogeneous);
    CHECK_THROWS_AS(check_stationarity(spec, 2, 2), RhoNotInvariantError);
}

TEST_CASE("transition probabilities of the embedding equal chain powers") {
    ProcessSpec spec = classical_process();
    const Eigen::Matrix2d p = example_p();
    Eigen::Matrix2d p2 = p * p;
    for (int i = 1; i <= 2; ++i) {
        for (int j = 1; j <= 2; ++j) {
            // Column-stochastic: entry (j, i) is the i -> j step.
            CHECK(transition_prob(spec, i, j, 1) ==
                  doctest::Approx(p(j - 1, i - 1)).epsilon(1e-10));
            CHECK(transition_prob(spec, i, j, 2) ==
                  doctest::Approx(p2(j - 1, i - 1)).epsilon(1e-10));
        }
    }
}

TEST_CASE("Chapman-Kolmogorov holds for the classical embedding") {
    ChapmanKolmogorovReport report = check_chapman_kolmogorov(classical_process(), 1, 1);
    CHECK(report.holds);
    CHECK(report.max_gap <= 1e-9);
}

TEST_CASE("Chapman-Kolmogorov fails for diag(1,0), diag(1,2) at I/2") {
    Matrix v1 = Matrix::Zero(2, 2);
    v1(0, 0) = 1.0;
    Matrix v2 = Matrix::Zero(2, 2);
    v2(0, 0) = 1.0;
    v2(1, 1) = 2.0;
    QifsSystem sys = make_homogeneous_system(make_kraus_family({v1, v2}));
    ProcessSpec spec = make_process(sys, diag_state(0.5, 0.5), ProcessKind::Homogeneous);
    ChapmanKolmogorovReport report = check_chapman_kolmogorov(spec, 1, 1);
    CHECK_FALSE(report.holds);
    // sum_k mu_1k(1) mu_k1(1) = 1 + 1/5 while mu_11(2) = 2.
    CHECK(report.lhs(0, 0) == doctest::Approx(1.2).epsilon(1e-10));
    CHECK(report.rhs(0, 0) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("instrument joint distributions are consistent and monotone") {
    Matrix p1 = Matrix::Zero(2, 2);
    p1(0, 0) = 1.0;
    Matrix p2 = Matrix::Zero(2, 2);
    p2(1, 1) = 1.0;
    ProjectiveInstrument instr = make_instrument({p1, p2});
    const DensityOperator rho = diag_state(0.3, 0.7);
    CHECK(instrument_fdd(instr, rho, {{1}}) == doctest::Approx(0.3));
    CHECK(instrument_fdd(instr, rho, {{1, 2}}) == doctest::Approx(1.0));
    // Projective collapse: once in 1, stays in 1.
    CHECK(instrument_fdd(instr, rho, {{1}, {1}}) == doctest::Approx(0.3));
    CHECK(instrument_fdd(instr, rho, {{1}, {2}}) == doctest::Approx(0.0));
}

TEST_CASE("make_instrument rejects non-complete projection families") {
    Matrix p1 = Matrix::Zero(2, 2);
    p1(0, 0) = 1.0;
    CHECK_THROWS_AS(make_instrument({p1}), Error);
}

TEST_CASE("instrument_fdd rejects out-of-range index sets") {
    Matrix p1 = Matrix::Zero(2, 2);
    p1(0, 0) = 1.0;
    Matrix p2 = Matrix::Zero(2, 2);
    p2(1, 1) = 1.0;
    ProjectiveInstrument instr = make_instrument({p1, p2});
    CHECK_THROWS_AS(instrument_fdd(instr, diag_state(0.5, 0.5), {{3}}),
                    InvalidIndexSetError);
}

TEST_CASE("enumerate_words is lexicographic and guarded") {
    std::vector<CylinderWord> words = enumerate_words(2, 2);
    REQUIRE(words.size() == 4);
    CHECK(words[0] == CylinderWord{1, 1});
    CHECK(words[3] == CylinderWord{2, 2});
    CHECK_THROWS_AS(enumerate_words(10, 7), EnumerationTooLargeError);
}
