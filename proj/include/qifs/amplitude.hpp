#pragma once

#include <map>
#include <set>

#include "qifs/operator_core.hpp"

namespace qifs {

class UnknownPointError : public Error {
public:
    explicit UnknownPointError(const std::string& point)
        : Error("unknown sample point '" + point + "'") {}
};

/// A finite quantum probability space: sample points with complex amplitudes.
/// The probability of a set B is |A(B)|^2, which is not additive over
/// disjoint sets (interference).
struct AmplitudeSpace {
    std::map<std::string, Complex> amplitudes;
    double tol = 1e-12;
};

/// A(B) = sum of amplitudes over B; A(empty) = 0.
Complex set_amplitude(const AmplitudeSpace& space, const std::set<std::string>& subset);

/// A(B1 | B2) = A(B1 and B2) / A(B2), and exactly 0 when |A(B2)| <= tol.
Complex conditional_amplitude(const AmplitudeSpace& space,
                              const std::set<std::string>& b1,
                              const std::set<std::string>& b2);

/// n-step amplitude transition matrix A_n = A^n (by repeated squaring),
/// satisfying A_{m+n} = A_m A_n; A_0 = I.
Matrix amplitude_power(const Matrix& transition, int n);

/// mu(B) = |A(B)|^2.
inline double amplitude_to_prob(Complex z) { return std::norm(z); }

}  // namespace qifs
