#include "qifs/amplitude.hpp"

#include <algorithm>

namespace qifs {

Complex set_amplitude(const AmplitudeSpace& space, const std::set<std::string>& subset) {
    Complex total(0.0, 0.0);
    for (const std::string& point : subset) {
        auto it = space.amplitudes.find(point);
        if (it == space.amplitudes.end()) {
            throw UnknownPointError(point);
        }
        total += it->second;
    }
    return total;
}

Complex conditional_amplitude(const AmplitudeSpace& space,
                              const std::set<std::string>& b1,
                              const std::set<std::string>& b2) {
    const Complex a2 = set_amplitude(space, b2);
    if (std::abs(a2) <= space.tol) {
        return Complex(0.0, 0.0);
    }
    std::set<std::string> intersection;
    std::set_intersection(b1.begin(), b1.end(), b2.begin(), b2.end(),
                          std::inserter(intersection, intersection.begin()));
    return set_amplitude(space, intersection) / a2;
}

Matrix amplitude_power(const Matrix& transition, int n) {
    if (transition.rows() != transition.cols()) {
        throw DimensionMismatchError(transition.rows(), transition.cols());
    }
    if (n < 0) {
        throw Error("amplitude power needs n >= 0");
    }
    Matrix result = Matrix::Identity(transition.rows(), transition.cols());
    Matrix base = transition;
    int e = n;
    while (e > 0) {
        if (e & 1) {
            result = result * base;
        }
        e >>= 1;
        if (e > 0) {
            base = base * base;
        }
    }
    return result;
}

}  // namespace qifs
