#pragma once

// Hand-rolled generators for property tests. Every generator takes the engine explicitly so a
// failing case can be replayed from the seed printed by the test.

#include <cmath>
#include <random>

#include "avlab/em_fields.hpp"
#include "avlab/geometry.hpp"
#include "avlab/types.hpp"

namespace gen {

using Rng = std::mt19937_64;

inline double uniform(Rng& r, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(r); }

inline avlab::Vec vec(Rng& r, int n, double scale = 1.0) {
    avlab::Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = uniform(r, -scale, scale);
    return v;
}

// Unit future time-like vector with spatial part of size up to max_speed4 (4-velocity components).
inline avlab::Vec unit_timelike(Rng& r, int n, double max_speed4 = 5.0) {
    return avlab::HyperboloidVector::lift(vec(r, n - 1, max_speed4)).components();
}

// Future time-like vector of arbitrary positive norm.
inline avlab::Vec timelike(Rng& r, int n, double max_speed4 = 5.0) {
    return uniform(r, 0.2, 5.0) * unit_timelike(r, n, max_speed4);
}

inline avlab::FieldTensor field(Rng& r, int n, double scale = 3.0) {
    avlab::Mat M(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) M(i, j) = uniform(r, -scale, scale);
    return avlab::FieldTensor(M);
}

}  // namespace gen
