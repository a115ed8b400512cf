#pragma once

#include "avlab/connection_coeffs.hpp"
#include "avlab/types.hpp"

namespace avlab {

// Signature (+,-,...,-).
Mat minkowski_metric(int n);
double minkowski_inner(const Vec& a, const Vec& b);
// η_ij a^j
Vec lower_index(const Vec& a);

// Point on the unit future hyperboloid, stored through its spatial part.
class HyperboloidVector {
public:
    static HyperboloidVector lift(const Vec& spatial);
    // Projects a future time-like vector onto Σ (rescale by 1/sqrt(η(y,y))).
    static HyperboloidVector normalize(const Vec& y);

    const Vec& components() const { return y_; }
    Vec spatial() const { return y_.tail(y_.size() - 1); }
    double gamma() const { return y_(0); }
    int dim() const { return static_cast<int>(y_.size()); }

private:
    explicit HyperboloidVector(Vec y) : y_(std::move(y)) {}
    Vec y_;
};

inline HyperboloidVector hyperboloid_lift(const Vec& spatial) { return HyperboloidVector::lift(spatial); }

// dvol = (1/y⁰) dy¹...dy^{n-1} on Σ for the flat metric.
double fiber_volume_weight(const HyperboloidVector& y);

// η̄(a,b) = −η(a,b) + 2η(a,U)η(b,U)
class EtaBar {
public:
    explicit EtaBar(Vec U);
    double inner(const Vec& a, const Vec& b) const;
    double norm(const Vec& a) const;
    Mat matrix() const;
    const Vec& frame() const { return U_; }

private:
    Vec U_;
    Vec Ulow_;
};

double eta_bar_inner(const Vec& U, const Vec& a, const Vec& b);
double eta_bar_norm(const Vec& U, const Vec& a);

// Pure boost taking (1,0,...) to the unit time-like vector u.
Mat boost_from_rest(const Vec& u);
// Inverse of boost_from_rest(u).
Mat boost_to_rest(const Vec& u);

// Quadratic normal-coordinate chart x' = x + ½Γ₀(x−x₀)(x−x₀) around x₀.
class CoordinateMap {
public:
    CoordinateMap(Vec x0, ConnectionCoeffs gamma0);

    Vec forward(const Vec& x) const;
    Mat jacobian(const Vec& x) const;  // ∂x'/∂x
    Vec inverse(const Vec& xp) const;  // Newton solve
    Mat inverse_jacobian(const Vec& x) const;  // ∂x/∂x' at the point x
    Vec base() const { return x0_; }

    // Connection coefficients in the primed chart at the point with old coordinates x,
    // given the old-chart coefficients there.
    ConnectionCoeffs transform(const ConnectionCoeffs& gamma, const Vec& x) const;
    // Vector components in the primed chart.
    Vec push_vector(const Vec& v, const Vec& x) const { return jacobian(x) * v; }

private:
    Vec x0_;
    ConnectionCoeffs g0_;
};

CoordinateMap normal_coordinates(const Vec& x0, const ConnectionCoeffs& gamma0);

}  // namespace avlab
