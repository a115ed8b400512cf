#include "avlab/geometry.hpp"

#include <cmath>

namespace avlab {

Mat minkowski_metric(int n) {
    if (n < 2 || n > kMaxDim) throw DimensionError("metric dimension out of range");
    Mat g = Mat::Zero(n, n);
    g(0, 0) = 1.0;
    for (int i = 1; i < n; ++i) g(i, i) = -1.0;
    return g;
}

double minkowski_inner(const Vec& a, const Vec& b) {
    require_same_dim(a, b);
    if (a.size() < 1) throw DimensionError("empty vector");
    double s = a(0) * b(0);
    for (Eigen::Index k = 1; k < a.size(); ++k) s -= a(k) * b(k);
    return s;
}

Vec lower_index(const Vec& a) {
    Vec l = -a;
    l(0) = a(0);
    return l;
}

HyperboloidVector HyperboloidVector::lift(const Vec& spatial) {
    if (!spatial.allFinite()) throw std::invalid_argument("hyperboloid_lift: non-finite input");
    const auto m = spatial.size();
    if (m < 1 || m > kMaxDim - 1) throw DimensionError("hyperboloid_lift: bad dimension");
    Vec y(m + 1);
    y(0) = std::sqrt(1.0 + spatial.squaredNorm());
    y.tail(m) = spatial;
    return HyperboloidVector(y);
}

HyperboloidVector HyperboloidVector::normalize(const Vec& y) {
    const double q = minkowski_inner(y, y);
    if (!(q > 0.0) || !(y(0) > 0.0)) throw std::invalid_argument("normalize: not future time-like");
    return lift(y.tail(y.size() - 1) / std::sqrt(q));
}

double fiber_volume_weight(const HyperboloidVector& y) { return 1.0 / y.gamma(); }

EtaBar::EtaBar(Vec U) : U_(std::move(U)) {
    if (U_.size() < 2) throw DimensionError("EtaBar: bad dimension");
    if (std::abs(minkowski_inner(U_, U_) - 1.0) > 1e-9 || !(U_(0) > 0.0))
        throw std::invalid_argument("EtaBar: U is not unit future time-like");
    Ulow_ = lower_index(U_);
}

double EtaBar::inner(const Vec& a, const Vec& b) const {
    require_same_dim(a, U_);
    require_same_dim(b, U_);
    return -minkowski_inner(a, b) + 2.0 * Ulow_.dot(a) * Ulow_.dot(b);
}

double EtaBar::norm(const Vec& a) const { return std::sqrt(std::max(0.0, inner(a, a))); }

Mat EtaBar::matrix() const {
    return -minkowski_metric(static_cast<int>(U_.size())) + 2.0 * Ulow_ * Ulow_.transpose();
}

double eta_bar_inner(const Vec& U, const Vec& a, const Vec& b) { return EtaBar(U).inner(a, b); }
double eta_bar_norm(const Vec& U, const Vec& a) { return EtaBar(U).norm(a); }

Mat boost_from_rest(const Vec& u) {
    const auto n = u.size();
    const double g = u(0);
    Mat L = Mat::Identity(n, n);
    L(0, 0) = g;
    for (Eigen::Index i = 1; i < n; ++i) {
        L(0, i) = u(i);
        L(i, 0) = u(i);
        for (Eigen::Index j = 1; j < n; ++j) L(i, j) += u(i) * u(j) / (1.0 + g);
    }
    return L;
}

Mat boost_to_rest(const Vec& u) {
    Vec v = -u;
    v(0) = u(0);
    return boost_from_rest(v);
}

CoordinateMap::CoordinateMap(Vec x0, ConnectionCoeffs gamma0) : x0_(std::move(x0)), g0_(std::move(gamma0)) {
    if (g0_.dim() != x0_.size()) throw DimensionError("normal_coordinates: dimension mismatch");
    if (g0_.asymmetry() > 1e-12 * std::max(1.0, g0_.max_abs()))
        throw std::invalid_argument("normal_coordinates: coefficients not symmetric in lower indices");
}

Vec CoordinateMap::forward(const Vec& x) const {
    const Vec d = x - x0_;
    return x + 0.5 * g0_.contract(d, d);
}

Mat CoordinateMap::jacobian(const Vec& x) const {
    const int n = g0_.dim();
    const Vec d = x - x0_;
    Mat J = Mat::Identity(n, n);
    for (int a = 0; a < n; ++a)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) J(a, j) += g0_(a, j, k) * d(k);
    return J;
}

Vec CoordinateMap::inverse(const Vec& xp) const {
    Vec x = xp;
    for (int it = 0; it < 50; ++it) {
        const Vec r = forward(x) - xp;
        if (r.lpNorm<Eigen::Infinity>() <= 1e-15 * (1.0 + xp.lpNorm<Eigen::Infinity>())) break;
        x -= jacobian(x).partialPivLu().solve(r);
    }
    return x;
}

Mat CoordinateMap::inverse_jacobian(const Vec& x) const { return jacobian(x).inverse(); }

ConnectionCoeffs CoordinateMap::transform(const ConnectionCoeffs& gamma, const Vec& x) const {
    // Γ' = J Γ(K,K) − Γ₀(K,K), K = J⁻¹; the second term is J·∂²x/∂x'∂x' for the quadratic chart.
    const int n = g0_.dim();
    const Mat J = jacobian(x);
    const Mat K = J.inverse();
    ConnectionCoeffs diff = gamma;
    diff -= g0_;
    const Mat Jm1 = J - Mat::Identity(n, n);
    ConnectionCoeffs out(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) {
                        const double kk = K(j, b) * K(k, c);
                        if (kk == 0.0) continue;
                        // J Γ − Γ₀ = (J − I)Γ + (Γ − Γ₀), arranged to cancel exactly at x₀.
                        double t = diff(a, j, k);
                        for (int i = 0; i < n; ++i) t += Jm1(a, i) * gamma(i, j, k);
                        s += t * kk;
                    }
                out(a, b, c) = s;
            }
    return out;
}

CoordinateMap normal_coordinates(const Vec& x0, const ConnectionCoeffs& gamma0) { return CoordinateMap(x0, gamma0); }

}  // namespace avlab
