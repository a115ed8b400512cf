#include "avlab/connections.hpp"

#include <cmath>

#include "avlab/geometry.hpp"

namespace avlab {

namespace {

Tensor3 outer3(const Vec& v) {
    Tensor3 T{};
    const auto n = v.size();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k) T[t3(i, j, k)] = v(i) * v(j) * v(k);
    return T;
}

double sig(int i) { return i == 0 ? 1.0 : -1.0; }

void require_timelike(const Vec& y) {
    const double q = minkowski_inner(y, y);
    if (!(q > 0.0)) throw std::invalid_argument("velocity is not time-like");
}

}  // namespace

ConnectionCoeffs connection_kernel(const FieldTensor& F, const Vec& v, const Tensor3& T) {
    const int n = F.dim();
    if (v.size() != n) throw DimensionError("connection_kernel: dimension mismatch");
    const Mat Fm = F.mixed();
    const Vec vl = lower_index(v);
    ConnectionCoeffs G(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double s = 0.5 * (Fm(i, j) * vl(k) + Fm(i, k) * vl(j));
                double t = 0.0;
                const double ejk = (j == k) ? sig(j) : 0.0;
                for (int m = 0; m < n; ++m) t += Fm(i, m) * (v(m) * ejk - T[t3(m, j, k)] * sig(j) * sig(k));
                s += 0.5 * t;
                G(i, j, k) = s;
                G(i, k, j) = s;
            }
    return G;
}

ConnectionCoeffs lorentz_coeffs(const FieldTensor& F, const Vec& y) {
    require_timelike(y);
    const double q = minkowski_inner(y, y);
    const Vec yh = (q == 1.0) ? y : Vec(y / std::sqrt(q));
    ConnectionCoeffs G = connection_kernel(F, yh, outer3(yh));
    G.y_dependent = true;
    G.y = y;
    return G;
}

Vec lorentz_spray(const FieldTensor& F, const Vec& y) {
    require_timelike(y);
    if (y.size() != F.dim()) throw DimensionError("lorentz_spray: dimension mismatch");
    return std::sqrt(minkowski_inner(y, y)) * (F.mixed() * y);
}

Mat lorentz_spray_jacobian(const FieldTensor& F, const Vec& y) {
    require_timelike(y);
    const double s = std::sqrt(minkowski_inner(y, y));
    const Mat Fm = F.mixed();
    const Vec Fy = Fm * y;
    return s * Fm + (Fy * lower_index(y).transpose()) / s;
}

ConnectionCoeffs averaged_coeffs(const FieldTensor& F, const MomentSet& M) {
    if (!(M.volume > 0.0)) throw DomainError("averaged_coeffs: zero support volume");
    return connection_kernel(F, M.first, M.third);
}

Vec affine_spray(const ConnectionCoeffs& G, const Vec& y) { return G.contract(y, y); }

Mat affine_spray_jacobian(const ConnectionCoeffs& G, const Vec& y) {
    const int n = G.dim();
    Mat J = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += (G(i, k, j) + G(i, j, k)) * y(j);
            J(i, k) = s;
        }
    return J;
}

ConnectionCoeffs interpolated_coeffs(double eps, const FieldTensor& F, const Vec& y, const MomentSet& M) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("interpolation parameter outside [0,1]");
    if (eps == 0.0) return lorentz_coeffs(F, y);
    if (eps == 1.0) return averaged_coeffs(F, M);
    ConnectionCoeffs G = (1.0 - eps) * lorentz_coeffs(F, y);
    G += eps * averaged_coeffs(F, M);
    G.y_dependent = true;
    G.y = y;
    return G;
}

namespace {

template <class Fn>
auto central_diff(const Fn& fn, const Vec& x, int j, double h, int order) {
    Vec xp = x, xm = x;
    xp(j) += h;
    xm(j) -= h;
    if (order == 2) return decltype(fn(x))((fn(xp) - fn(xm)) / (2.0 * h));
    if (order != 4) throw std::invalid_argument("finite-difference order must be 2 or 4");
    Vec xpp = x, xmm = x;
    xpp(j) += 2.0 * h;
    xmm(j) -= 2.0 * h;
    return decltype(fn(x))((-fn(xpp) + 8.0 * fn(xp) - 8.0 * fn(xm) + fn(xmm)) / (12.0 * h));
}

}  // namespace

Vec covariant_derivative(const ConnectionField& gamma, const VectorField& V, const VectorField& W, const Vec& x,
                         double h, int order) {
    if (!(h > 0.0)) throw std::invalid_argument("covariant_derivative: h must be positive");
    const Vec Vx = V(x);
    const Vec Wx = W(x);
    Vec out = gamma(x).contract(Vx, Wx);
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (Vx(j) == 0.0) continue;
        out += Vx(j) * central_diff(W, x, static_cast<int>(j), h, order);
    }
    return out;
}

double directional_derivative(const std::function<double(const Vec&)>& phi, const Vec& V, const Vec& x, double h,
                              int order) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        if (V(j) == 0.0) continue;
        s += V(j) * central_diff(phi, x, static_cast<int>(j), h, order);
    }
    return s;
}

}  // namespace avlab
