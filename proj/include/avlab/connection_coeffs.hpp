#pragma once

#include <array>
#include <optional>

#include "avlab/types.hpp"

namespace avlab {

// Γ^i_jk at a point, stored densely as [i][j][k] with capacity 4x4x4.
class ConnectionCoeffs {
public:
    ConnectionCoeffs() : ConnectionCoeffs(4) {}
    explicit ConnectionCoeffs(int n);

    int dim() const { return n_; }

    double& operator()(int i, int j, int k) { return c_[idx(i, j, k)]; }
    double operator()(int i, int j, int k) const { return c_[idx(i, j, k)]; }

    // Γ^i_jk a^j b^k
    Vec contract(const Vec& a, const Vec& b) const;

    double max_abs() const;
    // max |Γ^i_jk − Γ^i_kj|
    double asymmetry() const;

    ConnectionCoeffs& operator+=(const ConnectionCoeffs& o);
    ConnectionCoeffs& operator-=(const ConnectionCoeffs& o);
    ConnectionCoeffs& operator*=(double s);

    bool y_dependent = false;
    std::optional<Vec> y;  // evaluation velocity for velocity-dependent coefficients

private:
    static constexpr int idx(int i, int j, int k) { return (i * kMaxDim + j) * kMaxDim + k; }
    int n_;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> c_{};
};

ConnectionCoeffs operator+(ConnectionCoeffs a, const ConnectionCoeffs& b);
ConnectionCoeffs operator-(ConnectionCoeffs a, const ConnectionCoeffs& b);
ConnectionCoeffs operator*(double s, ConnectionCoeffs a);

}  // namespace avlab
