#include "avlab/connection_coeffs.hpp"

#include <algorithm>
#include <cmath>

namespace avlab {

ConnectionCoeffs::ConnectionCoeffs(int n) : n_(n) {
    if (n < 1 || n > kMaxDim) throw DimensionError("connection dimension out of range");
}

Vec ConnectionCoeffs::contract(const Vec& a, const Vec& b) const {
    if (a.size() != n_ || b.size() != n_) throw DimensionError("contract: dimension mismatch");
    Vec out = Vec::Zero(n_);
    for (int i = 0; i < n_; ++i) {
        double s = 0.0;
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k) s += (*this)(i, j, k) * a(j) * b(k);
        out(i) = s;
    }
    return out;
}

double ConnectionCoeffs::max_abs() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = 0; k < n_; ++k) m = std::max(m, std::abs((*this)(i, j, k)));
    return m;
}

double ConnectionCoeffs::asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < n_; ++i)
        for (int j = 0; j < n_; ++j)
            for (int k = j + 1; k < n_; ++k)
                m = std::max(m, std::abs((*this)(i, j, k) - (*this)(i, k, j)));
    return m;
}

ConnectionCoeffs& ConnectionCoeffs::operator+=(const ConnectionCoeffs& o) {
    if (o.n_ != n_) throw DimensionError("connection dimension mismatch");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
}

ConnectionCoeffs& ConnectionCoeffs::operator-=(const ConnectionCoeffs& o) {
    if (o.n_ != n_) throw DimensionError("connection dimension mismatch");
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
}

ConnectionCoeffs& ConnectionCoeffs::operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
}

ConnectionCoeffs operator+(ConnectionCoeffs a, const ConnectionCoeffs& b) { return a += b; }
ConnectionCoeffs operator-(ConnectionCoeffs a, const ConnectionCoeffs& b) { return a -= b; }
ConnectionCoeffs operator*(double s, ConnectionCoeffs a) { return a *= s; }

}  // namespace avlab
