#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace avlab {

inline constexpr int kMaxDim = 4;

// Fixed-capacity dynamic vectors: n = 4 by default, n = 2 for the cold-limit toy.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

using SpacetimePoint = Vec;
using TangentVector = Vec;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    enum class Kind { domain_exit, step_underflow, failure };
    IntegrationError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

inline void require_same_dim(const Vec& a, const Vec& b) {
    if (a.size() != b.size()) throw DimensionError("dimension mismatch");
}

}  // namespace avlab
