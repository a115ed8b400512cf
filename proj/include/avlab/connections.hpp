#pragma once

#include <functional>

#include "avlab/connection_coeffs.hpp"
#include "avlab/em_fields.hpp"
#include "avlab/moments.hpp"

namespace avlab {

// Shared coefficient kernel
//   Γ^i_jk = ½(F^i_j v_k + F^i_k v_j) + ½F^i_m(v^m η_jk − T^m_jk),  T^m_jk = T^{msl}η_sj η_lk.
// Lorentz: v = ŷ, T = ŷŷŷ. Averaged: v = <y>, T = <yyy>.
ConnectionCoeffs connection_kernel(const FieldTensor& F, const Vec& v, const Tensor3& T);

ConnectionCoeffs lorentz_coeffs(const FieldTensor& F, const Vec& y);
// G^i = sqrt(η(y,y)) F^i_j y^j
Vec lorentz_spray(const FieldTensor& F, const Vec& y);
// ∂G^i/∂y^k
Mat lorentz_spray_jacobian(const FieldTensor& F, const Vec& y);

ConnectionCoeffs averaged_coeffs(const FieldTensor& F, const MomentSet& M);
// Γ̄(y,y) and its y-Jacobian 2Γ̄^i_kj y^j.
Vec affine_spray(const ConnectionCoeffs& G, const Vec& y);
Mat affine_spray_jacobian(const ConnectionCoeffs& G, const Vec& y);

ConnectionCoeffs interpolated_coeffs(double eps, const FieldTensor& F, const Vec& y, const MomentSet& M);

using VectorField = std::function<Vec(const Vec&)>;
using ConnectionField = std::function<ConnectionCoeffs(const Vec&)>;

// (∇_V W)^k = V^j ∂_j W^k + Γ^k_jl V^j W^l with central differences of step h (order 2 or 4).
Vec covariant_derivative(const ConnectionField& gamma, const VectorField& V, const VectorField& W, const Vec& x,
                         double h, int order = 2);

// V^j ∂_j φ with the same stencil.
double directional_derivative(const std::function<double(const Vec&)>& phi, const Vec& V, const Vec& x, double h,
                              int order = 2);

}  // namespace avlab
