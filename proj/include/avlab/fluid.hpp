#pragma once

#include <memory>
#include <vector>

#include "avlab/connections.hpp"
#include "avlab/distribution.hpp"
#include "avlab/kinetic.hpp"

namespace avlab {

// Ṽ(x) = <y>, ũ = Ṽ/sqrt(η(Ṽ,Ṽ)), ρ(x) = ∫ f dvol, all read from a moment field.
class MeanVelocityField {
public:
    explicit MeanVelocityField(std::shared_ptr<const MomentField> moments);

    MomentSet moments(const Vec& x) const { return moments_->at(x); }
    Vec V(const Vec& x) const { return moments_->at(x).first; }
    Vec u(const Vec& x) const { return mean_frame(moments_->at(x)); }
    double rho(const Vec& x) const { return moments_->at(x).volume; }
    const std::shared_ptr<const MomentField>& source() const { return moments_; }

private:
    std::shared_ptr<const MomentField> moments_;
};

struct MeanFieldSample {
    Vec x;
    Vec V;
    Vec u;
    double rho = 0.0;
    double q = 1.0;  // η(Ṽ,Ṽ)
};

// Per-node quadrature of the moment field on a space-time grid. Throws DomainError on empty support.
std::vector<MeanFieldSample> build_mean_field(const MeanVelocityField& field, const std::vector<Vec>& grid);

struct FluidResidual {
    Vec x;
    double q = 1.0;
    Vec r_V;                      // Ṽʲ∂ⱼṼ + Γ(Ṽ,Ṽ)
    Vec r_u;                      // ũʲ∂ⱼũ + Γ(ũ,ũ), direct
    Vec r_u_identity;             // r_V/q − ½ Ṽ(log q) Ṽ/q
    Vec drift_term;               // ½ Ṽ(log q) Ṽ/q
    double identity_residual = 0.0;  // ‖r_u − r_u_identity‖_η̄
    double incompat = 0.0;           // (∇_Ṽ η)(Ṽ,Ṽ) = −2η(Γ(Ṽ,Ṽ),Ṽ)
    double incompat_moments = 0.0;   // q·F_μm<δᵐδˢδˡ>Ṽ^μṼ_sṼ_l
    // Exact moment expansion of the direct form: 2q·F_μm Ṽ^μ<δᵐδˢ>Ṽ_s − F_μm Ṽ^μ<δᵐδˢδˡ>Ṽ_sṼ_l
    double incompat_expanded = 0.0;
    double norm_r_V = 0.0;           // η̄-norms in the frame ũ(x)
    double norm_r_u = 0.0;
};

// Central differences of step h and order 2 or 4. `F` feeds the moment form of the incompatibility term.
FluidResidual fluid_residual(const MeanVelocityField& Vfield, const ConnectionField& gamma, const FieldTensor& F,
                             const Vec& x, double h, int order = 2);

struct NormalCoordinateCheck {
    double gamma_at_base = 0.0;  // max |Γ'(x₀)|
    double residual_gap = 0.0;   // ‖r' − J r‖_η̄ at x₀ for step h
    double residual_gap_half = 0.0;
    double order = 0.0;          // log2(gap(h)/gap(h/2))
    Vec r_lab;
    Vec r_normal;
};

// Residual evaluated in the quadratic normal chart of Γ at x₀ (where it is a plain directional derivative),
// compared against the lab-chart covariant expression.
NormalCoordinateCheck normal_coordinate_check(const MeanVelocityField& Vfield, const ConnectionField& gamma,
                                              const Vec& x0, double h);

struct FluidBoundRhs {
    double rhs = 0.0;       // (vol_E^{1/2}/vol)·Σₖ‖∂₀log|δᵏ|‖₀,₂·‖f‖₁,₁·α²
    double rhs_volE = 0.0;  // same with vol replaced by vol_E
    double vol = 0.0;
    double vol_E = 0.0;
    double norm_11 = 0.0;
    double norm_02_sum = 0.0;
    double alpha = 0.0;
    int floored = 0;
};

// Fiber data at x: nodes carry ∂f/∂ȳ' in the rest chart of U; dV0 = U^μ∂_μṼ.
FluidBoundRhs fluid_bound_rhs(const std::vector<FiberNodeGrad>& nodes, const Vec& U, const Vec& dV0);
// t = 0 form for a smooth initial distribution.
FluidBoundRhs fluid_bound_rhs(const PhaseDistribution& f, const Vec& x, const Vec& dV0);

struct BoundReport {
    Vec x;
    double alpha = 0.0;
    double measured = 0.0;  // ‖r_V‖_η̄
    FluidBoundRhs rhs;
    double third_moment = 0.0;  // Frobenius norm of <δδδ> in the rest frame of ũ
    bool pass = false;          // measured ≤ rhs·(1 + slack)
};

// Frobenius norm of the centered third moment after boosting to the rest frame of U.
double third_moment_norm(const MomentSet& m, const Vec& U);

// U^μ∂_μṼ by central differences.
Vec mean_derivative_along(const MeanVelocityField& Vfield, const Vec& x, const Vec& U, double h, int order = 2);

struct FiberSource {
    // Nodes of f̃ at x with gradients in the rest chart of U.
    std::function<std::vector<FiberNodeGrad>(const Vec& x, const Vec& U)> nodes;
};

// slack = 0.5·alpha/alpha_max covers the cubic remainder.
std::vector<BoundReport> check_fluid_bound(const MeanVelocityField& Vfield, const ConnectionField& gamma,
                                     const FieldTensor& F, const FiberSource& fiber, const std::vector<Vec>& grid,
                                     double h, double alpha_max, int order = 2);

struct DecompositionReport {
    Vec x;
    double alpha = 0.0;
    double norm_r_u = 0.0;
    double incompat = 0.0;
    double incompat_moments = 0.0;
    double incompat_expanded = 0.0;
    double third_moment = 0.0;
    double h = 0.0;
    double identity_residual = 0.0;     // at h
    double identity_residual_h2 = 0.0;  // at h/2
    double identity_residual_h4 = 0.0;  // at h/4
    double identity_order = 0.0;        // least-squares slope of log residual against log h
};

std::vector<DecompositionReport> check_decomposition(const MeanVelocityField& Vfield, const ConnectionField& gamma,
                                       const FieldTensor& F, const std::vector<Vec>& grid, double h);

struct LorentzFluidReport {
    Vec x;
    double residual = 0.0;      // ‖ᴸD_u u‖_η̄ with u from the Lorentz Vlasov solution
    double curve_gap = 0.0;     // integral curve of u vs Lorentz trajectory from (x, u(x)), η̄-norm at t_end
    double curve_time = 0.0;
};

// `u_field` must be the Lorentz (true Vlasov) mean field. The integral curve dx/dt = ū/u⁰ runs to t_end.
std::vector<LorentzFluidReport> check_lorentz_fluid(std::shared_ptr<const FieldScenario> field, const MeanVelocityField& u_field,
                                     const std::vector<Vec>& grid, double h, double t_end,
                                     const IntegratorOptions& opt = {}, int order = 2);

// Connection fields built from a scenario and a mean field.
ConnectionField averaged_connection_field(std::shared_ptr<const FieldScenario> field,
                                          std::shared_ptr<const MomentField> moments);
ConnectionField lorentz_connection_field(std::shared_ptr<const FieldScenario> field, const MeanVelocityField& u_field);

}  // namespace avlab
