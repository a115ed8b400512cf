#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "avlab/moments.hpp"
#include "avlab/types.hpp"

namespace avlab {

enum class ProfileKind { bump, truncated_gaussian };

// Velocity profile on Σ. Evaluated in the rest frame of the centre: u = spatial(Λ_c⁻¹ y),
// s = |u|/r, h(u) = A g(s) (1 + κ ê·u/r).
class BumpProfile {
public:
    BumpProfile(Vec center_spatial, double radius, ProfileKind kind = ProfileKind::bump, double skew = 0.0,
                Vec skew_direction = Vec(), double gaussian_sigma = 0.35);

    int dim() const { return static_cast<int>(center_.size()); }
    const Vec& center() const { return center_; }  // unit 4-vector
    double radius() const { return radius_; }
    ProfileKind kind() const { return kind_; }
    double skew() const { return skew_; }
    const Vec& skew_direction() const { return skew_dir_; }
    double gaussian_sigma() const { return sigma_; }
    double scale() const { return scale_; }

    // Rest-frame spatial coordinates of y.
    Vec rest_coords(const Vec& y) const;
    double value(const Vec& y) const;
    // ∂f/∂u in rest-frame coordinates of the centre.
    Vec rest_gradient(const Vec& y) const;
    const Mat& to_rest() const { return to_rest_; }

private:
    double shape(double s, double xi) const;
    Vec center_;
    double radius_;
    ProfileKind kind_;
    double skew_;
    Vec skew_dir_;
    double sigma_;
    double scale_ = 1.0;
    Mat to_rest_;
};

// Smooth plateau on [0, core], vanishing with all derivatives at 1.
double smooth_window(double s, double core);
double smooth_window_derivative(double s, double core);

// Spatial slab: S(x) = Π_a w(|x^a|), w = 1 up to half_width and 0 beyond half_width + edge.
struct SlabWindow {
    double half_width = 50.0;
    double edge = 5.0;
    double value(const Vec& x) const;
    // Largest L such that S = 1 on |x^a| ≤ L.
    double core() const { return half_width; }
};

// Ball on Σ given by its centre and rest-frame radius.
struct VelocityBall {
    Vec center;  // unit 4-vector
    double radius = 0.0;
    double core = 0.8;  // plateau fraction of the window
};

using ScalarField = std::function<double(const Vec&)>;

struct FiberNodeGrad : FiberNode {
    Vec grad;  // ∂f/∂ȳ' in the spatial chart of a chosen frame
};

class PhaseDistribution {
public:
    static PhaseDistribution beam(BumpProfile profile, SlabWindow slab, int nodes_per_axis);
    static PhaseDistribution dirac(ScalarField psi, std::function<Vec(const Vec&)> V, int n);

    int dim() const { return n_; }
    bool is_dirac() const { return dirac_; }
    const BumpProfile& profile() const;
    const SlabWindow& slab() const { return slab_; }
    int nodes_per_axis() const { return nodes_; }
    const std::optional<VelocityBall>& window() const { return window_; }

    // f0(x,y) for y on Σ. Not defined for the Dirac limit.
    double value(const Vec& x, const Vec& y) const;
    double velocity_value(const Vec& y) const;  // profile times window
    // ∂f/∂u in the rest-frame chart of the profile centre (velocity part only).
    Vec velocity_rest_gradient(const Vec& y) const;

    // Quadrature nodes on Σ_x (t = 0).
    std::vector<FiberNode> quadrature(const Vec& x) const;
    // Quadrature ball (centre, rest-frame radius) used by quadrature().
    VelocityBall quadrature_ball() const;

    PhaseDistribution with_window(const VelocityBall& w) const;
    PhaseDistribution with_nodes(int nodes_per_axis) const;

private:
    PhaseDistribution() = default;
    int n_ = 4;
    bool dirac_ = false;
    std::optional<BumpProfile> profile_;
    SlabWindow slab_;
    int nodes_ = 9;
    std::optional<VelocityBall> window_;
    ScalarField psi_;
    std::function<Vec(const Vec&)> V_;
};

// Midpoint tensor grid on the ball |u| < R in the rest frame of `center`, nodes lifted and boosted to the lab.
// Nodes where f vanishes are dropped.
std::vector<FiberNode> fiber_grid(const Vec& center, double R, int N, const std::function<double(const Vec&)>& f);

struct BeamOptions {
    ProfileKind kind = ProfileKind::bump;
    double skew = 0.0;
    Vec skew_direction;  // rest frame, unit; default: first axis orthogonal to the beam
    int nodes_per_axis = 9;
    SlabWindow slab;
    double gaussian_sigma = 0.35;
};

// Radius is calibrated so that the measured η̄-diameter of the quadrature nodes equals alpha.
PhaseDistribution make_beam_distribution(double center_rapidity, const Vec& direction, double alpha,
                                         const BeamOptions& opts = {});

MomentSet compute_moments(const PhaseDistribution& f, const Vec& x);

struct SupportStats {
    double alpha = 0.0;
    double energy = 1.0;
    double dlogE_dt = 0.0;
    Vec U;
    double max_delta = 0.0;  // max over nodes of ‖<y> − y‖_η̄
};

SupportStats support_stats(const std::vector<FiberNode>& nodes);
SupportStats support_stats(const PhaseDistribution& f, const Vec& x);

struct SobolevNorms {
    double norm_11 = 0.0;
    Vec norm_02;  // per component k of ∂₀ log|δ^k|
    double norm_02_sum = 0.0;
    int floored = 0;  // nodes × components where |δ^k| hit the floor
};

// Nodes carry ∂f/∂ȳ' in the rest-frame chart of U. dV0 = U^μ ∂_μ <y> in lab components.
SobolevNorms sobolev_norms(const std::vector<FiberNodeGrad>& nodes, const Vec& U, const Vec& mean, const Vec& dV0,
                           double alpha);
// t = 0 form with analytic fiber derivatives of the profile.
SobolevNorms sobolev_norms(const PhaseDistribution& f, const Vec& x, const Vec& dV0);

// Nodes of f at x with gradients expressed in the rest-frame chart of U.
std::vector<FiberNodeGrad> nodes_with_gradients(const PhaseDistribution& f, const Vec& x, const Vec& U);

// Jacobian ∂u/∂ȳ' of the chart change between the rest frame of `from_frame` (coordinates ȳ')
// and the chart u = spatial(L y), evaluated at the lab vector y.
Mat chart_jacobian(const Mat& L, const Mat& from_boost, const Vec& y);

PhaseDistribution window_support(const PhaseDistribution& f_tilde, const PhaseDistribution& target);

PhaseDistribution dirac_limit_distribution(ScalarField psi, std::function<Vec(const Vec&)> V, int n = 4);

}  // namespace avlab
