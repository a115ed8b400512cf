#pragma once

#include <memory>
#include <string>
#include <vector>

#include "avlab/kinetic.hpp"

namespace avlab {

struct EnsembleOptions {
    double t_end = 1.0;
    double t_begin = 0.0;              // ≤ 0; a short backward extension for centred stencils at t = 0
    double sample_dt = 0.01;           // spacing of the moment snapshots
    std::vector<double> checkpoints;   // times at which node data is kept
    IntegratorOptions integ;
    Vec x_ref;                         // base point of the initial fiber (default: origin)
    std::size_t max_rhs_evals = 60'000;  // work budget; exceeding it ends the transport early
};

// Transported moments for homogeneous fields. The fiber quadrature nodes of f0 are pushed forward in
// velocity space together with their flow Jacobians J = ∂ȳ(t)/∂ȳ(0). For the averaged (and
// interpolated) flows the connection at time t is built from the ensemble itself, so the
// transport is self-consistent. Node weights follow from dvol(t) = det J · dvol(0) · y⁰(0)/y⁰(t).
// Non-Lorentz characteristics are restricted to Σ by projection.
class EnsembleMomentField : public MomentField {
public:
    EnsembleMomentField(const PhaseDistribution& f0, std::shared_ptr<const FieldScenario> field, FlowKind kind,
                        double eps, EnsembleOptions opt);

    // x(0) = t in [t_begin, t_end]; x must lie where backward characteristics stay in the slab core.
    MomentSet at(const Vec& x) const override;
    MomentSet at_time(double t) const;

    double t_end() const { return opt_.t_end; }
    // Transport may stop early (integration failure or budget). Data is valid on [0, valid_until()].
    double valid_until() const { return valid_until_; }
    bool complete() const { return failure_.empty(); }
    const std::string& failure() const { return failure_; }
    FlowKind kind() const { return kind_; }
    const std::vector<double>& checkpoints() const { return opt_.checkpoints; }

    std::vector<FiberNode> fiber(double t) const;
    // ∂f/∂ȳ' in the rest-frame chart of U.
    std::vector<FiberNodeGrad> fiber_with_gradients(double t, const Vec& U) const;
    SupportStats stats(double t) const;

    double energy(double t) const;
    double dlogE_dt(double t) const;
    // Largest |x^a| + t for which at() is valid.
    double core_half_width() const { return core_; }

private:
    struct NodeSnap {
        std::vector<FiberNode> nodes;
        std::vector<Vec> grad_lab;  // ∂f/∂ȳ in the lab spatial chart
    };
    const NodeSnap& snap(double t) const;
    std::vector<double> interp(double t, int deriv) const;

    FlowKind kind_;
    double eps_;
    std::shared_ptr<const FieldScenario> field_;
    EnsembleOptions opt_;
    int n_;
    bool dirac_;
    double core_;
    int ncomp_;
    double valid_until_ = 0.0;
    double valid_from_ = 0.0;
    int kb_ = 0;
    int last_sample_ = -1;
    std::string failure_;
    std::vector<std::vector<double>> samples_;  // flattened MomentSet + log E per grid time
    std::vector<std::pair<double, NodeSnap>> snaps_;
};

}  // namespace avlab
