#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "avlab/connections.hpp"
#include "avlab/distribution.hpp"
#include "avlab/em_fields.hpp"
#include "avlab/integrator.hpp"

namespace avlab {

// Fiber moments as a function of space-time position (x(0) is lab time).
class MomentField {
public:
    virtual ~MomentField() = default;
    virtual MomentSet at(const Vec& x) const = 0;
};

// Moments of f0, ignoring time.
class FrozenMomentField : public MomentField {
public:
    explicit FrozenMomentField(PhaseDistribution f0);
    MomentSet at(const Vec& x) const override;

private:
    PhaseDistribution f0_;
    std::optional<MomentSet> cached_;  // x-independent inside the slab for beam profiles
};

enum class FlowKind { lorentz, averaged, interpolated };

// Second-order vector field on TM: dx/ds = y, dy/ds = −G(x,y).
class Flow {
public:
    static Flow lorentz(std::shared_ptr<const FieldScenario> field);
    static Flow averaged(std::shared_ptr<const FieldScenario> field, std::shared_ptr<const MomentField> moments);
    static Flow interpolated(double eps, std::shared_ptr<const FieldScenario> field,
                             std::shared_ptr<const MomentField> moments);

    FlowKind kind() const { return kind_; }
    double epsilon() const { return eps_; }
    std::string tag() const;
    const FieldScenario& scenario() const { return *field_; }
    std::shared_ptr<const FieldScenario> scenario_ptr() const { return field_; }
    std::shared_ptr<const MomentField> moments() const { return moments_; }
    // Lorentz characteristics stay on Σ by themselves; the others are projected when restricted to Σ.
    bool preserves_sigma() const { return kind_ == FlowKind::lorentz; }

    Vec spray(const Vec& x, const Vec& y) const;
    Mat spray_jacobian(const Vec& x, const Vec& y) const;
    ConnectionCoeffs averaged_connection(const Vec& x) const;

private:
    FlowKind kind_ = FlowKind::lorentz;
    double eps_ = 0.0;
    std::shared_ptr<const FieldScenario> field_;
    std::shared_ptr<const MomentField> moments_;
};

struct PhaseState {
    double t = 0.0;    // lab time, equal to x(0)
    double tau = 0.0;  // affine parameter (proper time for unit Lorentz data)
    Vec x;
    Vec y;
};

struct Trajectory {
    std::string tag;
    std::vector<PhaseState> samples;
};

// Lab-time integration of the flow; checkpoints must be strictly monotone and start after state0.t
// (forward) or before it (backward). With on_sigma, non-metric flows are projected onto Σ:
// dy/ds = −G + η(G,y)y, which keeps the spatial orbits of the affine geodesics.
Trajectory integrate_flow(const Flow& flow, const PhaseState& state0, const std::vector<double>& checkpoints,
                          const IntegratorOptions& opt = {}, bool on_sigma = false);
PhaseState flow_to(const Flow& flow, const PhaseState& state0, double t, const IntegratorOptions& opt = {},
                   bool on_sigma = false);

Trajectory integrate_lorentz(std::shared_ptr<const FieldScenario> field, const PhaseState& state0,
                             const std::vector<double>& checkpoints, const IntegratorOptions& opt = {});
Trajectory integrate_averaged(std::shared_ptr<const FieldScenario> field, std::shared_ptr<const MomentField> moments,
                              const PhaseState& state0, const std::vector<double>& checkpoints,
                              const IntegratorOptions& opt = {});
Trajectory integrate_interpolated(double eps, std::shared_ptr<const FieldScenario> field,
                                  std::shared_ptr<const MomentField> moments, const PhaseState& state0,
                                  const std::vector<double>& checkpoints, const IntegratorOptions& opt = {});

// f(t,x,y) = f0(Φ_{−t}(x,y)) by backward characteristics (projected onto Σ for non-metric flows).
double vlasov_evaluate(const PhaseDistribution& f0, const Flow& flow, double t, const Vec& x, const Vec& y,
                       const IntegratorOptions& opt = {});

// Moments of the Vlasov solution of `flow` by fiber quadrature on backward characteristics.
// The grid is centred on the velocity whose characteristic ends at the profile centre.
class QuadratureMomentField : public MomentField {
public:
    QuadratureMomentField(PhaseDistribution f0, Flow flow, int nodes_per_axis, IntegratorOptions opt = {});
    MomentSet at(const Vec& x) const override;
    std::vector<FiberNode> nodes(const Vec& x) const;
    // Nodes with ∂f/∂ȳ' in the rest-frame chart of U (central differences along rest axes).
    std::vector<FiberNodeGrad> nodes_with_gradients(const Vec& x, const Vec& U) const;

private:
    struct Grid {
        Vec center;
        double radius;
    };
    Grid locate(const Vec& x) const;
    std::pair<Grid, std::vector<FiberNode>> build(const Vec& x) const;
    PhaseDistribution f0_;
    Flow flow_;
    int N_;
    IntegratorOptions opt_;
};

struct ComparisonRecord {
    double t = 0.0;
    double position_gap = 0.0;
    double velocity_gap = 0.0;
    double f_gap = 0.0;
    double theta2 = 0.0;
    double theta2_bar = 0.0;
    double dlogE_dt = 0.0;
    double averaged_norm_drift = 0.0;  // |η(ẋ̃,ẋ̃) − 1|
    double lorentz_norm_drift = 0.0;   // |η(ẋ,ẋ) − 1|
    PhaseState lorentz;
    PhaseState averaged;
};

struct ComparisonSetup {
    std::shared_ptr<const FieldScenario> field;
    PhaseDistribution f0;
    std::shared_ptr<const MomentField> lorentz_moments;   // moments of f (defines U)
    std::shared_ptr<const MomentField> averaged_moments;  // moments of f̃ (connection source)
    std::function<double(double)> dlogE_dt;               // optional
    IntegratorOptions opt;
};

std::vector<ComparisonRecord> compare_flows(const ComparisonSetup& setup, const PhaseState& state0,
                                            const std::vector<double>& t_grid);

// Squared lab 3-speed of a 4-vector.
double speed2(const Vec& y);

}  // namespace avlab
