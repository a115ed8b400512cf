#include "avlab/kinetic.hpp"

#include <algorithm>
#include <cmath>

#include "avlab/geometry.hpp"

namespace avlab {

FrozenMomentField::FrozenMomentField(PhaseDistribution f0) : f0_(std::move(f0)) {
    if (!f0_.is_dirac()) cached_ = compute_moments(f0_, Vec::Zero(f0_.dim()));
}

MomentSet FrozenMomentField::at(const Vec& x) const {
    if (!cached_) return compute_moments(f0_, x);
    if (f0_.slab().value(x) == 0.0) throw DomainError("frozen moments requested outside the slab support");
    return *cached_;
}

Flow Flow::lorentz(std::shared_ptr<const FieldScenario> field) {
    if (!field) throw std::invalid_argument("flow needs a field scenario");
    Flow f;
    f.kind_ = FlowKind::lorentz;
    f.field_ = std::move(field);
    return f;
}

Flow Flow::averaged(std::shared_ptr<const FieldScenario> field, std::shared_ptr<const MomentField> moments) {
    if (!field || !moments) throw std::invalid_argument("averaged flow needs a field and a moment field");
    Flow f;
    f.kind_ = FlowKind::averaged;
    f.eps_ = 1.0;
    f.field_ = std::move(field);
    f.moments_ = std::move(moments);
    return f;
}

Flow Flow::interpolated(double eps, std::shared_ptr<const FieldScenario> field,
                        std::shared_ptr<const MomentField> moments) {
    if (!(eps >= 0.0 && eps <= 1.0)) throw std::invalid_argument("interpolation parameter outside [0,1]");
    if (!field || !moments) throw std::invalid_argument("interpolated flow needs a field and a moment field");
    Flow f;
    f.kind_ = FlowKind::interpolated;
    f.eps_ = eps;
    f.field_ = std::move(field);
    f.moments_ = std::move(moments);
    return f;
}

std::string Flow::tag() const {
    switch (kind_) {
        case FlowKind::lorentz: return "lorentz";
        case FlowKind::averaged: return "averaged";
        case FlowKind::interpolated: return "interpolated(" + std::to_string(eps_) + ")";
    }
    return "?";
}

ConnectionCoeffs Flow::averaged_connection(const Vec& x) const {
    if (!moments_) throw std::logic_error("flow has no moment field");
    return averaged_coeffs(field_->field(x), moments_->at(x));
}

Vec Flow::spray(const Vec& x, const Vec& y) const {
    if (kind_ == FlowKind::lorentz || (kind_ == FlowKind::interpolated && eps_ == 0.0))
        return lorentz_spray(field_->field(x), y);
    if (kind_ == FlowKind::averaged || eps_ == 1.0) return affine_spray(averaged_connection(x), y);
    const FieldTensor F = field_->field(x);
    return (1.0 - eps_) * lorentz_spray(F, y) + eps_ * affine_spray(averaged_coeffs(F, moments_->at(x)), y);
}

Mat Flow::spray_jacobian(const Vec& x, const Vec& y) const {
    if (kind_ == FlowKind::lorentz || (kind_ == FlowKind::interpolated && eps_ == 0.0))
        return lorentz_spray_jacobian(field_->field(x), y);
    if (kind_ == FlowKind::averaged || eps_ == 1.0) return affine_spray_jacobian(averaged_connection(x), y);
    const FieldTensor F = field_->field(x);
    return (1.0 - eps_) * lorentz_spray_jacobian(F, y) +
           eps_ * affine_spray_jacobian(averaged_coeffs(F, moments_->at(x)), y);
}

namespace {

OdeRhs make_rhs(const Flow& flow, int n, bool project) {
    return [&flow, n, project](const OdeState& s, OdeState& ds, double) {
        Vec x(n), y(n);
        for (int i = 0; i < n; ++i) {
            x(i) = s[i];
            y(i) = s[n + i];
        }
        if (!(y(0) > 0.0))
            throw IntegrationError(IntegrationError::Kind::failure, "velocity left the future cone");
        Vec G;
        try {
            if (!flow.scenario().domain().contains(x))
                throw IntegrationError(IntegrationError::Kind::domain_exit, "trajectory left the domain box");
            G = flow.spray(x, y);
        } catch (const DomainError& e) {
            throw IntegrationError(IntegrationError::Kind::domain_exit, e.what());
        }
        if (project) G -= (minkowski_inner(G, y) / minkowski_inner(y, y)) * y;
        const double inv = 1.0 / y(0);
        for (int i = 0; i < n; ++i) {
            ds[i] = y(i) * inv;
            ds[n + i] = -G(i) * inv;
        }
        ds[2 * n] = inv;
    };
}

PhaseState unpack(const OdeState& s, int n, double t) {
    PhaseState p;
    p.t = t;
    p.x = Vec(n);
    p.y = Vec(n);
    for (int i = 0; i < n; ++i) {
        p.x(i) = s[i];
        p.y(i) = s[n + i];
    }
    p.x(0) = t;
    p.tau = s[2 * n];
    return p;
}

}  // namespace

Trajectory integrate_flow(const Flow& flow, const PhaseState& state0, const std::vector<double>& checkpoints,
                          const IntegratorOptions& opt, bool on_sigma) {
    const int n = static_cast<int>(state0.x.size());
    if (state0.y.size() != n || n != flow.scenario().dim()) throw DimensionError("integrate: dimension mismatch");
    if (!(minkowski_inner(state0.y, state0.y) > 0.0) || !(state0.y(0) > 0.0))
        throw std::invalid_argument("initial velocity must be future time-like");
    Trajectory tr;
    tr.tag = flow.tag();
    if (checkpoints.empty()) return tr;
    const bool forward = checkpoints.back() >= state0.t;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        const double prev = i == 0 ? state0.t : checkpoints[i - 1];
        const bool ok = forward ? checkpoints[i] > prev || (i == 0 && checkpoints[i] == prev)
                                : checkpoints[i] < prev || (i == 0 && checkpoints[i] == prev);
        if (!ok) throw std::invalid_argument("checkpoints must be strictly monotone in lab time");
    }
    OdeState s(2 * n + 1);
    for (int i = 0; i < n; ++i) {
        s[i] = state0.x(i);
        s[n + i] = state0.y(i);
    }
    s[0] = state0.t;
    s[2 * n] = state0.tau;
    std::vector<double> times;
    times.reserve(checkpoints.size() + 1);
    times.push_back(state0.t);
    times.insert(times.end(), checkpoints.begin(), checkpoints.end());
    const bool project = on_sigma && !flow.preserves_sigma();
    const OdeRhs rhs = make_rhs(flow, n, project);
    std::size_t k = 0;
    integrate_checkpoints(rhs, s, times, opt, [&](const OdeState& st, double t) {
        if (k++ == 0) return;
        tr.samples.push_back(unpack(st, n, t));
    });
    return tr;
}

PhaseState flow_to(const Flow& flow, const PhaseState& state0, double t, const IntegratorOptions& opt,
                   bool on_sigma) {
    if (t == state0.t) return state0;
    return integrate_flow(flow, state0, {t}, opt, on_sigma).samples.back();
}

Trajectory integrate_lorentz(std::shared_ptr<const FieldScenario> field, const PhaseState& state0,
                             const std::vector<double>& checkpoints, const IntegratorOptions& opt) {
    return integrate_flow(Flow::lorentz(std::move(field)), state0, checkpoints, opt);
}

Trajectory integrate_averaged(std::shared_ptr<const FieldScenario> field, std::shared_ptr<const MomentField> moments,
                              const PhaseState& state0, const std::vector<double>& checkpoints,
                              const IntegratorOptions& opt) {
    return integrate_flow(Flow::averaged(std::move(field), std::move(moments)), state0, checkpoints, opt);
}

Trajectory integrate_interpolated(double eps, std::shared_ptr<const FieldScenario> field,
                                  std::shared_ptr<const MomentField> moments, const PhaseState& state0,
                                  const std::vector<double>& checkpoints, const IntegratorOptions& opt) {
    return integrate_flow(Flow::interpolated(eps, std::move(field), std::move(moments)), state0, checkpoints, opt);
}

double vlasov_evaluate(const PhaseDistribution& f0, const Flow& flow, double t, const Vec& x, const Vec& y,
                       const IntegratorOptions& opt) {
    if (f0.is_dirac()) throw std::invalid_argument("vlasov_evaluate: Dirac data has no pointwise value");
    Vec xs = x;
    xs(0) = t;
    if (t == 0.0) return f0.value(xs, y);
    PhaseState s{t, 0.0, xs, y};
    const PhaseState b = flow_to(flow, s, 0.0, opt, true);
    return f0.value(b.x, HyperboloidVector::normalize(b.y).components());
}

double speed2(const Vec& y) { return y.tail(y.size() - 1).squaredNorm() / (y(0) * y(0)); }

std::vector<ComparisonRecord> compare_flows(const ComparisonSetup& setup, const PhaseState& state0,
                                            const std::vector<double>& t_grid) {
    const Flow lor = Flow::lorentz(setup.field);
    const Flow avg = Flow::averaged(setup.field, setup.averaged_moments);
    const Trajectory tl = integrate_flow(lor, state0, t_grid, setup.opt);
    const Trajectory ta = integrate_flow(avg, state0, t_grid, setup.opt);
    std::vector<ComparisonRecord> out;
    out.reserve(t_grid.size());
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        ComparisonRecord r;
        r.t = t_grid[i];
        r.lorentz = tl.samples[i];
        r.averaged = ta.samples[i];
        const Vec U = mean_frame(setup.lorentz_moments->at(r.lorentz.x));
        const EtaBar eb(U);
        r.position_gap = eb.norm(r.averaged.x - r.lorentz.x);
        r.velocity_gap = eb.norm(r.averaged.y - r.lorentz.y);
        const double f = vlasov_evaluate(setup.f0, lor, r.t, r.lorentz.x, r.lorentz.y, setup.opt);
        const double ft = vlasov_evaluate(setup.f0, avg, r.t, r.lorentz.x, r.lorentz.y, setup.opt);
        r.f_gap = std::abs(f - ft);
        r.theta2 = std::abs(speed2(r.lorentz.y) - speed2(U));
        r.theta2_bar = std::abs(speed2(U) - speed2(r.averaged.y));
        r.dlogE_dt = setup.dlogE_dt ? setup.dlogE_dt(r.t) : 0.0;
        r.averaged_norm_drift = std::abs(minkowski_inner(r.averaged.y, r.averaged.y) - 1.0);
        r.lorentz_norm_drift = std::abs(minkowski_inner(r.lorentz.y, r.lorentz.y) - 1.0);
        out.push_back(std::move(r));
    }
    return out;
}

QuadratureMomentField::QuadratureMomentField(PhaseDistribution f0, Flow flow, int nodes_per_axis, IntegratorOptions opt)
    : f0_(std::move(f0)), flow_(std::move(flow)), N_(nodes_per_axis), opt_(opt) {
    if (f0_.is_dirac()) throw std::invalid_argument("quadrature moments need a smooth profile");
    if (N_ < 2) throw std::invalid_argument("nodes_per_axis must be at least 2");
}

QuadratureMomentField::Grid QuadratureMomentField::locate(const Vec& x) const {
    const VelocityBall ball = f0_.quadrature_ball();
    const double t = x(0);
    if (t == 0.0) return {ball.center, ball.radius};
    const int n = f0_.dim();
    const int m = n - 1;
    const Vec c0 = ball.center.tail(m);
    auto back = [&](const Vec& ybar) -> Vec {
        PhaseState s{t, 0.0, x, HyperboloidVector::lift(ybar).components()};
        const PhaseState b = flow_to(flow_, s, 0.0, opt_, true);
        return HyperboloidVector::normalize(b.y).spatial();
    };
    // Initial guess: forward image of the profile centre from the same position.
    PhaseState s0{0.0, 0.0, x, ball.center};
    s0.x(0) = 0.0;
    Vec yb = HyperboloidVector::normalize(flow_to(flow_, s0, t, opt_, true).y).spatial();
    const double scale = std::max(1.0, c0.norm());
    for (int it = 0; it < 30; ++it) {
        const Vec r = back(yb) - c0;
        if (r.norm() <= 1e-12 * scale) break;
        Mat J(m, m);
        const double h = 1e-6 * std::max(1.0, yb.norm());
        for (int a = 0; a < m; ++a) {
            Vec yp = yb, ym = yb;
            yp(a) += h;
            ym(a) -= h;
            J.col(a) = (back(yp) - back(ym)) / (2.0 * h);
        }
        yb -= J.partialPivLu().solve(r);
    }
    const Vec center = HyperboloidVector::lift(yb).components();
    // Rest-chart Jacobian of the backward map at the centre sets the grid radius.
    const Mat Lc = boost_from_rest(center);
    const Mat L0inv = boost_to_rest(ball.center);
    auto back_rest = [&](const Vec& u) -> Vec {
        const Vec y = Lc * HyperboloidVector::lift(u).components();
        const Vec yb0 = back(y.tail(m));
        const Vec z = L0inv * HyperboloidVector::lift(yb0).components();
        return z.tail(m);
    };
    Mat A(m, m);
    const double h = 1e-4 * ball.radius;
    for (int a = 0; a < m; ++a) {
        Vec up = Vec::Zero(m), um = Vec::Zero(m);
        up(a) = h;
        um(a) = -h;
        A.col(a) = (back_rest(up) - back_rest(um)) / (2.0 * h);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd{Eigen::MatrixXd(A)};
    const double smin = svd.singularValues()(m - 1);
    if (!(smin > 0.0)) throw DomainError("degenerate characteristic map");
    return {center, 1.15 * ball.radius / smin};
}

std::vector<FiberNode> QuadratureMomentField::nodes(const Vec& x) const { return build(x).second; }

std::pair<QuadratureMomentField::Grid, std::vector<FiberNode>> QuadratureMomentField::build(const Vec& x) const {
    Grid g = locate(x);
    const double t = x(0);
    auto f = [&](const Vec& y) { return vlasov_evaluate(f0_, flow_, t, x, y, opt_); };
    const Mat Linv = boost_to_rest(g.center);
    for (int attempt = 0; attempt < 6; ++attempt) {
        auto nodes = fiber_grid(g.center, g.radius, N_, f);
        bool shell = false;
        for (const auto& nd : nodes) {
            const Vec z = Linv * nd.y;
            if (z.tail(z.size() - 1).norm() > 0.85 * g.radius) {
                shell = true;
                break;
            }
        }
        if (!shell || t == 0.0) return {g, std::move(nodes)};
        g.radius *= 1.3;
    }
    throw DomainError("quadrature grid could not enclose the transported support");
}

MomentSet QuadratureMomentField::at(const Vec& x) const { return moments_from_nodes(nodes(x)); }

std::vector<FiberNodeGrad> QuadratureMomentField::nodes_with_gradients(const Vec& x, const Vec& U) const {
    const auto [g0, base] = build(x);
    const double t = x(0);
    const int n = f0_.dim();
    const int m = n - 1;
    const Mat Lc = boost_from_rest(g0.center);
    const Mat Lcinv = boost_to_rest(g0.center);
    const Mat LU = boost_from_rest(U);
    const double hs = 0.05 * 2.0 * g0.radius / N_;
    auto f = [&](const Vec& u) {
        return vlasov_evaluate(f0_, flow_, t, x, Lc * HyperboloidVector::lift(u).components(), opt_);
    };
    std::vector<FiberNodeGrad> out;
    out.reserve(base.size());
    for (const auto& nd : base) {
        FiberNodeGrad gn;
        static_cast<FiberNode&>(gn) = nd;
        const Vec z = Lcinv * nd.y;
        const Vec u = z.tail(m);
        Vec du(m);
        for (int a = 0; a < m; ++a) {
            Vec up = u, um = u;
            up(a) += hs;
            um(a) -= hs;
            du(a) = (f(up) - f(um)) / (2.0 * hs);
        }
        gn.grad = chart_jacobian(Lcinv, LU, nd.y).transpose() * du;
        out.push_back(std::move(gn));
    }
    return out;
}

}  // namespace avlab
