#include "avlab/fluid.hpp"

#include <cmath>

#include "avlab/geometry.hpp"

namespace avlab {

MeanVelocityField::MeanVelocityField(std::shared_ptr<const MomentField> moments) : moments_(std::move(moments)) {
    if (!moments_) throw std::invalid_argument("mean velocity field needs a moment field");
}

std::vector<MeanFieldSample> build_mean_field(const MeanVelocityField& field, const std::vector<Vec>& grid) {
    std::vector<MeanFieldSample> out;
    out.reserve(grid.size());
    for (const Vec& x : grid) {
        const MomentSet m = field.moments(x);
        MeanFieldSample s;
        s.x = x;
        s.V = m.first;
        s.q = minkowski_inner(m.first, m.first);
        s.u = mean_frame(m);
        s.rho = m.volume;
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

double incompat_from_moments(const FieldTensor& F, const MomentSet& m) {
    // q·F_μm <δᵐδˢδˡ> V^μ V_s V_l
    const int n = m.n;
    const Vec& V = m.first;
    const Vec Vl = lower_index(V);
    const Mat& Fl = F.lower();
    const double q = minkowski_inner(V, V);
    double s = 0.0;
    for (int mu = 0; mu < n; ++mu)
        for (int a = 0; a < n; ++a) {
            const double fv = Fl(mu, a) * V(mu);
            if (fv == 0.0) continue;
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c) s += fv * m.centered_at(a, b, c) * Vl(b) * Vl(c);
        }
    return q * s;
}

double incompat_expanded(const FieldTensor& F, const MomentSet& m) {
    const int n = m.n;
    const Vec& V = m.first;
    const Vec Vl = lower_index(V);
    const Mat& Fl = F.lower();
    const double q = minkowski_inner(V, V);
    double s2 = 0.0, s3 = 0.0;
    for (int mu = 0; mu < n; ++mu)
        for (int a = 0; a < n; ++a) {
            const double fv = Fl(mu, a) * V(mu);
            if (fv == 0.0) continue;
            for (int b = 0; b < n; ++b) {
                s2 += fv * (m.second(a, b) - V(a) * V(b)) * Vl(b);
                for (int c = 0; c < n; ++c) s3 += fv * m.centered_at(a, b, c) * Vl(b) * Vl(c);
            }
        }
    return 2.0 * q * s2 - s3;
}

}  // namespace

FluidResidual fluid_residual(const MeanVelocityField& Vfield, const ConnectionField& gamma, const FieldTensor& F,
                             const Vec& x, double h, int order) {
    FluidResidual r;
    r.x = x;
    const MomentSet m = Vfield.moments(x);
    const Vec V = m.first;
    r.q = minkowski_inner(V, V);
    const Vec U = mean_frame(m);
    auto Vf = [&Vfield](const Vec& p) { return Vfield.V(p); };
    auto uf = [&Vfield](const Vec& p) { return Vfield.u(p); };
    auto logq = [&Vfield](const Vec& p) {
        const Vec v = Vfield.V(p);
        return std::log(minkowski_inner(v, v));
    };
    r.r_V = covariant_derivative(gamma, Vf, Vf, x, h, order);
    r.r_u = covariant_derivative(gamma, uf, uf, x, h, order);
    const double dlogq = directional_derivative(logq, V, x, h, order);
    r.drift_term = (0.5 * dlogq / r.q) * V;
    r.r_u_identity = r.r_V / r.q - r.drift_term;
    r.identity_residual = eta_bar_norm(U, r.r_u - r.r_u_identity);
    r.incompat = -2.0 * minkowski_inner(gamma(x).contract(V, V), V);
    r.incompat_moments = incompat_from_moments(F, m);
    r.incompat_expanded = incompat_expanded(F, m);
    r.norm_r_V = eta_bar_norm(U, r.r_V);
    r.norm_r_u = eta_bar_norm(U, r.r_u);
    return r;
}

NormalCoordinateCheck normal_coordinate_check(const MeanVelocityField& Vfield, const ConnectionField& gamma,
                                              const Vec& x0, double h) {
    NormalCoordinateCheck out;
    const ConnectionCoeffs g0 = gamma(x0);
    const CoordinateMap cm = normal_coordinates(x0, g0);
    out.gamma_at_base = cm.transform(g0, x0).max_abs();
    const Vec U = Vfield.u(x0);
    auto Vf = [&Vfield](const Vec& p) { return Vfield.V(p); };
    // V'(x') = J(x) V(x), x = inverse(x')
    auto Vp = [&](const Vec& xp) {
        const Vec x = cm.inverse(xp);
        return Vec(cm.jacobian(x) * Vfield.V(x));
    };
    const ConnectionField zero = [n = static_cast<int>(x0.size())](const Vec&) { return ConnectionCoeffs(n); };
    const Vec x0p = cm.forward(x0);
    auto gap = [&](double step, Vec* rl, Vec* rn) {
        const Vec r_lab = covariant_derivative(gamma, Vf, Vf, x0, step, 2);
        const Vec r_nc = covariant_derivative(zero, Vp, Vp, x0p, step, 2);
        if (rl) *rl = r_lab;
        if (rn) *rn = r_nc;
        return eta_bar_norm(U, r_nc - cm.jacobian(x0) * r_lab);
    };
    out.residual_gap = gap(h, &out.r_lab, &out.r_normal);
    out.residual_gap_half = gap(0.5 * h, nullptr, nullptr);
    out.order = (out.residual_gap > 0.0 && out.residual_gap_half > 0.0)
                    ? std::log2(out.residual_gap / out.residual_gap_half)
                    : 0.0;
    return out;
}

double third_moment_norm(const MomentSet& m, const Vec& U) {
    const int n = m.n;
    const Mat L = boost_to_rest(U);
    double s = 0.0;
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double v = 0.0;
                for (int i = 0; i < n; ++i) {
                    if (L(a, i) == 0.0) continue;
                    for (int j = 0; j < n; ++j) {
                        const double lij = L(a, i) * L(b, j);
                        if (lij == 0.0) continue;
                        for (int k = 0; k < n; ++k) v += lij * L(c, k) * m.centered_at(i, j, k);
                    }
                }
                s += v * v;
            }
    return std::sqrt(s);
}

Vec mean_derivative_along(const MeanVelocityField& Vfield, const Vec& x, const Vec& U, double h, int order) {
    Vec d = Vec::Zero(x.size());
    const auto n = x.size();
    for (Eigen::Index k = 0; k < n; ++k) {
        auto comp = [&Vfield, k](const Vec& p) { return Vfield.V(p)(k); };
        d(k) = directional_derivative(comp, U, x, h, order);
    }
    return d;
}

FluidBoundRhs fluid_bound_rhs(const std::vector<FiberNodeGrad>& nodes, const Vec& U, const Vec& dV0) {
    FluidBoundRhs r;
    std::vector<FiberNode> plain(nodes.begin(), nodes.end());
    const MomentSet m = moments_from_nodes(plain);
    const SupportStats st = support_stats(plain);
    r.alpha = st.alpha;
    r.vol = m.volume;
    r.vol_E = m.volume_E;
    if (plain.size() == 1 || r.alpha == 0.0) return r;  // Dirac limit: the bound vanishes
    const SobolevNorms sn = sobolev_norms(nodes, U, m.first, dV0, r.alpha);
    r.norm_11 = sn.norm_11;
    r.norm_02_sum = sn.norm_02_sum;
    r.floored = sn.floored;
    const double core = r.norm_02_sum * r.norm_11 * r.alpha * r.alpha;
    r.rhs = std::sqrt(r.vol_E) / r.vol * core;
    r.rhs_volE = core / std::sqrt(r.vol_E);
    return r;
}

FluidBoundRhs fluid_bound_rhs(const PhaseDistribution& f, const Vec& x, const Vec& dV0) {
    if (f.is_dirac()) {
        FluidBoundRhs r;
        const auto q = f.quadrature(x);
        if (q.empty()) throw DomainError("fluid_bound_rhs: empty support");
        r.vol = q.front().weight();
        r.vol_E = q.front().cell;
        return r;
    }
    const SupportStats st = support_stats(f, x);
    return fluid_bound_rhs(nodes_with_gradients(f, x, st.U), st.U, dV0);
}

std::vector<BoundReport> check_fluid_bound(const MeanVelocityField& Vfield, const ConnectionField& gamma,
                                     const FieldTensor& F, const FiberSource& fiber, const std::vector<Vec>& grid,
                                     double h, double alpha_max, int order) {
    std::vector<BoundReport> out;
    out.reserve(grid.size());
    for (const Vec& x : grid) {
        BoundReport b;
        b.x = x;
        const FluidResidual fr = fluid_residual(Vfield, gamma, F, x, h, order);
        const MomentSet m = Vfield.moments(x);
        const Vec U = mean_frame(m);
        b.measured = fr.norm_r_V;
        b.third_moment = third_moment_norm(m, U);
        const Vec dV0 = mean_derivative_along(Vfield, x, U, h, order);
        b.rhs = fluid_bound_rhs(fiber.nodes(x, U), U, dV0);
        b.alpha = b.rhs.alpha;
        const double slack = alpha_max > 0.0 ? 0.5 * b.alpha / alpha_max : 0.0;
        b.pass = b.measured <= b.rhs.rhs * (1.0 + slack);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<DecompositionReport> check_decomposition(const MeanVelocityField& Vfield, const ConnectionField& gamma,
                                       const FieldTensor& F, const std::vector<Vec>& grid, double h) {
    std::vector<DecompositionReport> out;
    out.reserve(grid.size());
    for (const Vec& x : grid) {
        DecompositionReport p;
        p.x = x;
        p.h = h;
        const FluidResidual r1 = fluid_residual(Vfield, gamma, F, x, h, 2);
        const FluidResidual r2 = fluid_residual(Vfield, gamma, F, x, 0.5 * h, 2);
        const FluidResidual r4 = fluid_residual(Vfield, gamma, F, x, 0.25 * h, 2);
        const MomentSet m = Vfield.moments(x);
        p.norm_r_u = r1.norm_r_u;
        p.incompat = r1.incompat;
        p.incompat_moments = r1.incompat_moments;
        p.incompat_expanded = r1.incompat_expanded;
        p.third_moment = third_moment_norm(m, mean_frame(m));
        p.identity_residual = r1.identity_residual;
        p.identity_residual_h2 = r2.identity_residual;
        p.identity_residual_h4 = r4.identity_residual;
        // Slope of log residual against log h over the three steps.
        const double xs[3] = {std::log(h), std::log(0.5 * h), std::log(0.25 * h)};
        const double ys[3] = {r1.identity_residual, r2.identity_residual, r4.identity_residual};
        if (ys[0] > 0.0 && ys[1] > 0.0 && ys[2] > 0.0) {
            double mx = 0, my = 0;
            for (int i = 0; i < 3; ++i) mx += xs[i] / 3, my += std::log(ys[i]) / 3;
            double sxy = 0, sxx = 0;
            for (int i = 0; i < 3; ++i) {
                sxy += (xs[i] - mx) * (std::log(ys[i]) - my);
                sxx += (xs[i] - mx) * (xs[i] - mx);
            }
            p.identity_order = sxy / sxx;
        }
        out.push_back(std::move(p));
    }
    return out;
}

ConnectionField averaged_connection_field(std::shared_ptr<const FieldScenario> field,
                                          std::shared_ptr<const MomentField> moments) {
    return [field, moments](const Vec& x) { return averaged_coeffs(field->field(x), moments->at(x)); };
}

ConnectionField lorentz_connection_field(std::shared_ptr<const FieldScenario> field, const MeanVelocityField& u_field) {
    return [field, &u_field](const Vec& x) { return lorentz_coeffs(field->field(x), u_field.u(x)); };
}

std::vector<LorentzFluidReport> check_lorentz_fluid(std::shared_ptr<const FieldScenario> field, const MeanVelocityField& u_field,
                                     const std::vector<Vec>& grid, double h, double t_end,
                                     const IntegratorOptions& opt, int order) {
    const ConnectionField gl = lorentz_connection_field(field, u_field);
    auto uf = [&u_field](const Vec& p) { return u_field.u(p); };
    const int n = field->dim();
    std::vector<LorentzFluidReport> out;
    out.reserve(grid.size());
    for (const Vec& x : grid) {
        LorentzFluidReport r;
        r.x = x;
        const Vec u = u_field.u(x);
        r.residual = eta_bar_norm(u, covariant_derivative(gl, uf, uf, x, h, order));
        r.curve_time = t_end;
        if (t_end > x(0)) {
            // Integral curve of u in lab time: dx/dt = u/u⁰.
            OdeState s(x.data(), x.data() + n);
            integrate_checkpoints(
                [&](const OdeState& st, OdeState& ds, double t) {
                    Vec p = Eigen::Map<const Vec>(st.data(), n);
                    p(0) = t;
                    const Vec w = u_field.u(p);
                    for (int i = 0; i < n; ++i) ds[i] = w(i) / w(0);
                },
                s, {x(0), t_end}, opt, [](const OdeState&, double) {});
            Vec xc = Eigen::Map<const Vec>(s.data(), n);
            xc(0) = t_end;
            const PhaseState lor = flow_to(Flow::lorentz(field), PhaseState{x(0), 0.0, x, u}, t_end, opt);
            r.curve_gap = eta_bar_norm(u_field.u(lor.x), xc - lor.x);
        }
        out.push_back(std::move(r));
    }
    return out;
}

}  // namespace avlab
