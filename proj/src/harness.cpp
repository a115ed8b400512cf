#include "avlab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include "avlab/ensemble.hpp"
#include "avlab/fluid.hpp"
#include "avlab/geometry.hpp"
#include "avlab/kinetic.hpp"
#include "json.hpp"

#ifndef AVLAB_VERSION
#define AVLAB_VERSION "0.0.0"
#endif

namespace avlab {

using ojson = nlohmann::ordered_json;

std::string code_version() { return AVLAB_VERSION; }

std::string to_string(CheckStatus s) {
    switch (s) {
        case CheckStatus::pass: return "pass";
        case CheckStatus::fail: return "fail";
        default: return "skipped";
    }
}

std::vector<std::string> comparison_columns() {
    std::vector<std::string> c = {"scenario", "alpha", "rapidity", "energy", "t", "t_unit", "t_lab", "status", "note",
                                  "alpha_t", "energy_t", "averaged_alpha_t", "averaged_energy_t", "dlogE_dt",
                                  "theta2", "theta2_bar", "theta_gap", "energy_ok", "narrow_ok", "adiabatic_ok",
                                  "theta_ok", "in_regime", "position_gap", "velocity_gap", "f_gap",
                                  "lorentz_norm_drift", "averaged_norm_drift"};
    for (const char* p : {"lorentz_x", "averaged_x", "lorentz_y", "averaged_y"})
        for (int i = 0; i < 4; ++i) c.push_back(p + std::to_string(i));
    c.push_back("delta_ratio_lorentz");
    c.push_back("delta_ratio_averaged");
    return c;
}

std::vector<std::string> fluid_columns() {
    return {"scenario", "alpha", "rapidity", "energy", "t", "point", "x1", "x2", "x3", "h", "status", "note",
            "alpha_t", "energy_t", "in_regime", "q", "norm_r_V", "norm_r_u", "bound_alpha", "bound_rhs",
            "bound_rhs_volE", "vol", "vol_E", "norm_11", "norm_02_sum", "floored", "third_moment",
            "identity_residual", "identity_residual_h2", "identity_residual_h4", "identity_order", "incompat",
            "incompat_moments", "incompat_expanded", "lorentz_residual", "curve_gap", "nc_h", "nc_gamma_base", "nc_gap", "nc_gap_half",
            "nc_order", "delta_ratio_lorentz", "delta_ratio_averaged"};
}

namespace {

// Finite-difference round-off: ε·γ²/h reaches ~1e-11 at h = α/4, γ ~ 20. Every physical quantity in a
// scan is at least four decades above this floor.
constexpr double kRoundoff = 1e-9;
constexpr double kIdentityTol = 1e-6;
constexpr double kNormalBaseTol = 1e-10;
constexpr double kNormalGapFloor = 1e-9;
constexpr double kNormalMinOrder = 1.7;
constexpr double kDeltaBound = 1.5;

struct PairSpec {
    double alpha;
    double rapidity;
};

struct PairOutput {
    std::vector<std::vector<std::string>> comparison;
    std::vector<std::vector<std::string>> fluid;
};

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out(static_cast<Eigen::Index>(i)) = v[i];
    return out;
}

std::vector<PairSpec> make_pairs(const ScanConfig& c) {
    std::vector<PairSpec> out;
    if (c.grid == ScanGrid::full) {
        for (double r : c.rapidities)
            for (double a : c.alphas) out.push_back({a, r});
        return out;
    }
    for (double a : c.alphas) out.push_back({a, c.rapidity_ref});
    for (double r : c.rapidities)
        if (r != c.rapidity_ref) out.push_back({c.alpha_ref, r});
    return out;
}

std::vector<Vec> probe_points(const ScanConfig& c) {
    const int m = c.dim - 1;
    std::vector<Vec> pts;
    for (const auto& p : c.fluid.points) pts.push_back(to_vec(p));
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> u(-c.fluid.random_radius, c.fluid.random_radius);
    for (int k = 0; k < c.fluid.random_points; ++k) {
        Vec p(m);
        for (int i = 0; i < m; ++i) p(i) = u(rng);
        pts.push_back(p);
    }
    return pts;
}

double delta_ratio(const SupportStats& st) { return st.alpha > 0.0 ? st.max_delta / st.alpha : 0.0; }

struct PairContext {
    const ScanConfig& c;
    std::shared_ptr<const FieldScenario> field;
    const std::vector<Vec>& points;
    const Table& comp_schema;
    const Table& fluid_schema;
};

void set_identity(Row& row, const ScanConfig& c, const PairSpec& p) {
    row.set("scenario", c.scenario);
    row.set("alpha", p.alpha);
    row.set("rapidity", p.rapidity);
    row.set("energy", std::cosh(p.rapidity));
}

void set_vec4(Row& row, const std::string& prefix, const Vec& v) {
    for (int i = 0; i < 4 && i < v.size(); ++i) row.set(prefix + std::to_string(i), v(i));
}

PairOutput run_pair(const PairContext& ctx, const PairSpec& p) {
    const ScanConfig& c = ctx.c;
    const auto& field = ctx.field;
    const int n = c.dim;
    PairOutput out;

    const double E_nom = std::cosh(p.rapidity);
    const double period = c.time_unit == TimeUnit::gyro_period ? 2.0 * std::numbers::pi * E_nom / field->strength() : 1.0;
    std::vector<double> t_lab;
    for (double t : c.times) t_lab.push_back(t * period);
    const double h = c.fluid.h_over_alpha * p.alpha;
    const double reach = (c.fluid.order == 4 ? 2.0 : 1.0) * h + 5.0 * c.sample_dt;
    const double t_fluid = c.fluid.time;

    auto fail_all = [&](const std::string& status, const std::string& note) {
        for (std::size_t k = 0; k < c.times.size(); ++k) {
            Row row(ctx.comp_schema);
            set_identity(row, c, p);
            row.set("t", c.times[k]).set("t_unit", to_string(c.time_unit)).set("t_lab", t_lab[k]);
            row.set("status", status).set("note", note).set("in_regime", false);
            out.comparison.push_back(row.cells());
        }
        if (c.fluid.enabled)
            for (std::size_t k = 0; k < ctx.points.size(); ++k) {
                Row row(ctx.fluid_schema);
                set_identity(row, c, p);
                row.set("t", t_fluid).set("point", static_cast<int>(k)).set("h", h);
                row.set("status", status).set("note", note).set("in_regime", false);
                out.fluid.push_back(row.cells());
            }
    };

    BeamOptions bo;
    bo.kind = c.profile;
    bo.skew = c.skew;
    if (!c.skew_direction.empty()) bo.skew_direction = to_vec(c.skew_direction);
    bo.nodes_per_axis = c.nodes_per_axis;
    bo.slab = SlabWindow{c.slab_half_width, c.slab_edge};
    bo.gaussian_sigma = c.gaussian_sigma;
    std::optional<PhaseDistribution> f0o;
    try {
        f0o = make_beam_distribution(p.rapidity, to_vec(c.direction), p.alpha, bo);
    } catch (const std::exception& e) {
        fail_all("failed", std::string("initial distribution: ") + e.what());
        return out;
    }
    const PhaseDistribution& f0 = *f0o;

    // Moment sources.
    std::shared_ptr<EnsembleMomentField> ensL, ensA;
    std::shared_ptr<QuadratureMomentField> quadL;
    std::shared_ptr<const MomentField> momL, momA;
    std::string fluid_note;
    bool fluid_ok = c.fluid.enabled;
    if (field->homogeneous()) {
        EnsembleOptions eo;
        eo.t_end = *std::max_element(t_lab.begin(), t_lab.end());
        if (c.fluid.enabled) eo.t_end = std::max(eo.t_end, t_fluid + std::max(c.fluid.curve_time, reach));
        eo.t_begin = c.fluid.enabled ? std::min(0.0, t_fluid - reach) : 0.0;
        eo.sample_dt = c.sample_dt;
        std::vector<double> cps = t_lab;
        cps.push_back(0.0);
        if (c.fluid.enabled) cps.push_back(t_fluid);
        std::sort(cps.begin(), cps.end());
        cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
        eo.checkpoints = cps;
        eo.integ = c.integ;
        eo.x_ref = Vec::Zero(n);
        eo.max_rhs_evals = c.max_rhs_evals;
        auto build = [&](FlowKind kind, double eps) -> std::shared_ptr<EnsembleMomentField> {
            try {
                return std::make_shared<EnsembleMomentField>(f0, field, kind, eps, eo);
            } catch (const Error& e) {
                if (eo.t_begin >= 0.0) throw;
                // The backward extension only serves the fluid stencils; retry without it.
                fluid_ok = false;
                fluid_note = std::string("backward transport failed: ") + e.what();
                EnsembleOptions fwd = eo;
                fwd.t_begin = 0.0;
                return std::make_shared<EnsembleMomentField>(f0, field, kind, eps, fwd);
            }
        };
        try {
            ensL = build(FlowKind::lorentz, 0.0);
            momL = ensL;
            if (c.moments == MomentMode::transported) {
                ensA = build(FlowKind::averaged, 1.0);
                momA = ensA;
            } else {
                momA = std::make_shared<FrozenMomentField>(f0);
            }
        } catch (const std::exception& e) {
            fail_all("transport_failed", e.what());
            return out;
        }
    } else {
        quadL = std::make_shared<QuadratureMomentField>(f0, Flow::lorentz(field), c.nodes_per_axis, c.integ);
        momL = quadL;
        momA = c.moments == MomentMode::transported ? std::static_pointer_cast<const MomentField>(quadL)
                                                    : std::make_shared<FrozenMomentField>(f0);
    }
    const double averaged_valid = ensA ? ensA->valid_until() : std::numeric_limits<double>::infinity();

    // Test particle inside the initial support.
    const BumpProfile& prof = f0.profile();
    const Vec pdir = c.probe_direction.empty() ? prof.skew_direction() : to_vec(c.probe_direction).normalized();
    PhaseState s0;
    s0.t = 0.0;
    s0.x = Vec::Zero(n);
    s0.y = boost_from_rest(prof.center()) *
           HyperboloidVector::lift(Vec(c.probe_offset * prof.radius() * pdir)).components();

    ComparisonSetup setup{field, f0, momL, momA, nullptr, c.integ};
    if (ensL) setup.dlogE_dt = [ensL](double t) { return ensL->dlogE_dt(t); };

    // Comparison cells: whole grid first, then cell by cell if anything fails.
    // The ladder may be decreasing; integrate in increasing time and map back.
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < t_lab.size(); ++k)
        if (t_lab[k] <= averaged_valid) order.push_back(k);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return t_lab[a] < t_lab[b]; });
    std::vector<double> grid;
    for (std::size_t k : order) grid.push_back(t_lab[k]);
    std::vector<std::optional<ComparisonRecord>> recs(t_lab.size());
    std::vector<std::string> cell_err(t_lab.size());
    if (!grid.empty()) {
        try {
            const auto all = compare_flows(setup, s0, grid);
            for (std::size_t j = 0; j < all.size(); ++j) recs[order[j]] = all[j];
        } catch (const std::exception&) {
            for (std::size_t j = 0; j < grid.size(); ++j) {
                try {
                    recs[order[j]] = compare_flows(setup, s0, {grid[j]}).front();
                } catch (const std::exception& e) {
                    cell_err[order[j]] = e.what();
                }
            }
        }
    }

    for (std::size_t k = 0; k < t_lab.size(); ++k) {
        const double t = t_lab[k];
        Row row(ctx.comp_schema);
        set_identity(row, c, p);
        row.set("t", c.times[k]).set("t_unit", to_string(c.time_unit)).set("t_lab", t);
        std::optional<SupportStats> stL, stA;
        try {
            if (ensL) stL = ensL->stats(t);
            else if (recs[k]) stL = support_stats(quadL->nodes(recs[k]->lorentz.x));
        } catch (const std::exception&) {
        }
        try {
            if (ensA && t <= averaged_valid) stA = ensA->stats(t);
        } catch (const std::exception&) {
        }
        bool narrow = false, energetic = false;
        if (stL) {
            narrow = stL->alpha < c.alpha_regime;
            energetic = stL->energy > c.energy_regime;
            row.set("alpha_t", stL->alpha).set("energy_t", stL->energy).set("delta_ratio_lorentz", delta_ratio(*stL));
            row.set("narrow_ok", narrow).set("energy_ok", energetic);
            if (ensL) {
                const double d = ensL->dlogE_dt(t);
                row.set("dlogE_dt", d).set("adiabatic_ok", std::abs(d) < c.theta_flag);
            }
        }
        if (stA) {
            row.set("averaged_alpha_t", stA->alpha).set("averaged_energy_t", stA->energy);
            row.set("delta_ratio_averaged", delta_ratio(*stA));
        }
        row.set("in_regime", stL.has_value() && narrow && energetic);
        if (recs[k]) {
            const ComparisonRecord& r = *recs[k];
            row.set("status", "ok").set("note", "");
            row.set("theta2", r.theta2).set("theta2_bar", r.theta2_bar);
            const double tg = std::abs(r.theta2 - r.theta2_bar);
            row.set("theta_gap", tg).set("theta_ok", tg < c.theta_flag);
            row.set("position_gap", r.position_gap).set("velocity_gap", r.velocity_gap).set("f_gap", r.f_gap);
            row.set("lorentz_norm_drift", r.lorentz_norm_drift).set("averaged_norm_drift", r.averaged_norm_drift);
            set_vec4(row, "lorentz_x", r.lorentz.x);
            set_vec4(row, "averaged_x", r.averaged.x);
            set_vec4(row, "lorentz_y", r.lorentz.y);
            set_vec4(row, "averaged_y", r.averaged.y);
            if (!ensL) row.set("dlogE_dt", r.dlogE_dt);
        } else if (t > averaged_valid) {
            row.set("status", "transport_failed").set("note", "averaged transport ended at t=" +
                                                                   format_double(averaged_valid) + ": " +
                                                                   ensA->failure());
        } else {
            row.set("status", "integration_failed").set("note", cell_err[k]);
        }
        out.comparison.push_back(row.cells());
    }

    if (!c.fluid.enabled) return out;

    // Fluid probes on the slice t = t_fluid.
    const MeanVelocityField Vfield(momA);
    const MeanVelocityField ufield(momL);
    const ConnectionField gamma = averaged_connection_field(field, momA);
    FiberSource fiber;
    if (ensA) fiber.nodes = [ensA](const Vec& x, const Vec& U) { return ensA->fiber_with_gradients(x(0), U); };
    else if (quadL && c.moments == MomentMode::transported)
        fiber.nodes = [quadL](const Vec& x, const Vec& U) { return quadL->nodes_with_gradients(x, U); };
    else fiber.nodes = [&f0](const Vec& x, const Vec& U) { return nodes_with_gradients(f0, x, U); };

    for (std::size_t k = 0; k < ctx.points.size(); ++k) {
        Vec x(n);
        x(0) = t_fluid;
        x.tail(n - 1) = ctx.points[k];
        Row row(ctx.fluid_schema);
        set_identity(row, c, p);
        row.set("t", t_fluid).set("point", static_cast<int>(k)).set("h", h);
        for (int i = 1; i < n && i <= 3; ++i) row.set("x" + std::to_string(i), x(i));
        if (!fluid_ok) {
            row.set("status", "transport_failed").set("note", fluid_note).set("in_regime", false);
            out.fluid.push_back(row.cells());
            continue;
        }
        try {
            const SupportStats stL = ensL ? ensL->stats(t_fluid) : support_stats(quadL->nodes(x));
            row.set("alpha_t", stL.alpha).set("energy_t", stL.energy).set("delta_ratio_lorentz", delta_ratio(stL));
            row.set("in_regime", stL.alpha < c.alpha_regime && stL.energy > c.energy_regime);
            if (ensA) row.set("delta_ratio_averaged", delta_ratio(ensA->stats(t_fluid)));
            const FieldTensor F = field->field(x);
            const FluidResidual fr = fluid_residual(Vfield, gamma, F, x, h, c.fluid.order);
            const BoundReport b = check_fluid_bound(Vfield, gamma, F, fiber, {x}, h, c.alpha_regime, c.fluid.order)[0];
            const DecompositionReport d = check_decomposition(Vfield, gamma, F, {x}, h)[0];
            const LorentzFluidReport lf =
                check_lorentz_fluid(field, ufield, {x}, h, t_fluid + c.fluid.curve_time, c.integ, c.fluid.order)[0];
            // The quadratic normal chart is invertible only within |x − x₀| ≲ 1/max|Γ₀|.
            const double gmax = gamma(x).max_abs();
            const double h_nc = gmax > 0.0 ? std::min(h, 1.0 / gmax) : h;
            const NormalCoordinateCheck nc = normal_coordinate_check(Vfield, gamma, x, h_nc);
            row.set("status", "ok").set("note", "");
            row.set("q", fr.q).set("norm_r_V", fr.norm_r_V).set("norm_r_u", fr.norm_r_u);
            row.set("bound_alpha", b.rhs.alpha).set("bound_rhs", b.rhs.rhs).set("bound_rhs_volE", b.rhs.rhs_volE);
            row.set("vol", b.rhs.vol).set("vol_E", b.rhs.vol_E).set("norm_11", b.rhs.norm_11);
            row.set("norm_02_sum", b.rhs.norm_02_sum).set("floored", b.rhs.floored);
            row.set("third_moment", b.third_moment);
            row.set("identity_residual", d.identity_residual).set("identity_residual_h2", d.identity_residual_h2);
            row.set("identity_residual_h4", d.identity_residual_h4).set("identity_order", d.identity_order);
            row.set("incompat", d.incompat).set("incompat_moments", d.incompat_moments);
            row.set("incompat_expanded", d.incompat_expanded);
            row.set("lorentz_residual", lf.residual).set("curve_gap", lf.curve_gap);
            row.set("nc_h", h_nc).set("nc_gamma_base", nc.gamma_at_base).set("nc_gap", nc.residual_gap);
            row.set("nc_gap_half", nc.residual_gap_half).set("nc_order", nc.order);
        } catch (const std::exception& e) {
            row.set("status", "failed").set("note", e.what());
        }
        out.fluid.push_back(row.cells());
    }
    return out;
}

// ---- checks ----

bool is_true(const std::string& s) { return s == "1"; }

struct Sample {
    std::vector<double> x, y;
    int failed_in_regime = 0;
};

template <class Pred>
Sample select(const Table& t, const std::string& xcol, const std::string& ycol, Pred pred) {
    Sample s;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        if (!pred(i) || !is_true(t.cell(i, "in_regime"))) continue;
        if (t.cell(i, "status") != "ok") {
            ++s.failed_in_regime;
            continue;
        }
        s.x.push_back(t.number(i, xcol));
        s.y.push_back(t.number(i, ycol));
    }
    return s;
}

CheckResult exponent_check(ScanResult& r, const std::string& name, const std::string& description, const Sample& s,
                           const std::string& quantity, const std::string& abscissa, double target, double tol) {
    CheckResult cr;
    cr.name = name;
    cr.description = description;
    cr.quantity = quantity + " exponent in " + abscissa;
    cr.target = target;
    cr.tolerance = tol;
    cr.points = static_cast<int>(s.x.size());
    if (s.x.empty()) {
        cr.status = CheckStatus::skipped;
        cr.measured = std::nan("");
        cr.note = s.failed_in_regime ? "all in-regime cells failed" : "no in-regime cells";
        if (s.failed_in_regime) cr.status = CheckStatus::fail;
        return cr;
    }
    if (std::all_of(s.y.begin(), s.y.end(), [](double v) { return std::abs(v) <= kRoundoff; })) {
        cr.status = s.failed_in_regime ? CheckStatus::fail : CheckStatus::pass;
        cr.measured = 0.0;
        cr.note = "zero to round-off";
        return cr;
    }
    ScalingFit f = fit_scaling(s.x, s.y, quantity, abscissa);
    r.fits.push_back({name, f});
    cr.measured = f.valid ? f.exponent : std::nan("");
    if (!f.valid) {
        const bool short_ladder = s.x.size() < 3;
        cr.status = short_ladder ? CheckStatus::skipped : CheckStatus::fail;
        cr.note = short_ladder ? "fewer than 3 in-regime cells" : "fit invalid: " + f.note;
    } else {
        cr.status = std::abs(f.exponent - target) <= tol ? CheckStatus::pass : CheckStatus::fail;
        std::ostringstream os;
        os << "R2=" << format_double(f.r2) << " prefactor=" << format_double(f.prefactor);
        cr.note = os.str();
    }
    if (s.failed_in_regime) {
        cr.status = CheckStatus::fail;
        cr.note += "; " + std::to_string(s.failed_in_regime) + " in-regime cell(s) failed";
    }
    return cr;
}

CheckResult bound_check(const std::string& name, const std::string& description, const std::string& quantity,
                        double measured, double bound, int points, int failed) {
    CheckResult cr;
    cr.name = name;
    cr.description = description;
    cr.quantity = quantity;
    cr.upper_bound = true;
    cr.target = bound;
    cr.points = points;
    cr.measured = measured;
    if (points == 0) {
        cr.status = failed ? CheckStatus::fail : CheckStatus::skipped;
        cr.note = failed ? "all cells failed" : "no cells";
        return cr;
    }
    cr.status = measured <= bound ? CheckStatus::pass : CheckStatus::fail;
    if (failed) {
        cr.status = CheckStatus::fail;
        cr.note = std::to_string(failed) + " cell(s) failed";
    }
    return cr;
}

}  // namespace

void evaluate_checks(ScanResult& r) {
    const ScanConfig& c = r.config;
    const Table& cmp = r.comparison;
    const Table& fl = r.fluid;
    r.fits.clear();
    r.checks.clear();

    auto num = [](const Table& t, std::size_t i, const char* col) { return t.number(i, col); };
    auto at_alpha_ladder = [&](std::size_t i) {
        return num(cmp, i, "rapidity") == c.rapidity_ref && num(cmp, i, "t") == c.time_ref;
    };
    auto at_time_ladder = [&](std::size_t i) {
        return num(cmp, i, "rapidity") == c.rapidity_ref && num(cmp, i, "alpha") == c.alpha_ref;
    };
    auto at_energy_ladder = [&](std::size_t i) {
        return num(cmp, i, "alpha") == c.alpha_ref && num(cmp, i, "t") == c.time_ref;
    };

    struct GapSpec {
        const char* prefix;
        const char* column;
        const char* label;
        double a, t, e;
    };
    const GapSpec gaps[] = {{"position_gap", "position_gap", "position gap", 2.0, 2.0, -2.0},
                            {"velocity_gap", "velocity_gap", "velocity gap", 2.0, 1.0, -1.0}};
    for (const auto& g : gaps) {
        const std::string pre = g.prefix;
        r.checks.push_back(exponent_check(r, pre + ".alpha_exponent",
                                          std::string(g.label) + " between Lorentz and averaged orbits against alpha",
                                          select(cmp, "alpha", g.column, at_alpha_ladder), g.column, "alpha", g.a, 0.3));
        r.checks.push_back(exponent_check(r, pre + ".time_exponent",
                                          std::string(g.label) + " against lab time",
                                          select(cmp, "t_lab", g.column, at_time_ladder), g.column, "t", g.t, 0.2));
        r.checks.push_back(exponent_check(r, pre + ".energy_exponent",
                                          std::string(g.label) + " against beam energy",
                                          select(cmp, "energy", g.column, at_energy_ladder), g.column, "energy", g.e,
                                          0.3));
    }
    r.checks.push_back(exponent_check(r, "distribution_gap.alpha_exponent",
                                      "|f - f~| along the Lorentz orbit against alpha",
                                      select(cmp, "alpha", "f_gap", at_alpha_ladder), "f_gap", "alpha", 2.0, 0.3));

    if (c.fluid.enabled) {
        auto fluid_alpha = [&](std::size_t i) { return num(fl, i, "rapidity") == c.rapidity_ref; };
        auto any = [](std::size_t) { return true; };
        r.checks.push_back(exponent_check(r, "fluid_residual.alpha_exponent",
                                          "averaged-connection residual of the mean velocity against alpha",
                                          select(fl, "alpha", "norm_r_V", fluid_alpha), "norm_r_V", "alpha", 2.0, 0.3));

        // C(K) from the bound's right-hand side, then the measured residual against C(K)·α²·(1 + slack).
        const Sample sb = select(fl, "bound_alpha", "bound_rhs", any);
        r.bound_constant = 0.0;
        for (std::size_t i = 0; i < sb.x.size(); ++i)
            if (sb.x[i] > 0.0) r.bound_constant = std::max(r.bound_constant, sb.y[i] / (sb.x[i] * sb.x[i]));
        const Sample sm = select(fl, "bound_alpha", "norm_r_V", any);
        double worst = 0.0;
        for (std::size_t i = 0; i < sm.x.size(); ++i) {
            const double a = sm.x[i];
            const double allowed = r.bound_constant * a * a * (1.0 + 0.5 * a / c.alpha_regime);
            const double excess = std::max(0.0, sm.y[i] - kRoundoff);
            const double ratio = allowed > 0.0 ? excess / allowed : (excess == 0.0 ? 0.0 : HUGE_VAL);
            worst = std::max(worst, ratio);
        }
        CheckResult cb = bound_check("fluid_residual.compact_bound",
                                     "residual within C(K) alpha^2 (1 + 0.5 alpha/alpha_max) at every in-regime probe",
                                     "max measured/allowed", worst, 1.0, static_cast<int>(sm.x.size()),
                                     sm.failed_in_regime);
        cb.note = "C(K)=" + format_double(r.bound_constant) + (cb.note.empty() ? "" : "; " + cb.note);
        r.checks.push_back(cb);

        r.checks.push_back(exponent_check(r, "third_moment.alpha_exponent",
                                          "rest-frame third centred moment of f~ against alpha",
                                          select(fl, "alpha", "third_moment", fluid_alpha), "third_moment", "alpha",
                                          3.0, 0.3));

        const Sample si = select(fl, "h", "identity_residual", any);
        double max_id = 0.0;
        for (double v : si.y) max_id = std::max(max_id, v);
        r.checks.push_back(bound_check("decomposition.identity",
                                       "decomposition of the normalised residual, largest residual at h = alpha/4",
                                       "max identity residual", max_id, kIdentityTol, static_cast<int>(si.x.size()),
                                       si.failed_in_regime));

        const Sample so = select(fl, "identity_residual", "identity_order", any);
        CheckResult co;
        co.name = "decomposition.h_order";
        co.description = "h-refinement order of the decomposition residual";
        co.quantity = "order with the largest deviation from 2";
        co.target = 2.0;
        co.tolerance = 0.3;
        int counted = 0;
        double worst_dev = -1.0;
        co.measured = std::nan("");
        for (std::size_t i = 0; i < so.x.size(); ++i) {
            if (so.x[i] < kRoundoff) continue;
            ++counted;
            const double dev = std::abs(so.y[i] - 2.0);
            if (!(dev <= worst_dev)) {
                worst_dev = dev;
                co.measured = so.y[i];
            }
        }
        co.points = static_cast<int>(so.x.size());
        if (so.x.empty()) {
            co.status = so.failed_in_regime ? CheckStatus::fail : CheckStatus::skipped;
            co.note = so.failed_in_regime ? "all in-regime probes failed" : "no in-regime probes";
        } else if (counted == 0) {
            co.status = CheckStatus::pass;
            co.note = "identity residual at round-off at every probe";
        } else {
            co.status = worst_dev <= 0.3 ? CheckStatus::pass : CheckStatus::fail;
            co.note = std::to_string(counted) + " probe(s) above round-off";
        }
        if (so.failed_in_regime) co.status = CheckStatus::fail;
        r.checks.push_back(co);

        r.checks.push_back(exponent_check(r, "normalized_residual.alpha_exponent",
                                          "residual of the normalised mean velocity against alpha",
                                          select(fl, "alpha", "norm_r_u", fluid_alpha), "norm_r_u", "alpha", 2.0, 0.3));

        // The direct incompatibility term against its exact moment expansion.
        const Sample sx = select(fl, "incompat", "incompat_expanded", any);
        double worst_inc = 0.0;
        for (std::size_t i = 0; i < sx.x.size(); ++i)
            worst_inc = std::max(worst_inc, std::abs(sx.x[i] - sx.y[i]) / std::max(1e-300, std::abs(sx.x[i]) + 1e-12));
        r.checks.push_back(bound_check("incompatibility.expansion",
                                       "metric-incompatibility term against its first-to-third moment expansion",
                                       "max relative difference", worst_inc, 1e-6, static_cast<int>(sx.x.size()),
                                       sx.failed_in_regime));

        r.checks.push_back(exponent_check(r, "integral_curve.alpha_exponent",
                                          "integral curve of the mean frame against the Lorentz orbit, gap against alpha",
                                          select(fl, "alpha", "curve_gap", fluid_alpha), "curve_gap", "alpha", 2.0, 0.3));

        r.checks.push_back(exponent_check(r, "lorentz_fluid_residual.alpha_exponent",
                                          "Lorentz-connection residual of the true mean frame against alpha",
                                          select(fl, "alpha", "lorentz_residual", fluid_alpha), "lorentz_residual",
                                          "alpha", 2.0, 0.3));
    }

    // δ-bound over every cell and probe that produced node data, regardless of regime.
    double max_ratio = 0.0;
    int npts = 0;
    for (const Table* t : {&cmp, &fl})
        for (std::size_t i = 0; i < t->rows.size(); ++i)
            for (const char* col : {"delta_ratio_lorentz", "delta_ratio_averaged"}) {
                const double v = t->number(i, col);
                if (std::isnan(v)) continue;
                ++npts;
                max_ratio = std::max(max_ratio, v);
            }
    CheckResult cd = bound_check("delta_bound", "max over nodes of |<y> - y| relative to the support width alpha",
                                 "max |delta|/alpha", max_ratio, kDeltaBound, npts, 0);
    r.checks.push_back(cd);

    if (c.fluid.enabled) {
        double gmax = 0.0, min_order = HUGE_VAL;
        int ok = 0, failed = 0, above = 0;
        for (std::size_t i = 0; i < fl.rows.size(); ++i) {
            if (fl.cell(i, "status") != "ok") {
                ++failed;
                continue;
            }
            ++ok;
            gmax = std::max(gmax, fl.number(i, "nc_gamma_base"));
            if (fl.number(i, "nc_gap") >= kNormalGapFloor) {
                ++above;
                min_order = std::min(min_order, fl.number(i, "nc_order"));
            }
        }
        r.checks.push_back(bound_check("normal_coordinates.base_coefficients",
                                       "averaged connection coefficients at the base point of the normal chart",
                                       "max |Gamma'(x0)|", gmax, kNormalBaseTol, ok, failed));
        CheckResult cn;
        cn.name = "normal_coordinates.cross_check";
        cn.description = "residual in the normal chart against the transformed lab-chart residual";
        cn.quantity = "smallest refinement order where the gap exceeds 1e-9";
        cn.target = kNormalMinOrder;
        cn.points = ok;
        cn.measured = above ? min_order : 0.0;
        if (ok == 0) {
            cn.status = failed ? CheckStatus::fail : CheckStatus::skipped;
            cn.note = failed ? "all probes failed" : "no probes";
        } else if (above == 0) {
            cn.status = CheckStatus::pass;
            cn.note = "gap below 1e-9 at every probe";
        } else {
            cn.status = min_order >= kNormalMinOrder ? CheckStatus::pass : CheckStatus::fail;
            cn.note = std::to_string(above) + " probe(s) above 1e-9";
        }
        if (failed) cn.status = CheckStatus::fail;
        r.checks.push_back(cn);
    }

    // Hypothesis flag counts over the comparison cells.
    HypothesisCounts& h = r.hypotheses;
    h = HypothesisCounts{};
    for (std::size_t i = 0; i < cmp.rows.size(); ++i) {
        ++h.cells;
        h.in_regime += is_true(cmp.cell(i, "in_regime"));
        h.energy_ok += is_true(cmp.cell(i, "energy_ok"));
        h.narrow_ok += is_true(cmp.cell(i, "narrow_ok"));
        h.adiabatic_ok += is_true(cmp.cell(i, "adiabatic_ok"));
        h.theta_ok += is_true(cmp.cell(i, "theta_ok"));
        h.failed += cmp.cell(i, "status") != "ok";
    }
}

ScanResult run_scan(const ScanConfig& config) {
    ScanResult r;
    r.config = config;
    ScanConfig hashed = config;
    hashed.output_dir.clear();
    hashed.threads = 1;
    r.config.canonical = to_json(hashed);
    r.config_hash = fnv1a_hex(r.config.canonical);

    const auto field = make_scenario(config.scenario, config.field_params, config.dim);
    if (config.time_unit == TimeUnit::gyro_period && !(field->strength() > 0.0))
        throw std::invalid_argument("time unit 'gyro_period' needs a nonzero field; use 'lab'");

    r.comparison.columns = comparison_columns();
    r.fluid.columns = fluid_columns();
    const auto pairs = make_pairs(config);
    const auto points = probe_points(config);
    const PairContext ctx{config, field, points, r.comparison, r.fluid};

    std::vector<PairOutput> outs(pairs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t k = next++; k < pairs.size(); k = next++) {
            try {
                outs[k] = run_pair(ctx, pairs[k]);
            } catch (const std::exception& e) {
                // run_pair records its own failures; anything reaching here is a bug-level error.
                PairOutput po;
                Row row(r.comparison);
                set_identity(row, config, pairs[k]);
                row.set("status", "failed").set("note", e.what()).set("in_regime", false);
                po.comparison.push_back(row.cells());
                outs[k] = std::move(po);
            }
        }
    };
    const int nthreads = std::max(1, std::min<int>(config.threads, static_cast<int>(pairs.size())));
    if (nthreads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (auto& o : outs) {
        for (auto& row : o.comparison) r.comparison.rows.push_back(std::move(row));
        for (auto& row : o.fluid) r.fluid.rows.push_back(std::move(row));
    }
    evaluate_checks(r);
    return r;
}

namespace {

ojson num_or_null(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

std::string summary_from_manifest(const ojson& m) {
    std::ostringstream os;
    os << "avlab run summary\n";
    os << "code version   " << m.at("code_version").get<std::string>() << "\n";
    os << "schema version " << m.at("schema_version").get<int>() << "\n";
    os << "config hash    " << m.at("config_hash").get<std::string>() << "\n";
    os << "scenario       " << m.at("scenario").get<std::string>() << "\n";
    os << "seed           " << m.at("seed").get<std::uint64_t>() << "\n";
    const ojson& h = m.at("hypotheses");
    os << "\ncells " << h.at("cells").get<int>() << ", in regime " << h.at("in_regime").get<int>() << ", failed "
       << h.at("failed").get<int>() << "\n";
    os << "flags: E>>1 " << h.at("energy_ok").get<int>() << ", alpha<<1 " << h.at("narrow_ok").get<int>()
       << ", adiabatic " << h.at("adiabatic_ok").get<int>() << ", |theta2-theta2bar| small "
       << h.at("theta_ok").get<int>() << "\n\nchecks\n";
    for (const auto& c : m.at("checks")) {
        std::string status = c.at("status").get<std::string>();
        for (auto& ch : status) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        os << "  [" << status << "] " << c.at("name").get<std::string>() << ": ";
        const auto& meas = c.at("measured");
        os << (meas.is_null() ? std::string("n/a") : format_double(meas.get<double>()));
        if (c.at("upper_bound").get<bool>())
            os << " (bound " << format_double(c.at("target").get<double>()) << ")";
        else if (c.at("tolerance").get<double>() == 0.0)
            os << " (at least " << format_double(c.at("target").get<double>()) << ")";
        else
            os << " (target " << format_double(c.at("target").get<double>()) << " +/- "
               << format_double(c.at("tolerance").get<double>()) << ")";
        os << ", points " << c.at("points").get<int>();
        const std::string note = c.at("note").get<std::string>();
        if (!note.empty()) os << "; " << note;
        os << "\n";
    }
    os << "\nall executed checks pass: " << (m.at("all_pass").get<bool>() ? "yes" : "no") << "\n";
    return os.str();
}

ojson manifest_object(const ScanResult& r) {
    ojson m;
    m["schema_version"] = kSchemaVersion;
    m["code_version"] = code_version();
    m["config_hash"] = r.config_hash;
    m["scenario"] = r.config.scenario;
    m["seed"] = r.config.seed;
    ojson cfg = ojson::parse(r.config.canonical);
    cfg.erase("output");
    cfg.erase("threads");
    m["config"] = cfg;
    m["tables"] = {{"comparison", {{"file", "comparison.csv"}, {"rows", r.comparison.rows.size()}, {"columns", r.comparison.columns}}},
                   {"fluid", {{"file", "fluid.csv"}, {"rows", r.fluid.rows.size()}, {"columns", r.fluid.columns}}}};
    m["regime"] = {{"alpha_max", r.config.alpha_regime}, {"energy_min", r.config.energy_regime},
                   {"theta_flag", r.config.theta_flag}};
    const HypothesisCounts& h = r.hypotheses;
    m["hypotheses"] = {{"cells", h.cells},           {"in_regime", h.in_regime}, {"energy_ok", h.energy_ok},
                       {"narrow_ok", h.narrow_ok},   {"adiabatic_ok", h.adiabatic_ok},
                       {"theta_ok", h.theta_ok},     {"failed", h.failed}};
    m["bound_constant"] = num_or_null(r.bound_constant);
    ojson fits = ojson::array();
    for (const auto& nf : r.fits) {
        const ScalingFit& f = nf.fit;
        fits.push_back({{"check", nf.check},
                        {"quantity", f.quantity},
                        {"abscissa", f.abscissa},
                        {"exponent", num_or_null(f.exponent)},
                        {"prefactor", num_or_null(f.prefactor)},
                        {"r2", num_or_null(f.r2)},
                        {"count", f.count},
                        {"excluded", f.excluded},
                        {"valid", f.valid},
                        {"note", f.note}});
    }
    m["fits"] = fits;
    ojson checks = ojson::array();
    for (const auto& c : r.checks)
        checks.push_back({{"name", c.name},
                          {"description", c.description},
                          {"quantity", c.quantity},
                          {"status", to_string(c.status)},
                          {"pass", c.status == CheckStatus::pass},
                          {"measured", num_or_null(c.measured)},
                          {"target", c.target},
                          {"tolerance", c.tolerance},
                          {"upper_bound", c.upper_bound},
                          {"points", c.points},
                          {"note", c.note}});
    m["checks"] = checks;
    m["all_pass"] = exit_code(r) == 0;
    return m;
}

}  // namespace

int exit_code(const ScanResult& r) {
    for (const auto& c : r.checks)
        if (c.status == CheckStatus::fail) return 1;
    return 0;
}

std::string manifest_json(const ScanResult& r) { return manifest_object(r).dump(2) + "\n"; }

std::string summary_text(const ScanResult& r) { return summary_from_manifest(manifest_object(r)); }

void emit_report(const ScanResult& r, const std::string& dir) {
    std::filesystem::create_directories(dir);
    const std::filesystem::path d(dir);
    write_text_file((d / "comparison.csv").string(), write_csv(r.comparison));
    write_text_file((d / "fluid.csv").string(), write_csv(r.fluid));
    write_text_file((d / "manifest.json").string(), manifest_json(r));
    write_text_file((d / "summary.txt").string(), summary_text(r));
}

std::string report_run_dir(const std::string& dir, bool* all_pass) {
    const std::filesystem::path d(dir);
    ojson m;
    try {
        m = ojson::parse(read_text_file((d / "manifest.json").string()));
    } catch (const ojson::exception& e) {
        throw std::runtime_error(std::string("malformed manifest: ") + e.what());
    }
    try {
        if (m.at("schema_version").get<int>() != kSchemaVersion)
            throw std::runtime_error("unsupported schema version " + std::to_string(m.at("schema_version").get<int>()));
        // The tables must still match the schema the manifest records.
        for (const char* name : {"comparison", "fluid"}) {
            const ojson& t = m.at("tables").at(name);
            const Table tab = read_csv(read_text_file((d / t.at("file").get<std::string>()).string()));
            if (tab.columns != t.at("columns").get<std::vector<std::string>>())
                throw std::runtime_error(std::string(name) + " table columns do not match the manifest");
            if (tab.rows.size() != t.at("rows").get<std::size_t>())
                throw std::runtime_error(std::string(name) + " table row count does not match the manifest");
        }
        if (all_pass) *all_pass = m.at("all_pass").get<bool>();
        return summary_from_manifest(m);
    } catch (const ojson::exception& e) {
        throw std::runtime_error(std::string("malformed manifest: ") + e.what());
    }
}

}  // namespace avlab
