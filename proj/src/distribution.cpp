#include "avlab/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "avlab/geometry.hpp"

namespace avlab {

namespace {

double phi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double dphi(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

double bump(double s) {
    const double a = 1.0 - s * s;
    return a > 0.0 ? std::exp(-1.0 / a) : 0.0;
}

double dbump(double s) {
    const double a = 1.0 - s * s;
    return a > 0.0 ? std::exp(-1.0 / a) * (-2.0 * s / (a * a)) : 0.0;
}

Vec default_orthogonal(const Vec& dir) {
    const auto m = dir.size();
    Vec e = Vec::Zero(m);
    if (m == 1) return e;
    Eigen::Index best = 0;
    for (Eigen::Index a = 1; a < m; ++a)
        if (std::abs(dir(a)) < std::abs(dir(best))) best = a;
    e(best) = 1.0;
    e -= e.dot(dir) * dir;
    return e / e.norm();
}

}  // namespace

double smooth_window(double s, double core) {
    if (s <= core) return 1.0;
    if (s >= 1.0) return 0.0;
    const double t = (1.0 - s) / (1.0 - core);
    return phi(t) / (phi(t) + phi(1.0 - t));
}

double smooth_window_derivative(double s, double core) {
    if (s <= core || s >= 1.0) return 0.0;
    const double t = (1.0 - s) / (1.0 - core);
    const double a = phi(t), b = phi(1.0 - t);
    const double dpsi = (dphi(t) * b + a * dphi(1.0 - t)) / ((a + b) * (a + b));
    return -dpsi / (1.0 - core);
}

BumpProfile::BumpProfile(Vec center_spatial, double radius, ProfileKind kind, double skew, Vec skew_direction,
                         double gaussian_sigma)
    : radius_(radius), kind_(kind), skew_(skew), sigma_(gaussian_sigma) {
    if (!(radius > 0.0)) throw std::invalid_argument("profile radius must be positive");
    if (!(std::abs(skew) < 1.0)) throw std::invalid_argument("profile skew must satisfy |skew| < 1");
    if (kind == ProfileKind::truncated_gaussian && !(gaussian_sigma > 0.0))
        throw std::invalid_argument("gaussian sigma must be positive");
    center_ = HyperboloidVector::lift(center_spatial).components();
    to_rest_ = boost_to_rest(center_);
    const auto m = center_spatial.size();
    if (skew_direction.size() == 0) {
        skew_dir_ = Vec::Zero(m);
        if (m >= 1) skew_dir_(0) = 1.0;
    } else {
        if (skew_direction.size() != m) throw DimensionError("skew direction dimension mismatch");
        const double nrm = skew_direction.norm();
        if (!(nrm > 0.0)) throw std::invalid_argument("skew direction must be nonzero");
        skew_dir_ = skew_direction / nrm;
    }
    // Normalize the maximum to 1. The maximum lies on the skew axis.
    auto line = [&](double s) { return shape(std::abs(s), s); };
    double best_s = 0.0, best = line(0.0);
    const int samples = 4000;
    for (int i = 1; i < samples; ++i) {
        const double s = -1.0 + 2.0 * i / samples;
        const double v = line(s);
        if (v > best) best = v, best_s = s;
    }
    double lo = std::max(-1.0, best_s - 2.0 / samples), hi = std::min(1.0, best_s + 2.0 / samples);
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 100; ++it) {
        const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
        if (line(a) > line(b)) hi = b;
        else lo = a;
    }
    best = std::max(best, line(0.5 * (lo + hi)));
    scale_ = 1.0 / best;
}

double BumpProfile::shape(double s, double xi) const {
    if (s >= 1.0) return 0.0;
    const double base = kind_ == ProfileKind::bump ? bump(s)
                                                   : std::exp(-s * s / (2.0 * sigma_ * sigma_)) * smooth_window(s, 0.5);
    return base * (1.0 + skew_ * xi);
}

Vec BumpProfile::rest_coords(const Vec& y) const {
    if (y.size() != center_.size()) throw DimensionError("profile: dimension mismatch");
    const Vec z = to_rest_ * y;
    return z.tail(z.size() - 1);
}

double BumpProfile::value(const Vec& y) const {
    const Vec u = rest_coords(y);
    const double s = u.norm() / radius_;
    if (s >= 1.0) return 0.0;
    return scale_ * shape(s, skew_dir_.dot(u) / radius_);
}

Vec BumpProfile::rest_gradient(const Vec& y) const {
    const Vec u = rest_coords(y);
    const double un = u.norm();
    const double s = un / radius_;
    if (s >= 1.0) return Vec::Zero(u.size());
    const double xi = skew_dir_.dot(u) / radius_;
    double G, dG;
    if (kind_ == ProfileKind::bump) {
        G = bump(s);
        dG = dbump(s);
    } else {
        const double e = std::exp(-s * s / (2.0 * sigma_ * sigma_));
        const double w = smooth_window(s, 0.5);
        G = e * w;
        dG = e * (-s / (sigma_ * sigma_)) * w + e * smooth_window_derivative(s, 0.5);
    }
    Vec g = (G * skew_ / radius_) * skew_dir_;
    if (un > 0.0) g += (dG * (1.0 + skew_ * xi) / (un * radius_)) * u;
    return scale_ * g;
}

double SlabWindow::value(const Vec& x) const {
    double s = 1.0;
    for (Eigen::Index a = 1; a < x.size(); ++a) {
        const double d = std::abs(x(a));
        if (d <= half_width) continue;
        if (edge <= 0.0) return 0.0;
        s *= smooth_window(d / (half_width + edge), half_width / (half_width + edge));
        if (s == 0.0) return 0.0;
    }
    return s;
}

PhaseDistribution PhaseDistribution::beam(BumpProfile profile, SlabWindow slab, int nodes_per_axis) {
    if (nodes_per_axis < 2) throw std::invalid_argument("nodes_per_axis must be at least 2");
    PhaseDistribution f;
    f.n_ = profile.dim();
    f.profile_ = std::move(profile);
    f.slab_ = slab;
    f.nodes_ = nodes_per_axis;
    return f;
}

PhaseDistribution PhaseDistribution::dirac(ScalarField psi, std::function<Vec(const Vec&)> V, int n) {
    if (n < 2 || n > kMaxDim) throw DimensionError("dirac distribution dimension out of range");
    PhaseDistribution f;
    f.n_ = n;
    f.dirac_ = true;
    f.psi_ = std::move(psi);
    f.V_ = std::move(V);
    f.nodes_ = 1;
    return f;
}

const BumpProfile& PhaseDistribution::profile() const {
    if (!profile_) throw std::logic_error("Dirac distribution has no profile");
    return *profile_;
}

double PhaseDistribution::velocity_value(const Vec& y) const {
    if (dirac_) throw std::logic_error("Dirac distribution has no pointwise value");
    double v = profile_->value(y);
    if (v == 0.0 || !window_) return v;
    const Vec z = boost_to_rest(window_->center) * y;
    return v * smooth_window(z.tail(z.size() - 1).norm() / window_->radius, window_->core);
}

double PhaseDistribution::value(const Vec& x, const Vec& y) const {
    if (x.size() != n_ || y.size() != n_) throw DimensionError("distribution: dimension mismatch");
    const double s = slab_.value(x);
    if (s == 0.0) return 0.0;
    return s * velocity_value(y);
}

Mat chart_jacobian(const Mat& L, const Mat& from_boost, const Vec& y) {
    const auto n = y.size();
    const auto m = n - 1;
    const Vec yp = boost_to_rest(from_boost.col(0)) * y;  // ȳ' chart of the frame
    Mat D = Mat::Zero(n, m);  // ∂ lift(ȳ')/∂ȳ'
    for (Eigen::Index l = 0; l < m; ++l) {
        D(0, l) = yp(l + 1) / yp(0);
        D(l + 1, l) = 1.0;
    }
    const Mat full = L * from_boost * D;
    return full.bottomRows(m);
}

Vec PhaseDistribution::velocity_rest_gradient(const Vec& y) const {
    if (dirac_) throw std::logic_error("Dirac distribution has no pointwise value");
    Vec g = profile_->rest_gradient(y);
    if (!window_) return g;
    const Vec z = boost_to_rest(window_->center) * y;
    const Vec uw = z.tail(z.size() - 1);
    const double s = uw.norm() / window_->radius;
    const double W = smooth_window(s, window_->core);
    g *= W;
    const double dW = smooth_window_derivative(s, window_->core);
    if (dW != 0.0 && s > 0.0) {
        const Vec gw = (dW / (window_->radius * uw.norm())) * uw;
        const Mat J = chart_jacobian(boost_to_rest(window_->center), boost_from_rest(profile_->center()), y);
        g += profile_->value(y) * (J.transpose() * gw);
    }
    return g;
}

VelocityBall PhaseDistribution::quadrature_ball() const {
    if (dirac_) throw std::logic_error("Dirac distribution has no quadrature ball");
    if (window_) return *window_;
    return VelocityBall{profile_->center(), profile_->radius(), 1.0};
}

std::vector<FiberNode> fiber_grid(const Vec& center, double R, int N, const std::function<double(const Vec&)>& f) {
    if (N < 1) throw std::invalid_argument("fiber_grid: N must be positive");
    const auto n = center.size();
    const int m = static_cast<int>(n) - 1;
    const Mat L = boost_from_rest(center);
    const double h = 2.0 * R / N;
    const double hm = std::pow(h, m);
    std::vector<FiberNode> out;
    std::vector<int> idx(m, 0);
    Vec u(m);
    for (;;) {
        for (int a = 0; a < m; ++a) u(a) = -R + (idx[a] + 0.5) * h;
        if (u.norm() < R) {
            const Vec yr = HyperboloidVector::lift(u).components();
            const Vec y = L * yr;
            const double v = f(y);
            if (v > 0.0) out.push_back(FiberNode{y, v, hm / yr(0)});
        }
        int a = 0;
        while (a < m && ++idx[a] == N) idx[a++] = 0;
        if (a == m) break;
    }
    return out;
}

std::vector<FiberNode> PhaseDistribution::quadrature(const Vec& x) const {
    if (x.size() != n_) throw DimensionError("distribution: dimension mismatch");
    if (dirac_) {
        const Vec V = V_(x);
        if (V.size() != n_ || std::abs(minkowski_inner(V, V) - 1.0) > 1e-12 || !(V(0) > 0.0))
            throw std::invalid_argument("Dirac velocity field is not on the unit hyperboloid");
        const double psi = psi_(x);
        if (!(psi > 0.0)) return {};
        return {FiberNode{V, psi, 1.0}};
    }
    const double s = slab_.value(x);
    if (s == 0.0) return {};
    const VelocityBall b = quadrature_ball();
    auto nodes = fiber_grid(b.center, b.radius, nodes_, [this](const Vec& y) { return velocity_value(y); });
    if (s != 1.0)
        for (auto& nd : nodes) nd.value *= s;
    return nodes;
}

PhaseDistribution PhaseDistribution::with_window(const VelocityBall& w) const {
    if (dirac_) throw std::logic_error("cannot window a Dirac distribution");
    if (!(w.radius > 0.0) || !(w.core >= 0.0 && w.core < 1.0)) throw std::invalid_argument("bad velocity window");
    PhaseDistribution f = *this;
    f.window_ = w;
    return f;
}

PhaseDistribution PhaseDistribution::with_nodes(int nodes_per_axis) const {
    if (nodes_per_axis < 2) throw std::invalid_argument("nodes_per_axis must be at least 2");
    PhaseDistribution f = *this;
    f.nodes_ = nodes_per_axis;
    return f;
}

MomentSet compute_moments(const PhaseDistribution& f, const Vec& x) { return moments_from_nodes(f.quadrature(x)); }

SupportStats support_stats(const std::vector<FiberNode>& nodes) {
    const MomentSet m = moments_from_nodes(nodes);
    SupportStats st;
    st.U = mean_frame(m);
    const Mat Linv = boost_to_rest(st.U);
    std::vector<Vec> z;
    z.reserve(nodes.size());
    st.energy = std::numeric_limits<double>::infinity();
    const Vec Vr = Linv * m.first;
    for (const auto& nd : nodes) {
        if (!(nd.value > 0.0)) continue;
        z.push_back(Linv * nd.y);
        st.energy = std::min(st.energy, nd.y(0));
        st.max_delta = std::max(st.max_delta, (Vr - z.back()).norm());
    }
    // η̄ is Euclidean in the rest frame of U.
    double a2 = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i)
        for (std::size_t j = i + 1; j < z.size(); ++j) a2 = std::max(a2, (z[i] - z[j]).squaredNorm());
    st.alpha = std::sqrt(a2);
    return st;
}

SupportStats support_stats(const PhaseDistribution& f, const Vec& x) { return support_stats(f.quadrature(x)); }

std::vector<FiberNodeGrad> nodes_with_gradients(const PhaseDistribution& f, const Vec& x, const Vec& U) {
    if (f.is_dirac()) throw std::logic_error("Dirac distribution has no fiber derivatives");
    const double s = f.slab().value(x);
    const Mat Lc_inv = f.profile().to_rest();
    const Mat LU = boost_from_rest(U);
    std::vector<FiberNodeGrad> out;
    for (const auto& nd : f.quadrature(x)) {
        FiberNodeGrad g;
        static_cast<FiberNode&>(g) = nd;
        const Mat J = chart_jacobian(Lc_inv, LU, nd.y);
        g.grad = s * (J.transpose() * f.velocity_rest_gradient(nd.y));
        out.push_back(std::move(g));
    }
    return out;
}

SobolevNorms sobolev_norms(const std::vector<FiberNodeGrad>& nodes, const Vec& U, const Vec& mean, const Vec& dV0,
                           double alpha) {
    const auto n = U.size();
    SobolevNorms out;
    out.norm_02 = Vec::Zero(n);
    const Mat Linv = boost_to_rest(U);
    const Vec d0 = Linv * dV0;
    const Vec Vr = Linv * mean;
    const double floor = 1e-8 * alpha;
    bool any = false;
    for (const auto& nd : nodes) {
        if (!(nd.value > 0.0)) continue;
        any = true;
        out.norm_11 += nd.cell * (std::abs(nd.value) + nd.grad.cwiseAbs().sum());
        if (alpha == 0.0) continue;
        const Vec del = Vr - Linv * nd.y;
        for (Eigen::Index k = 0; k < n; ++k) {
            double a = std::abs(del(k));
            if (a < floor) {
                a = floor;
                ++out.floored;
            }
            const double r = d0(k) / a;
            out.norm_02(k) += nd.cell * r * r;
        }
    }
    if (!any) throw DomainError("sobolev_norms: empty support");
    out.norm_02 = out.norm_02.cwiseSqrt();
    out.norm_02_sum = out.norm_02.sum();
    return out;
}

SobolevNorms sobolev_norms(const PhaseDistribution& f, const Vec& x, const Vec& dV0) {
    const auto q = f.quadrature(x);
    const SupportStats st = support_stats(q);
    const MomentSet m = moments_from_nodes(q);
    return sobolev_norms(nodes_with_gradients(f, x, st.U), st.U, m.first, dV0, st.alpha);
}

PhaseDistribution make_beam_distribution(double center_rapidity, const Vec& direction, double alpha,
                                         const BeamOptions& opts) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (alpha > 1.0) throw std::invalid_argument("alpha > 1 violates the narrow-support hypothesis");
    if (!(center_rapidity >= 0.0)) throw std::invalid_argument("rapidity must be nonnegative");
    const double dn = direction.norm();
    if (!(dn > 0.0)) throw std::invalid_argument("beam direction must be nonzero");
    const Vec dir = direction / dn;
    const Vec center = std::sinh(center_rapidity) * dir;
    Vec skew_dir = opts.skew_direction.size() ? opts.skew_direction : default_orthogonal(dir);
    if (skew_dir.size() == 1 && skew_dir.norm() == 0.0) skew_dir(0) = 1.0;
    const Vec x0 = Vec::Zero(dir.size() + 1);

    auto build = [&](double r) {
        return PhaseDistribution::beam(BumpProfile(center, r, opts.kind, opts.skew, skew_dir, opts.gaussian_sigma),
                                       opts.slab, opts.nodes_per_axis);
    };
    double r = 0.5 * alpha;
    for (int it = 0; it < 3; ++it) {
        const double measured = support_stats(build(r), x0).alpha;
        if (!(measured > 0.0)) throw DomainError("beam calibration produced a degenerate support");
        r *= alpha / measured;
    }
    return build(r);
}

PhaseDistribution window_support(const PhaseDistribution& f_tilde, const PhaseDistribution& target) {
    if (f_tilde.is_dirac() || target.is_dirac()) throw std::invalid_argument("window_support needs smooth profiles");
    if (f_tilde.dim() != target.dim()) throw DimensionError("window_support: dimension mismatch");
    const Vec x0 = Vec::Zero(target.dim());
    for (const auto& nd : target.quadrature(x0))
        if (!(f_tilde.velocity_value(nd.y) > 0.0))
            throw std::invalid_argument("window_support: target support not contained in f_tilde support");
    const VelocityBall ball{target.profile().center(), target.profile().radius(), 0.8};
    return f_tilde.with_window(ball);
}

PhaseDistribution dirac_limit_distribution(ScalarField psi, std::function<Vec(const Vec&)> V, int n) {
    return PhaseDistribution::dirac(std::move(psi), std::move(V), n);
}

}  // namespace avlab
