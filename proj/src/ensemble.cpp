#include "avlab/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "avlab/geometry.hpp"

namespace avlab {

namespace {

constexpr int kT3 = kMaxDim * kMaxDim * kMaxDim;

std::vector<double> flatten(const MomentSet& m, double logE) {
    const int n = m.n;
    std::vector<double> v;
    v.reserve(3 + n + n * n + 2 * kT3);
    v.push_back(m.volume);
    v.push_back(m.volume_E);
    for (int i = 0; i < n; ++i) v.push_back(m.first(i));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) v.push_back(m.second(i, j));
    v.insert(v.end(), m.third.begin(), m.third.end());
    v.insert(v.end(), m.centered3.begin(), m.centered3.end());
    v.push_back(logE);
    return v;
}

MomentSet unflatten(const std::vector<double>& v, int n) {
    MomentSet m;
    m.n = n;
    std::size_t k = 0;
    m.volume = v[k++];
    m.volume_E = v[k++];
    m.first = Vec(n);
    for (int i = 0; i < n; ++i) m.first(i) = v[k++];
    m.second = Mat(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m.second(i, j) = v[k++];
    std::copy(v.begin() + k, v.begin() + k + kT3, m.third.begin());
    k += kT3;
    std::copy(v.begin() + k, v.begin() + k + kT3, m.centered3.begin());
    return m;
}

// Lagrange weights (value or first derivative) for nodes 0..p-1 at offset s (grid units).
std::vector<double> lagrange_weights(int p, double s, int deriv) {
    std::vector<double> w(p, 0.0);
    for (int j = 0; j < p; ++j) {
        if (deriv == 0) {
            double l = 1.0;
            for (int k = 0; k < p; ++k)
                if (k != j) l *= (s - k) / double(j - k);
            w[j] = l;
        } else {
            double sum = 0.0;
            for (int m = 0; m < p; ++m) {
                if (m == j) continue;
                double l = 1.0 / double(j - m);
                for (int k = 0; k < p; ++k)
                    if (k != j && k != m) l *= (s - k) / double(j - k);
                sum += l;
            }
            w[j] = sum;
        }
    }
    return w;
}

}  // namespace

EnsembleMomentField::EnsembleMomentField(const PhaseDistribution& f0, std::shared_ptr<const FieldScenario> field,
                                         FlowKind kind, double eps, EnsembleOptions opt)
    : kind_(kind), eps_(eps), field_(std::move(field)), opt_(std::move(opt)) {
    if (!field_) throw std::invalid_argument("ensemble needs a field");
    if (!field_->homogeneous()) throw std::invalid_argument("ensemble transport requires a homogeneous field");
    if (!(opt_.t_end >= 0.0) || !(opt_.t_begin <= 0.0) || !(opt_.sample_dt > 0.0)) throw std::invalid_argument("bad ensemble time grid");
    if (kind_ == FlowKind::averaged) eps_ = 1.0;
    if (kind_ == FlowKind::lorentz) eps_ = 0.0;
    if (!(eps_ >= 0.0 && eps_ <= 1.0)) throw std::invalid_argument("interpolation parameter outside [0,1]");
    n_ = f0.dim();
    if (field_->dim() != n_) throw DimensionError("ensemble: dimension mismatch");
    const int m = n_ - 1;
    dirac_ = f0.is_dirac();
    if (opt_.x_ref.size() == 0) opt_.x_ref = Vec::Zero(n_);
    core_ = dirac_ ? std::numeric_limits<double>::infinity() : f0.slab().core();
    std::sort(opt_.checkpoints.begin(), opt_.checkpoints.end());
    for (double c : opt_.checkpoints)
        if (c < opt_.t_begin || c > opt_.t_end)
            throw std::invalid_argument("ensemble checkpoint outside [t_begin, t_end]");

    // Initial nodes and lab-chart gradients of f0.
    Vec x0 = opt_.x_ref;
    x0(0) = 0.0;
    const std::vector<FiberNode> init = f0.quadrature(x0);
    if (init.empty()) throw DomainError("ensemble: empty initial support");
    const int N = static_cast<int>(init.size());
    std::vector<Vec> grad0(N);
    if (!dirac_) {
        const Mat Lc_inv = f0.profile().to_rest();
        const Mat I = Mat::Identity(n_, n_);
        for (int k = 0; k < N; ++k)
            grad0[k] = chart_jacobian(Lc_inv, I, init[k].y).transpose() * f0.velocity_rest_gradient(init[k].y);
    }
    const FieldTensor F = field_->field(x0);
    const Mat Fm = F.mixed();

    const int stride = m + m * m;
    OdeState state(static_cast<std::size_t>(N) * stride, 0.0);
    std::vector<double> y00(N), base_w(N);
    for (int k = 0; k < N; ++k) {
        for (int a = 0; a < m; ++a) state[k * stride + a] = init[k].y(a + 1);
        for (int a = 0; a < m; ++a) state[k * stride + m + a * m + a] = 1.0;
        y00[k] = init[k].y(0);
        base_w[k] = init[k].cell * init[k].y(0);
    }

    const bool project = kind_ != FlowKind::lorentz;
    const bool needs_moments = eps_ > 0.0;

    auto lift_node = [&](const OdeState& s, int k) {
        Vec ys(m);
        for (int a = 0; a < m; ++a) ys(a) = s[k * stride + a];
        return HyperboloidVector::lift(ys).components();
    };
    auto detJ = [&](const OdeState& s, int k) {
        Mat J(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) J(a, b) = s[k * stride + m + a * m + b];
        return J;
    };

    auto rhs = [&](const OdeState& s, OdeState& ds, double) {
        std::vector<Vec> ys(N);
        for (int k = 0; k < N; ++k) ys[k] = lift_node(s, k);
        ConnectionCoeffs Gbar(n_);
        if (needs_moments) {
            // First and third moments of the current ensemble.
            double vol = 0.0;
            Vec V = Vec::Zero(n_);
            Tensor3 T{};
            std::vector<double> w(N);
            for (int k = 0; k < N; ++k) {
                w[k] = init[k].value * base_w[k] * detJ(s, k).determinant() / ys[k](0);
                vol += w[k];
                V += w[k] * ys[k];
            }
            if (N == 1) {
                V = ys[0];
                for (int i = 0; i < n_; ++i)
                    for (int j = 0; j < n_; ++j)
                        for (int l = 0; l < n_; ++l) T[t3(i, j, l)] = V(i) * V(j) * V(l);
            } else {
                V /= vol;
                for (int k = 0; k < N; ++k) {
                    const double wk = w[k] / vol;
                    const Vec& y = ys[k];
                    for (int i = 0; i < n_; ++i)
                        for (int j = 0; j < n_; ++j) {
                            const double wyy = wk * y(i) * y(j);
                            for (int l = 0; l < n_; ++l) T[t3(i, j, l)] += wyy * y(l);
                        }
                }
            }
            Gbar = connection_kernel(F, V, T);
        }
        for (int k = 0; k < N; ++k) {
            const Vec& y = ys[k];
            Vec G = Vec::Zero(n_);
            Mat DG = Mat::Zero(n_, n_);
            if (eps_ < 1.0) {
                G += (1.0 - eps_) * (Fm * y);  // √η(y,y) = 1 on Σ
                DG += (1.0 - eps_) * (Fm + (Fm * y) * lower_index(y).transpose());
            }
            if (needs_moments) {
                G += eps_ * affine_spray(Gbar, y);
                DG += eps_ * affine_spray_jacobian(Gbar, y);
            }
            Vec Q = G;
            Mat DQ = DG;
            if (project) {
                const double sg = minkowski_inner(G, y);
                Vec ds_dy(n_);
                const Vec yl = lower_index(y);
                const Vec Gl = lower_index(G);
                for (int mu = 0; mu < n_; ++mu) ds_dy(mu) = yl.dot(DG.col(mu)) + Gl(mu);
                Q = G - sg * y;
                DQ = DG - y * ds_dy.transpose() - sg * Mat::Identity(n_, n_);
            }
            const double y0 = y(0);
            Mat DW(m, m);
            for (int a = 0; a < m; ++a) {
                ds[k * stride + a] = -Q(a + 1) / y0;
                for (int b = 0; b < m; ++b)
                    DW(a, b) = -(DQ(a + 1, 0) * y(b + 1) / y0 + DQ(a + 1, b + 1)) / y0 +
                               Q(a + 1) * y(b + 1) / (y0 * y0 * y0);
            }
            const Mat J = detJ(s, k);
            const Mat dJ = DW * J;
            for (int a = 0; a < m; ++a)
                for (int b = 0; b < m; ++b) ds[k * stride + m + a * m + b] = dJ(a, b);
        }
    };

    auto current_nodes = [&](const OdeState& s, std::vector<Vec>* grads) {
        std::vector<FiberNode> nodes(N);
        for (int k = 0; k < N; ++k) {
            const Vec y = lift_node(s, k);
            const Mat J = detJ(s, k);
            nodes[k] = FiberNode{y, init[k].value, base_w[k] * J.determinant() / y(0)};
            if (grads && !dirac_) grads->push_back(J.transpose().partialPivLu().solve(grad0[k]));
        }
        if (dirac_) nodes[0].cell = init[0].cell;
        return nodes;
    };

    // Uniform snapshot grid on [t_begin, t_end], padded by a few samples so interpolation stays centred.
    const double dt = opt_.sample_dt;
    const int Kf = static_cast<int>(std::ceil(opt_.t_end / dt - 1e-9)) + 4;
    const int Kb = opt_.t_begin < 0.0 ? static_cast<int>(std::ceil(-opt_.t_begin / dt - 1e-9)) + 4 : 0;
    kb_ = Kb;
    samples_.assign(Kf + Kb, {});
    snaps_.clear();

    auto run = [&](bool forward, OdeState st) {
        std::vector<std::pair<double, int>> times;  // (time, sample slot or −1 for a checkpoint)
        if (forward)
            for (int i = 0; i < Kf; ++i) times.emplace_back(i * dt, Kb + i);
        else
            for (int i = 0; i <= Kb; ++i) times.emplace_back(-i * dt, Kb - i);
        for (double c : opt_.checkpoints)
            if (forward ? c >= 0.0 : c < 0.0) times.emplace_back(c, -1);
        std::stable_sort(times.begin(), times.end(), [forward](const auto& x, const auto& y) {
            return forward ? x.first < y.first : x.first > y.first;
        });
        std::vector<double> tlist;
        for (const auto& p : times) tlist.push_back(p.first);
        std::size_t idx = 0;
        std::size_t evals = 0;
        auto budgeted = [&](const OdeState& s, OdeState& ds, double t) {
            if (++evals > opt_.max_rhs_evals)
                throw IntegrationError(IntegrationError::Kind::step_underflow, "ensemble work budget exhausted");
            rhs(s, ds, t);
        };
        integrate_checkpoints(budgeted, st, tlist, opt_.integ, [&](const OdeState& s, double t) {
            const int slot = times[idx++].second;
            if (slot >= 0) {
                const auto nodes = current_nodes(s, nullptr);
                double E = std::numeric_limits<double>::infinity();
                for (const auto& nd : nodes) E = std::min(E, nd.y(0));
                samples_[slot] = flatten(moments_from_nodes(nodes), std::log(E));
                if (forward) last_sample_ = slot;
            } else {
                NodeSnap sn;
                sn.nodes = current_nodes(s, &sn.grad_lab);
                snaps_.emplace_back(t, std::move(sn));
            }
        });
    };
    if (Kb > 0) run(false, state);  // short backward extension; failures here are fatal
    try {
        run(true, state);
    } catch (const Error& e) {
        failure_ = e.what();
        if (last_sample_ < 0) throw;
        samples_.resize(last_sample_ + 1);
    }
    std::sort(snaps_.begin(), snaps_.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
    ncomp_ = static_cast<int>(samples_.front().size());
    valid_from_ = std::min(0.0, opt_.t_begin);
    // Six-point stencils need the samples around t; keep a margin at a broken end.
    valid_until_ = complete() ? opt_.t_end : std::max(0.0, (last_sample_ - Kb - 3) * dt);
    if (!complete()) {
        while (!snaps_.empty() && snaps_.back().first > valid_until_) snaps_.pop_back();
        if (valid_until_ < dt * 5)
            throw IntegrationError(IntegrationError::Kind::failure, "ensemble transport failed: " + failure_);
    }
}

std::vector<double> EnsembleMomentField::interp(double t, int deriv) const {
    const double dt = opt_.sample_dt;
    if (!(t >= valid_from_ - 1e-12 && t <= valid_until_ + 1e-9))
        throw DomainError(complete() ? "ensemble moments requested outside [t_begin, t_end]"
                                     : "ensemble moments requested past the end of transport (" + failure_ + ")");
    const int K = static_cast<int>(samples_.size());
    constexpr int P = 6;
    const double r = t / dt + kb_;
    int i0 = static_cast<int>(std::floor(r)) - 2;
    i0 = std::clamp(i0, 0, K - P);
    const double s = r - i0;
    const auto w = lagrange_weights(P, s, deriv);
    std::vector<double> out(ncomp_, 0.0);
    for (int j = 0; j < P; ++j)
        for (int c = 0; c < ncomp_; ++c) out[c] += w[j] * samples_[i0 + j][c];
    if (deriv == 1)
        for (double& v : out) v /= dt;
    return out;
}

MomentSet EnsembleMomentField::at_time(double t) const {
    // Exact snapshot values at grid points.
    const double r = t / opt_.sample_dt;
    const double k = std::round(r);
    if (std::abs(r - k) < 1e-12 && k + kb_ >= 0 && k * opt_.sample_dt <= valid_until_ + 1e-12)
        return unflatten(samples_[static_cast<int>(k) + kb_], n_);
    return unflatten(interp(t, 0), n_);
}

MomentSet EnsembleMomentField::at(const Vec& x) const {
    if (x.size() != n_) throw DimensionError("ensemble: dimension mismatch");
    const double t = x(0);
    if (!dirac_)
        for (Eigen::Index a = 1; a < n_; ++a)
            if (std::abs(x(a)) + std::abs(t) > core_)
                throw DomainError("ensemble moments requested outside the homogeneous slab core");
    return at_time(t);
}

const EnsembleMomentField::NodeSnap& EnsembleMomentField::snap(double t) const {
    for (const auto& [tc, sn] : snaps_)
        if (std::abs(tc - t) <= 1e-12 * std::max(1.0, std::abs(t))) return sn;
    if (t > valid_until_) throw DomainError("ensemble node data requested past the end of transport");
    throw std::invalid_argument("ensemble node data requested at a non-checkpoint time");
}

std::vector<FiberNode> EnsembleMomentField::fiber(double t) const { return snap(t).nodes; }

std::vector<FiberNodeGrad> EnsembleMomentField::fiber_with_gradients(double t, const Vec& U) const {
    if (dirac_) throw std::logic_error("Dirac ensemble has no fiber derivatives");
    const NodeSnap& sn = snap(t);
    const Mat I = Mat::Identity(n_, n_);
    const Mat LU = boost_from_rest(U);
    std::vector<FiberNodeGrad> out(sn.nodes.size());
    for (std::size_t k = 0; k < sn.nodes.size(); ++k) {
        static_cast<FiberNode&>(out[k]) = sn.nodes[k];
        out[k].grad = chart_jacobian(I, LU, sn.nodes[k].y).transpose() * sn.grad_lab[k];
    }
    return out;
}

SupportStats EnsembleMomentField::stats(double t) const {
    SupportStats st = support_stats(snap(t).nodes);
    st.dlogE_dt = dlogE_dt(t);
    return st;
}

double EnsembleMomentField::energy(double t) const { return std::exp(interp(t, 0).back()); }

double EnsembleMomentField::dlogE_dt(double t) const { return interp(t, 1).back(); }

}  // namespace avlab
