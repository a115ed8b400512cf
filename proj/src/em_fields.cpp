#include "avlab/em_fields.hpp"

#include <algorithm>
#include <cmath>

#include "avlab/geometry.hpp"

namespace avlab {

FieldTensor::FieldTensor(int n) : F_(Mat::Zero(n, n)) {
    if (n < 2 || n > kMaxDim) throw DimensionError("field dimension out of range");
}

FieldTensor::FieldTensor(const Mat& lower) {
    if (lower.rows() != lower.cols() || lower.rows() < 2 || lower.rows() > kMaxDim)
        throw DimensionError("field tensor must be square, n in [2,4]");
    F_ = 0.5 * (lower - lower.transpose());
}

Mat FieldTensor::mixed() const {
    Mat m = -F_;
    m.row(0) = F_.row(0);
    return m;
}

bool DomainBox::contains(const Vec& x) const {
    if (x.size() != lo.size()) throw DimensionError("domain box dimension mismatch");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!(x(i) >= lo(i) && x(i) <= hi(i))) return false;
    return true;
}

FieldScenario::FieldScenario(std::string name, int dim, std::map<std::string, double> params, Potential potential,
                             FieldFunction analytic, DomainBox domain, bool homogeneous, double strength)
    : name_(std::move(name)),
      dim_(dim),
      params_(std::move(params)),
      potential_(std::move(potential)),
      analytic_(std::move(analytic)),
      domain_(std::move(domain)),
      homogeneous_(homogeneous),
      strength_(strength) {}

FieldTensor FieldScenario::field(const Vec& x) const {
    if (!domain_.contains(x)) throw DomainError("field evaluated outside the scenario domain");
    return analytic_(x);
}

FieldTensor field_from_potential(const Potential& A, const Vec& x, double h, const DomainBox* domain) {
    if (!(h > 0.0)) throw std::invalid_argument("field_from_potential: h must be positive");
    const auto n = x.size();
    // dA[i] = ∂_i A (covector)
    Mat dA(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        if (domain && (!domain->contains(xp) || !domain->contains(xm)))
            throw DomainError("field_from_potential: stencil outside domain");
        dA.row(i) = ((A(xp) - A(xm)) / (2.0 * h)).transpose();
    }
    Mat F(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) F(i, j) = dA(i, j) - dA(j, i);
    return FieldTensor(F);
}

double check_closed(const FieldFunction& F, const Vec& x, double h) {
    const auto n = x.size();
    std::vector<Mat> dF(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vec xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        dF[i] = (F(xp).lower() - F(xm).lower()) / (2.0 * h);
    }
    double r = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index k = 0; k < n; ++k)
                r = std::max(r, std::abs(dF[i](j, k) + dF[j](k, i) + dF[k](i, j)));
    return r;
}

double field_operator_norm(const FieldTensor& F, const Vec& U) {
    if (U.size() != F.dim()) throw DimensionError("field_operator_norm: dimension mismatch");
    EtaBar check(U);  // validates U
    (void)check;
    const Mat L = boost_from_rest(U);
    const Mat M = boost_to_rest(U) * F.mixed() * L;
    const Eigen::MatrixXd Md = M;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(Md);
    return svd.singularValues()(0);
}

namespace {

// Default B chosen so a rapidity-3 particle has unit gyroradius.
const double kDefaultB = std::sinh(3.0);

DomainBox make_box(int n, double half) {
    DomainBox b{Vec::Constant(n, -half), Vec::Constant(n, half)};
    b.lo(0) = -1e6;
    b.hi(0) = 1e6;
    return b;
}

std::map<std::string, double> merge(const std::string& name, const std::map<std::string, double>& defaults,
                                    const std::map<std::string, double>& given) {
    std::map<std::string, double> out = defaults;
    for (const auto& [k, v] : given) {
        auto it = out.find(k);
        if (it == out.end()) throw std::invalid_argument("scenario '" + name + "': unknown parameter '" + k + "'");
        if (!std::isfinite(v)) throw std::invalid_argument("scenario '" + name + "': non-finite parameter '" + k + "'");
        it->second = v;
    }
    return out;
}

}  // namespace

std::vector<ScenarioInfo> list_scenarios() {
    return {
        {"zero", "F = 0 (free streaming)", {2, 4}, {{"box", 200.0}}},
        {"uniform_b", "uniform magnetic field along x3: A = (0,0,B x1,0), F_12 = B", {4}, {{"B", kDefaultB}, {"box", 200.0}}},
        {"uniform_e", "uniform electric field along x1: A = (-E x1,0,...), F_01 = E", {2, 4}, {{"E", 1.0}, {"box", 200.0}}},
        {"b_gradient",
         "magnetic field along x3 with linear gradient in x1: F_12 = B (1 + g x1)",
         {4},
         {{"B", kDefaultB}, {"g", 0.02}, {"box", 20.0}}},
    };
}

std::shared_ptr<const FieldScenario> make_scenario(const std::string& name, const std::map<std::string, double>& params,
                                                   int n) {
    const auto all = list_scenarios();
    auto it = std::find_if(all.begin(), all.end(), [&](const ScenarioInfo& s) { return s.name == name; });
    if (it == all.end()) throw std::invalid_argument("unknown scenario '" + name + "'");
    if (std::find(it->dims.begin(), it->dims.end(), n) == it->dims.end())
        throw std::invalid_argument("scenario '" + name + "' does not support dimension " + std::to_string(n));
    const auto p = merge(name, it->defaults, params);
    const double box = p.at("box");
    if (!(box > 0.0)) throw std::invalid_argument("scenario box must be positive");
    const DomainBox dom = make_box(n, box);

    if (name == "zero") {
        return std::make_shared<FieldScenario>(
            name, n, p, [n](const Vec&) { return Vec(Vec::Zero(n)); },
            [n](const Vec&) { return FieldTensor(n); }, dom, true, 0.0);
    }
    if (name == "uniform_b") {
        const double B = p.at("B");
        Mat F = Mat::Zero(n, n);
        F(1, 2) = B;
        F(2, 1) = -B;
        const FieldTensor ft(F);
        return std::make_shared<FieldScenario>(
            name, n, p,
            [n, B](const Vec& x) {
                Vec A = Vec::Zero(n);
                A(2) = B * x(1);
                return A;
            },
            [ft](const Vec&) { return ft; }, dom, true, std::abs(B));
    }
    if (name == "uniform_e") {
        const double E = p.at("E");
        Mat F = Mat::Zero(n, n);
        F(0, 1) = E;
        F(1, 0) = -E;
        const FieldTensor ft(F);
        return std::make_shared<FieldScenario>(
            name, n, p,
            [n, E](const Vec& x) {
                Vec A = Vec::Zero(n);
                A(0) = -E * x(1);
                return A;
            },
            [ft](const Vec&) { return ft; }, dom, true, std::abs(E));
    }
    // b_gradient
    const double B = p.at("B");
    const double g = p.at("g");
    return std::make_shared<FieldScenario>(
        name, n, p,
        [n, B, g](const Vec& x) {
            Vec A = Vec::Zero(n);
            A(2) = B * (x(1) + 0.5 * g * x(1) * x(1));
            return A;
        },
        [n, B, g](const Vec& x) {
            Mat F = Mat::Zero(n, n);
            F(1, 2) = B * (1.0 + g * x(1));
            F(2, 1) = -F(1, 2);
            return FieldTensor(F);
        },
        dom, false, std::abs(B));
}

}  // namespace avlab
