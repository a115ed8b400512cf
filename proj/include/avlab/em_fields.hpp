#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "avlab/types.hpp"

namespace avlab {

// Covariant components F_ij, kept exactly antisymmetric.
class FieldTensor {
public:
    explicit FieldTensor(int n);
    explicit FieldTensor(const Mat& lower);  // antisymmetrized: (F − Fᵀ)/2

    int dim() const { return static_cast<int>(F_.rows()); }
    double operator()(int i, int j) const { return F_(i, j); }
    const Mat& lower() const { return F_; }
    // F^i_j = η^ik F_kj
    Mat mixed() const;

    FieldTensor scaled(double s) const { return FieldTensor(Mat(s * F_)); }

private:
    Mat F_;
};

using Potential = std::function<Vec(const Vec&)>;
using FieldFunction = std::function<FieldTensor(const Vec&)>;

// Axis-aligned box over all n coordinates (index 0 is lab time).
struct DomainBox {
    Vec lo;
    Vec hi;
    bool contains(const Vec& x) const;
};

class FieldScenario {
public:
    FieldScenario(std::string name, int dim, std::map<std::string, double> params, Potential potential,
                  FieldFunction analytic, DomainBox domain, bool homogeneous, double strength);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    const std::map<std::string, double>& params() const { return params_; }
    const Potential& potential() const { return potential_; }
    const DomainBox& domain() const { return domain_; }
    // True when F is independent of x.
    bool homogeneous() const { return homogeneous_; }
    double strength() const { return strength_; }

    // Analytic F; throws DomainError outside the box.
    FieldTensor field(const Vec& x) const;

private:
    std::string name_;
    int dim_;
    std::map<std::string, double> params_;
    Potential potential_;
    FieldFunction analytic_;
    DomainBox domain_;
    bool homogeneous_;
    double strength_;
};

// Central-difference curl of A, antisymmetrized.
FieldTensor field_from_potential(const Potential& A, const Vec& x, double h, const DomainBox* domain = nullptr);

// max |∂_i F_jk + ∂_j F_ki + ∂_k F_ij| by central differences.
double check_closed(const FieldFunction& F, const Vec& x, double h);

// Largest singular value of F^i_j in an η̄(U)-orthonormal frame.
double field_operator_norm(const FieldTensor& F, const Vec& U);

struct ScenarioInfo {
    std::string name;
    std::string description;
    std::vector<int> dims;
    std::map<std::string, double> defaults;
};

std::vector<ScenarioInfo> list_scenarios();

// Unknown names or parameters are errors. Missing parameters take defaults.
std::shared_ptr<const FieldScenario> make_scenario(const std::string& name,
                                                   const std::map<std::string, double>& params = {}, int dim = 4);

}  // namespace avlab
