#pragma once

#include <array>
#include <vector>

#include "avlab/types.hpp"

namespace avlab {

// One quadrature node on Σ_x. `cell` is the dvol measure of the node cell (cell volume / y⁰),
// so the node weight in every fiber integral is value * cell.
struct FiberNode {
    Vec y;
    double value = 0.0;
    double cell = 0.0;
    double weight() const { return value * cell; }
};

using Tensor3 = std::array<double, kMaxDim * kMaxDim * kMaxDim>;

inline constexpr int t3(int i, int j, int k) { return (i * kMaxDim + j) * kMaxDim + k; }

// Normalized fiber moments (divided by vol = ∫ f dvol).
struct MomentSet {
    int n = 4;
    double volume = 0.0;    // ∫ f dvol
    double volume_E = 0.0;  // ∫ over supp of dvol
    Vec first;              // <y^i>
    Mat second;             // <y^i y^j>
    Tensor3 third{};        // <y^i y^j y^k>
    Tensor3 centered3{};    // <δ^i δ^j δ^k>, δ = <y> − y

    double third_at(int i, int j, int k) const { return third[t3(i, j, k)]; }
    double centered_at(int i, int j, int k) const { return centered3[t3(i, j, k)]; }
};

// Quadrature sums over nodes with value > 0. Throws DomainError on empty support.
MomentSet moments_from_nodes(const std::vector<FiberNode>& nodes);

// Unit mean velocity <y>/sqrt(η(<y>,<y>)).
Vec mean_frame(const MomentSet& m);

}  // namespace avlab
