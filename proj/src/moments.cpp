#include "avlab/moments.hpp"

#include <cmath>

#include "avlab/geometry.hpp"

namespace avlab {

MomentSet moments_from_nodes(const std::vector<FiberNode>& nodes) {
    std::vector<const FiberNode*> live;
    live.reserve(nodes.size());
    for (const auto& nd : nodes)
        if (nd.value > 0.0) live.push_back(&nd);
    if (live.empty()) throw DomainError("empty fiber support");

    const int n = static_cast<int>(live.front()->y.size());
    MomentSet m;
    m.n = n;
    m.first = Vec::Zero(n);
    m.second = Mat::Zero(n, n);

    if (live.size() == 1) {
        // Single node: moments are the node itself, bit for bit.
        const Vec& y = live.front()->y;
        m.volume = live.front()->weight();
        m.volume_E = live.front()->cell;
        m.first = y;
        m.second = y * y.transpose();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) m.third[t3(i, j, k)] = y(i) * y(j) * y(k);
        return m;
    }

    for (const FiberNode* nd : live) {
        const double w = nd->weight();
        m.volume += w;
        m.volume_E += nd->cell;
        m.first += w * nd->y;
    }
    m.first /= m.volume;
    for (const FiberNode* nd : live) {
        const double w = nd->weight() / m.volume;
        const Vec& y = nd->y;
        const Vec d = m.first - y;
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                m.second(i, j) += w * y(i) * y(j);
                const double wyy = w * y(i) * y(j);
                const double wdd = w * d(i) * d(j);
                for (int k = 0; k < n; ++k) {
                    m.third[t3(i, j, k)] += wyy * y(k);
                    m.centered3[t3(i, j, k)] += wdd * d(k);
                }
            }
        }
    }
    return m;
}

Vec mean_frame(const MomentSet& m) {
    const double q = minkowski_inner(m.first, m.first);
    if (!(q > 0.0) || !(m.first(0) > 0.0)) throw DomainError("mean velocity is not time-like");
    return m.first / std::sqrt(q);
}

}  // namespace avlab
