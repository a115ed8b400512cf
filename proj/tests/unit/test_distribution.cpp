#include "avlab/distribution.hpp"

#include <cmath>

#include "avlab/geometry.hpp"
#include "avlab/moments.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace avlab;

namespace {
Vec e1(int m) {
    Vec d = Vec::Zero(m);
    d(0) = 1.0;
    return d;
}
}  // namespace

TEST_SUITE("distribution") {
    TEST_CASE("beam centred at rapidity 3 has energy close to cosh 3") {
        const auto f = make_beam_distribution(3.0, e1(3), 0.05);
        const auto st = support_stats(f, Vec::Zero(4));
        CHECK(st.U(0) == doctest::Approx(std::cosh(3.0)).epsilon(0.01));
        CHECK(st.energy < std::cosh(3.0));
        CHECK(st.energy > 0.9 * std::cosh(3.0));
    }

    TEST_CASE("beam calibration hits the requested width") {
        for (double a : {0.4, 0.2, 0.1, 0.05})
            for (double rap : {0.0, 1.5, 3.0}) {
                BeamOptions o;
                o.skew = 0.3;
                const auto f = make_beam_distribution(rap, e1(3), a, o);
                INFO("alpha " << a << " rapidity " << rap);
                CHECK(support_stats(f, Vec::Zero(4)).alpha == doctest::Approx(a).epsilon(0.02));
            }
    }

    TEST_CASE("beam rejects bad arguments") {
        CHECK_THROWS_AS(make_beam_distribution(3.0, e1(3), 0.0), std::invalid_argument);
        CHECK_THROWS_AS(make_beam_distribution(3.0, e1(3), 1.5), std::invalid_argument);
        CHECK_THROWS_AS(make_beam_distribution(-1.0, e1(3), 0.1), std::invalid_argument);
        CHECK_THROWS_AS(make_beam_distribution(3.0, Vec::Zero(3), 0.1), std::invalid_argument);
        BeamOptions o;
        o.skew = 1.0;
        CHECK_THROWS_AS(make_beam_distribution(3.0, e1(3), 0.1, o), std::invalid_argument);
    }

    TEST_CASE("symmetric bump at rest has a rest-frame mean") {
        const auto f = make_beam_distribution(0.0, e1(3), 0.2);
        const auto m = compute_moments(f, Vec::Zero(4));
        CHECK(m.first.tail(3).norm() < 1e-12);
        CHECK(m.first(0) > 1.0);
    }

    TEST_CASE("mean velocity is invariant under rescaling the density") {
        gen::Rng rng(51);
        std::vector<FiberNode> nodes;
        for (int k = 0; k < 30; ++k)
            nodes.push_back({gen::unit_timelike(rng, 4, 0.5), gen::uniform(rng, 0.1, 1.0), gen::uniform(rng, 0.5, 2.0)});
        const auto m1 = moments_from_nodes(nodes);
        for (auto& nd : nodes) nd.value *= 7.5;
        const auto m2 = moments_from_nodes(nodes);
        CHECK((m1.first - m2.first).norm() < 1e-13);
        CHECK((m1.second - m2.second).norm() < 1e-12);
        CHECK(m2.volume == doctest::Approx(7.5 * m1.volume));
        CHECK(m2.volume_E == doctest::Approx(m1.volume_E));
    }

    TEST_CASE("two-node support width") {
        gen::Rng rng(52);
        for (int k = 0; k < 50; ++k) {
            const Vec U = gen::unit_timelike(rng, 4, 3.0);
            const double a = gen::uniform(rng, 0.01, 0.5);
            const Mat L = boost_from_rest(U);
            std::vector<FiberNode> nodes;
            for (double s : {-a, a}) {
                Vec sp = Vec::Zero(3);
                sp(1) = s;
                nodes.push_back({L * HyperboloidVector::lift(sp).components(), 1.0, 1.0});
            }
            const auto st = support_stats(nodes);
            CHECK(st.alpha == doctest::Approx(2.0 * a).epsilon(1e-8));
            CHECK(st.max_delta == doctest::Approx(a).epsilon(1e-8));
            CHECK((st.U - U).norm() < 1e-10 * U(0));
        }
    }

    TEST_CASE("centred third moment vanishes for symmetric node sets") {
        std::vector<FiberNode> nodes;
        for (double s : {-0.2, 0.2}) {
            Vec sp = Vec::Zero(3);
            sp(0) = s;
            nodes.push_back({HyperboloidVector::lift(sp).components(), 1.0, 1.0});
        }
        const auto m = moments_from_nodes(nodes);
        double c = 0.0;
        for (double v : m.centered3) c = std::max(c, std::abs(v));
        CHECK(c < 1e-15);
        CHECK_THROWS_AS(moments_from_nodes({}), DomainError);
    }

    TEST_CASE("Dirac limit reproduces the pointwise velocity exactly") {
        Vec V0(4);
        V0 << 1.25, 0.75, 0.0, 0.0;
        const auto f = dirac_limit_distribution([](const Vec& x) { return 2.0 + x(1); }, [V0](const Vec&) { return V0; });
        const Vec x = Vec::Constant(4, 0.5);
        const auto m = compute_moments(f, x);
        CHECK((m.first - V0).norm() == 0.0);
        CHECK(m.volume == 2.5);
        const auto st = support_stats(f, x);
        CHECK(st.alpha == 0.0);
        CHECK(st.max_delta == 0.0);
        const auto bad = dirac_limit_distribution([](const Vec&) { return 1.0; }, [](const Vec&) { return Vec(Vec::Constant(4, 1.0)); });
        CHECK_THROWS_AS(bad.quadrature(x), std::invalid_argument);
    }

    TEST_CASE("every node lies within 1.5 alpha of the mean") {
        for (double a : {0.4, 0.2, 0.1, 0.05})
            for (double skew : {0.0, 0.3, 0.6}) {
                BeamOptions o;
                o.skew = skew;
                const auto st = support_stats(make_beam_distribution(3.0, e1(3), a, o), Vec::Zero(4));
                CHECK(st.max_delta <= 1.5 * st.alpha);
            }
    }

    TEST_CASE("slab window cuts the density off in space") {
        const auto f = make_beam_distribution(1.0, e1(3), 0.1);
        Vec far = Vec::Zero(4);
        far(1) = f.slab().half_width + f.slab().edge + 1.0;
        CHECK(f.quadrature(far).empty());
        CHECK_FALSE(f.quadrature(Vec::Zero(4)).empty());
    }

    TEST_CASE("Sobolev norms are finite and positive on a beam") {
        const auto f = make_beam_distribution(2.0, e1(3), 0.1, {ProfileKind::bump, 0.3});
        const Vec x = Vec::Zero(4);
        Vec dV0 = Vec::Zero(4);
        dV0(1) = 0.01;
        const auto s = sobolev_norms(f, x, dV0);
        CHECK(s.norm_11 > 0.0);
        CHECK(std::isfinite(s.norm_02_sum));
    }
}
