#include "avlab/em_fields.hpp"

#include <cmath>

#include "avlab/geometry.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace avlab;

TEST_SUITE("em_fields") {
    TEST_CASE("field tensors are exactly antisymmetric") {
        gen::Rng rng(21);
        for (int k = 0; k < 100; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            CHECK((F.lower() + F.lower().transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
    }

    TEST_CASE("mixed form negates the spatial rows") {
        Mat M = Mat::Zero(4, 4);
        M(0, 1) = 2.0;
        M(1, 2) = 3.0;
        const FieldTensor F(Mat(M - M.transpose()));
        const Mat X = F.mixed();
        CHECK(X(0, 1) == 2.0);
        CHECK(X(1, 0) == 2.0);  // η^11 F_10 = −(−2)
        CHECK(X(1, 2) == -3.0);
        CHECK(X(2, 1) == 3.0);
    }

    TEST_CASE("curl of standard potentials") {
        const Vec x = Vec::Constant(4, 0.3);
        const Potential zero = [](const Vec&) { return Vec(Vec::Zero(4)); };
        CHECK(field_from_potential(zero, x, 1e-4).lower().cwiseAbs().maxCoeff() == 0.0);
        const double B = 2.5, E = 1.5;
        const Potential Ab = [B](const Vec& p) {
            Vec a = Vec::Zero(4);
            a(2) = B * p(1);
            return a;
        };
        const FieldTensor Fb = field_from_potential(Ab, x, 1e-4);
        CHECK(Fb(1, 2) == doctest::Approx(B));
        CHECK(Fb(2, 1) == doctest::Approx(-B));
        CHECK(std::abs(Fb(0, 1)) + std::abs(Fb(0, 3)) + std::abs(Fb(1, 3)) < 1e-10);
        const Potential Ae = [E](const Vec& p) {
            Vec a = Vec::Zero(4);
            a(0) = -E * p(1);
            return a;
        };
        CHECK(field_from_potential(Ae, x, 1e-4)(0, 1) == doctest::Approx(E));
    }

    TEST_CASE("curl is linear in the potential") {
        gen::Rng rng(22);
        const Mat P = gen::field(rng, 4).lower();
        const Mat Q = gen::field(rng, 4).lower();
        const Potential A1 = [P](const Vec& p) { return Vec(P * p + 0.1 * p.cwiseProduct(p)); };
        const Potential A2 = [Q](const Vec& p) { return Vec(Q * p); };
        const Potential sum = [&](const Vec& p) { return Vec(2.0 * A1(p) - 3.0 * A2(p)); };
        const Vec x = gen::vec(rng, 4);
        const Mat lhs = field_from_potential(sum, x, 1e-4).lower();
        const Mat rhs = 2.0 * field_from_potential(A1, x, 1e-4).lower() - 3.0 * field_from_potential(A2, x, 1e-4).lower();
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-9);
    }

    TEST_CASE("closedness") {
        const auto ub = make_scenario("uniform_b");
        const FieldFunction Fb = [ub](const Vec& p) { return ub->field(p); };
        CHECK(check_closed(Fb, Vec::Zero(4), 1e-3) < 1e-10);
        const auto grad = make_scenario("b_gradient");
        const FieldFunction Fg = [grad](const Vec& p) { return grad->field(p); };
        CHECK(check_closed(Fg, Vec::Constant(4, 0.5), 1e-3) < 1e-6);
        // F_12 = x⁰ is not closed: ∂_0 F_12 = 1.
        const FieldFunction bad = [](const Vec& p) {
            Mat M = Mat::Zero(4, 4);
            M(1, 2) = p(0);
            M(2, 1) = -p(0);
            return FieldTensor(M);
        };
        CHECK(check_closed(bad, Vec::Zero(4), 1e-3) == doctest::Approx(1.0).epsilon(1e-6));
    }

    TEST_CASE("scenario library matches the curl of its potentials") {
        for (const auto& info : list_scenarios())
            for (int n : info.dims) {
                const auto s = make_scenario(info.name, {}, n);
                for (double c : {0.0, 0.7, -1.3}) {
                    const Vec x = Vec::Constant(n, c);
                    const Mat diff = s->field(x).lower() - field_from_potential(s->potential(), x, 1e-4).lower();
                    INFO(info.name << " n=" << n);
                    CHECK(diff.cwiseAbs().maxCoeff() < 1e-6);
                }
            }
    }

    TEST_CASE("scenario factory errors") {
        CHECK_THROWS_AS(make_scenario("nope"), std::invalid_argument);
        CHECK_THROWS_AS(make_scenario("uniform_b", {{"Q", 1.0}}), std::invalid_argument);
        CHECK_THROWS_AS(make_scenario("uniform_b", {}, 2), std::invalid_argument);
        const auto s = make_scenario("uniform_b", {{"box", 1.0}});
        CHECK_THROWS_AS(s->field(Vec::Constant(4, 2.0)), DomainError);
    }

    TEST_CASE("uniform B has gyroradius 1 at rapidity 3 by default") {
        const auto s = make_scenario("uniform_b");
        CHECK(s->field(Vec::Zero(4))(1, 2) == doctest::Approx(std::sinh(3.0)));
        // p_perp / B with p_perp = sinh(3)
        CHECK(std::sinh(3.0) / s->strength() == doctest::Approx(1.0));
    }

    TEST_CASE("operator norm") {
        Vec U = Vec::Zero(4);
        U(0) = 1.0;
        CHECK(field_operator_norm(FieldTensor(4), U) == 0.0);
        const auto s = make_scenario("uniform_b", {{"B", 2.0}});
        const FieldTensor F = s->field(Vec::Zero(4));
        CHECK(field_operator_norm(F, U) == doctest::Approx(2.0));
        gen::Rng rng(23);
        for (int k = 0; k < 20; ++k) {
            const FieldTensor G = gen::field(rng, 4);
            const Vec W = gen::unit_timelike(rng, 4);
            const double lam = gen::uniform(rng, -4, 4);
            CHECK(field_operator_norm(G.scaled(lam), W) ==
                  doctest::Approx(std::abs(lam) * field_operator_norm(G, W)).epsilon(1e-10));
        }
    }
}
