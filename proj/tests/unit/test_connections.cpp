#include "avlab/connections.hpp"

#include <cmath>

#include "avlab/geometry.hpp"
#include "avlab/moments.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace avlab;

namespace {

double max_diff(const ConnectionCoeffs& a, const ConnectionCoeffs& b) { return (a - b).max_abs(); }

// Two equal-weight nodes at rapidity-frame offsets ±a along the first spatial axis of U's rest frame.
std::vector<FiberNode> pair_nodes(const Vec& U, double a) {
    const Mat L = boost_from_rest(U);
    std::vector<FiberNode> out;
    for (double s : {-a, a}) {
        Vec sp = Vec::Zero(U.size() - 1);
        sp(0) = s;
        out.push_back({L * HyperboloidVector::lift(sp).components(), 1.0, 1.0});
    }
    return out;
}

}  // namespace

TEST_SUITE("connections") {
    TEST_CASE("spray identity for random field and velocity draws") {
        gen::Rng rng(31);
        for (int k = 0; k < 1000; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            const Vec y = gen::timelike(rng, 4);
            const Vec lhs = lorentz_coeffs(F, y).contract(y, y);
            const Vec rhs = lorentz_spray(F, y);
            INFO("draw " << k);
            // Backward-error scale: the contraction sums terms of size |F||y|².
            CHECK((lhs - rhs).norm() <= 1e-12 * F.lower().norm() * y.squaredNorm());
        }
    }

    TEST_CASE("homogeneity: coefficients degree 0, spray degree 2") {
        gen::Rng rng(32);
        for (int k = 0; k < 200; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            const Vec y = gen::timelike(rng, 4);
            const double lam = gen::uniform(rng, 0.1, 10.0);
            const auto G = lorentz_coeffs(F, y);
            CHECK(max_diff(lorentz_coeffs(F, Vec(lam * y)), G) < 1e-13 * F.lower().norm() * y.squaredNorm());
            const Vec s1 = lorentz_spray(F, Vec(lam * y)), s0 = lorentz_spray(F, y);
            CHECK((s1 - lam * lam * s0).norm() <= 1e-11 * lam * lam * s0.norm() + 1e-14);
        }
    }

    TEST_CASE("coefficients are symmetric in the lower indices") {
        gen::Rng rng(33);
        for (int k = 0; k < 100; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            CHECK(lorentz_coeffs(F, gen::unit_timelike(rng, 4)).asymmetry() == 0.0);
            const auto m = moments_from_nodes(pair_nodes(gen::unit_timelike(rng, 4), 0.2));
            CHECK(averaged_coeffs(F, m).asymmetry() == 0.0);
        }
    }

    TEST_CASE("spray jacobian matches finite differences") {
        gen::Rng rng(34);
        for (int k = 0; k < 20; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            const Vec y = gen::unit_timelike(rng, 4, 2.0);
            const Mat J = lorentz_spray_jacobian(F, y);
            const double h = 1e-6;
            for (int c = 0; c < 4; ++c) {
                Vec yp = y, ym = y;
                yp(c) += h;
                ym(c) -= h;
                const Vec fd = (lorentz_spray(F, yp) - lorentz_spray(F, ym)) / (2 * h);
                CHECK((fd - J.col(c)).norm() < 1e-6 * (1.0 + J.norm()));
            }
        }
    }

    TEST_CASE("Lorentz force is η-orthogonal to the velocity") {
        gen::Rng rng(35);
        for (int k = 0; k < 200; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            const Vec y = gen::unit_timelike(rng, 4);
            const Vec s = lorentz_spray(F, y);
            CHECK(std::abs(minkowski_inner(s, y)) < 1e-10 * (1.0 + s.norm() * y.norm()));
        }
    }

    TEST_CASE("interpolation endpoints and midpoint") {
        gen::Rng rng(36);
        const FieldTensor F = gen::field(rng, 4);
        const Vec U = gen::unit_timelike(rng, 4, 2.0);
        const auto m = moments_from_nodes(pair_nodes(U, 0.3));
        const Vec y = gen::unit_timelike(rng, 4, 2.0);
        const auto L = lorentz_coeffs(F, y);
        const auto A = averaged_coeffs(F, m);
        CHECK(max_diff(interpolated_coeffs(0.0, F, y, m), L) == 0.0);
        CHECK(max_diff(interpolated_coeffs(1.0, F, y, m), A) == 0.0);
        ConnectionCoeffs mid = 0.5 * L;
        mid += 0.5 * A;
        CHECK(max_diff(interpolated_coeffs(0.5, F, y, m), mid) < 1e-13);
        CHECK_THROWS_AS(interpolated_coeffs(-0.1, F, y, m), std::invalid_argument);
        CHECK_THROWS_AS(interpolated_coeffs(1.1, F, y, m), std::invalid_argument);
    }

    TEST_CASE("averaged coefficients approach Lorentz coefficients as the support shrinks") {
        gen::Rng rng(37);
        for (int k = 0; k < 20; ++k) {
            const FieldTensor F = gen::field(rng, 4);
            const Vec U = gen::unit_timelike(rng, 4, 3.0);
            double prev = 0.0;
            for (double a : {0.1, 0.05, 0.025}) {
                const auto m = moments_from_nodes(pair_nodes(U, a));
                const double d = max_diff(averaged_coeffs(F, m), lorentz_coeffs(F, mean_frame(m)));
                if (prev > 0.0) CHECK(d < 0.6 * prev);
                prev = d;
            }
        }
    }

    TEST_CASE("single-node moments reproduce Lorentz coefficients exactly") {
        Vec y(4);
        y << 1.25, 0.75, 0.0, 0.0;  // η(y,y) = 1 in exact arithmetic
        gen::Rng rng(38);
        const FieldTensor F = gen::field(rng, 4);
        const auto m = moments_from_nodes({{y, 2.0, 0.5}});
        CHECK(max_diff(averaged_coeffs(F, m), lorentz_coeffs(F, y)) == 0.0);
        MomentSet empty;
        CHECK_THROWS_AS(averaged_coeffs(F, empty), DomainError);
    }

    TEST_CASE("covariant derivative of linear fields with zero connection") {
        gen::Rng rng(39);
        const Mat A = gen::field(rng, 4).lower() + Mat::Identity(4, 4);
        const Vec b = gen::vec(rng, 4);
        const ConnectionField zero = [](const Vec&) { return ConnectionCoeffs(4); };
        const VectorField W = [&](const Vec& x) { return Vec(A * x + b); };
        for (int k = 0; k < 20; ++k) {
            const Vec V0 = gen::vec(rng, 4);
            const VectorField V = [&](const Vec&) { return V0; };
            const Vec x = gen::vec(rng, 4);
            for (int order : {2, 4})
                CHECK((covariant_derivative(zero, V, W, x, 0.1, order) - A * V0).norm() < 1e-10 * (1 + (A * V0).norm()));
        }
    }

    TEST_CASE("covariant derivative obeys the Leibniz rule") {
        gen::Rng rng(40);
        const FieldTensor F = gen::field(rng, 4, 1.0);
        const Vec U = gen::unit_timelike(rng, 4, 1.0);
        const ConnectionField gamma = [&](const Vec&) { return lorentz_coeffs(F, U); };
        const VectorField V = [](const Vec& x) {
            Vec v(4);
            v << 1.0 + 0.1 * x(1), std::sin(x(0)), 0.3, x(2) * x(3);
            return v;
        };
        const VectorField W = [](const Vec& x) {
            Vec w(4);
            w << std::cos(x(1)), x(0) * x(0), 1.0, -x(3);
            return w;
        };
        const std::function<double(const Vec&)> phi = [](const Vec& x) { return std::exp(0.2 * x(0)) + x(1) * x(2); };
        const VectorField phiW = [&](const Vec& x) { return Vec(phi(x) * W(x)); };
        const Vec x = gen::vec(rng, 4);
        const double h = 1e-3;
        const Vec lhs = covariant_derivative(gamma, V, phiW, x, h, 4);
        const Vec rhs = directional_derivative(phi, V(x), x, h, 4) * W(x) + phi(x) * covariant_derivative(gamma, V, W, x, h, 4);
        CHECK((lhs - rhs).norm() < 1e-8 * (1 + rhs.norm()));
        CHECK_THROWS_AS(covariant_derivative(gamma, V, W, x, h, 3), std::invalid_argument);
        CHECK_THROWS_AS(covariant_derivative(gamma, V, W, x, 0.0), std::invalid_argument);
    }

    TEST_CASE("affine spray jacobian") {
        gen::Rng rng(41);
        const auto m = moments_from_nodes(pair_nodes(gen::unit_timelike(rng, 4), 0.2));
        const auto G = averaged_coeffs(gen::field(rng, 4), m);
        const Vec y = gen::vec(rng, 4);
        const Mat J = affine_spray_jacobian(G, y);
        for (int c = 0; c < 4; ++c) {
            Vec yp = y, ym = y;
            yp(c) += 1e-5;
            ym(c) -= 1e-5;
            CHECK(((affine_spray(G, yp) - affine_spray(G, ym)) / 2e-5 - J.col(c)).norm() < 1e-8 * (1 + J.norm()));
        }
    }
}
