#include "avlab/fluid.hpp"

#include <cmath>

#include "avlab/connections.hpp"
#include "avlab/distribution.hpp"
#include "avlab/kinetic.hpp"
#include "doctest.h"
#include "generators.hpp"

using namespace avlab;

namespace {

class ConstantMoments : public MomentField {
public:
    explicit ConstantMoments(MomentSet m) : m_(std::move(m)) {}
    MomentSet at(const Vec&) const override { return m_; }

private:
    MomentSet m_;
};

std::shared_ptr<const MomentField> beam_moments(double alpha, double skew) {
    BeamOptions o;
    o.skew = skew;
    return std::make_shared<FrozenMomentField>(make_beam_distribution(2.5, Vec(Vec::Unit(3, 0)), alpha, o));
}

// Stationary cold Lorentz fluid in a uniform magnetic field: concentric gyration about the x3 axis.
Vec rotating(const Vec& x, double B) {
    Vec v(4);
    v << std::sqrt(1.0 + B * B * (x(1) * x(1) + x(2) * x(2))), B * x(2), -B * x(1), 0.0;
    return v;
}

}  // namespace

TEST_SUITE("fluid") {
    TEST_CASE("constant mean field without force has zero residual") {
        const auto zero = make_scenario("zero");
        const auto mom = beam_moments(0.2, 0.3);
        const MeanVelocityField Vf(mom);
        const auto r = fluid_residual(Vf, averaged_connection_field(zero, mom), FieldTensor(4), Vec::Zero(4), 0.05);
        CHECK(r.norm_r_V == 0.0);
        CHECK(r.norm_r_u == 0.0);
        CHECK(r.incompat == 0.0);
        CHECK(r.incompat_moments == 0.0);
        CHECK(r.incompat_expanded == 0.0);
    }

    TEST_CASE("incompatibility term equals its moment expansion") {
        gen::Rng rng(71);
        for (double a : {0.4, 0.1})
            for (int k = 0; k < 5; ++k) {
                const auto mom = beam_moments(a, gen::uniform(rng, -0.5, 0.5));
                const FieldTensor F = gen::field(rng, 4);
                const ConnectionField G = [&](const Vec&) { return averaged_coeffs(F, mom->at(Vec::Zero(4))); };
                const auto r = fluid_residual(MeanVelocityField(mom), G, F, Vec::Zero(4), 0.01);
                CHECK(r.incompat == doctest::Approx(r.incompat_expanded).epsilon(1e-7));
            }
    }

    TEST_CASE("normalized residual satisfies the decomposition identity for a smooth field") {
        const auto field = make_scenario("uniform_b");
        // Mean field that varies in space: a non-unit rescaling of the rotating Lorentz fluid.
        struct Varying : MomentField {
            MomentSet at(const Vec& x) const override {
                MomentSet m;
                m.volume = 1.0;
                m.first = (1.0 + 0.1 * x(1) * x(1)) * rotating(x, 0.5);
                m.second = m.first * m.first.transpose();
                return m;
            }
        };
        const auto mom = std::make_shared<Varying>();
        const ConnectionField G = [&](const Vec& x) { return lorentz_coeffs(field->field(x), rotating(x, 0.5)); };
        Vec x = Vec::Zero(4);
        x(1) = 0.3;
        x(2) = -0.2;
        const MeanVelocityField Vf(mom);
        const double e1 = fluid_residual(Vf, G, field->field(x), x, 0.02).identity_residual;
        const double e2 = fluid_residual(Vf, G, field->field(x), x, 0.01).identity_residual;
        CHECK(e1 < 1e-3);
        CHECK(std::log2(e1 / e2) == doctest::Approx(2.0).epsilon(0.1));
    }

    TEST_CASE("Dirac data: averaged and Lorentz connections coincide and the bound vanishes") {
        const auto field = make_scenario("uniform_b");
        const double B = field->strength();
        const auto f = dirac_limit_distribution([](const Vec&) { return 1.0; }, [B](const Vec& x) { return rotating(x, B); });
        Vec x = Vec::Zero(4);  // V = (1, 0, 0, 0) here, exactly unit
        const auto m = compute_moments(f, x);
        CHECK((averaged_coeffs(field->field(x), m) - lorentz_coeffs(field->field(x), m.first)).max_abs() == 0.0);
        const auto rhs = fluid_bound_rhs(f, x, Vec::Zero(4));
        CHECK(rhs.rhs == 0.0);
        CHECK(rhs.alpha == 0.0);
        CHECK(third_moment_norm(m, m.first) == 0.0);
    }

    TEST_CASE("Dirac data on a Lorentz fluid: residual and integral-curve gap vanish") {
        const auto field = make_scenario("uniform_b", {{"B", 2.0}});
        const auto f = dirac_limit_distribution([](const Vec&) { return 1.0; }, [](const Vec& x) {
            Vec v = rotating(x, 2.0);
            return HyperboloidVector::normalize(v).components();
        });
        const auto mom = std::make_shared<FrozenMomentField>(f);
        Vec x = Vec::Zero(4);
        x(1) = 0.4;
        x(2) = 0.1;
        const auto rep = check_lorentz_fluid(field, MeanVelocityField(mom), {x}, 1e-3, 0.5, {}, 4);
        REQUIRE(rep.size() == 1);
        CHECK(rep[0].residual < 1e-8);
        CHECK(rep[0].curve_gap < 1e-7);
    }

    TEST_CASE("bound right-hand side scales like alpha cubed for a fixed skewed profile") {
        const Vec x = Vec::Zero(4);
        Vec dV0 = Vec::Zero(4);
        dV0(2) = 1.0;
        std::vector<double> as, rs;
        for (double a : {0.2, 0.1, 0.05}) {
            BeamOptions o;
            o.skew = 0.3;
            const auto f = make_beam_distribution(2.5, Vec(Vec::Unit(3, 0)), a, o);
            as.push_back(a);
            rs.push_back(fluid_bound_rhs(f, x, dV0).rhs);
        }
        for (double r : rs) CHECK(r > 0.0);
        CHECK(std::log(rs[0] / rs[2]) / std::log(as[0] / as[2]) == doctest::Approx(3.0).epsilon(0.1));
    }

    TEST_CASE("zero field gives zero incompatibility for every width") {
        for (double a : {0.4, 0.05}) {
            const auto mom = beam_moments(a, 0.3);
            const auto r = fluid_residual(MeanVelocityField(mom), [](const Vec&) { return ConnectionCoeffs(4); },
                                          FieldTensor(4), Vec::Zero(4), 0.01);
            CHECK(r.incompat == 0.0);
            CHECK(r.incompat_moments == 0.0);
        }
    }
}
