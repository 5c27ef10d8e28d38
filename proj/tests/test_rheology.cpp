#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cellflow/rheology.hpp"

using namespace cellflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Carreau viscosity evaluates Eq-form exactly", "[rheology]") {
    SECTION("zero shear gives eta0") {
        for (double lambda : {0.1, 1.0, 100.0})
            for (double r : {1.3, 1.7, 2.3, 3.0})
                CHECK(viscosity(Carreau{1.0, 1e-3, lambda, r}, 0.0) == 1.0);
    }
    SECTION("r = 2 is Newtonian at eta0 for every shear rate") {
        for (double d : {0.0, 0.3, 2.0, 55.0, 1e4})
            CHECK_THAT(viscosity(Carreau{1.0, 1e-3, 7.0, 2.0}, d), WithinRel(1.0, 1e-15));
    }
    SECTION("spot value at d = sqrt(3)") {
        const double d = std::sqrt(3.0);
        const double expected = 0.999 * std::pow(4.0, -0.15) + 0.001;
        CHECK_THAT(viscosity(Carreau{1.0, 1e-3, 1.0, 1.7}, d), WithinRel(expected, 1e-14));
        CHECK_THAT(expected, WithinAbs(0.8124, 5e-4));
    }
}

TEST_CASE("power-law viscosity with shear floor", "[rheology]") {
    CHECK_THAT(viscosity(PowerLaw{2.0, 3.0, 0.0}, 1.5), WithinRel(2.0 * 1.5, 1e-15));
    CHECK_THAT(viscosity(PowerLaw{1.0, 2.3, 0.0}, 4.0), WithinRel(std::pow(4.0, 0.3), 1e-14));
    // The floor keeps dilatant laws nonzero at rest.
    CHECK(viscosity(PowerLaw{1.0, 3.0, 1e-6}, 0.0) == 1e-6);
    CHECK(viscosity(Newtonian{0.7}, 123.0) == 0.7);
}

TEST_CASE("law parameter validation", "[rheology]") {
    CHECK_THROWS_AS(validate(Carreau{1e-3, 1.0, 1.0, 1.7}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Carreau{1.0, 1e-3, -1.0, 1.7}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Carreau{1.0, 1e-3, 1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PowerLaw{0.0, 2.3, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(validate(PowerLaw{1.0, 2.3, -1e-9}), std::invalid_argument);
    CHECK_THROWS_AS(validate(Newtonian{0.0}), std::invalid_argument);
    CHECK_NOTHROW(validate(Carreau{1.0, 1e-3, 100.0, 2.6}));
}

TEST_CASE("conjugate exponent", "[rheology]") {
    CHECK(conjugate_exponent(2.0) == 2.0);
    CHECK(conjugate_exponent(3.0) == 1.5);
    CHECK_THAT(conjugate_exponent(2.6), WithinRel(1.625, 1e-15));
    CHECK_THROWS_AS(conjugate_exponent(1.0), std::invalid_argument);
}

TEST_CASE("Carreau viscosity bounds on a log-spaced shear grid", "[rheology]") {
    for (double r : {1.3, 1.7, 1.95}) {
        const Carreau law{1.0, 1e-3, 5.0, r};
        for (int k = -16; k <= 12; ++k) {
            const double eta = viscosity(law, std::pow(10.0, 0.5 * k));
            CHECK(eta <= law.eta0 * (1.0 + 1e-15));
            CHECK(eta >= law.eta_inf * (1.0 - 1e-15));
        }
    }
    for (double r : {2.1, 2.6, 3.0}) {
        const Carreau law{1.0, 1e-3, 5.0, r};
        for (int k = -16; k <= 12; ++k)
            CHECK(viscosity(law, std::pow(10.0, 0.5 * k)) >= law.eta0 * (1.0 - 1e-15));
        CHECK(viscosity(law, 0.0) == law.eta0);
    }
}

TEST_CASE("stress s -> eta(s/sqrt(2)) s is strictly increasing", "[rheology]") {
    for (double r : {1.3, 1.7, 2.0, 2.3, 2.6, 3.0}) {
        for (double lambda : {1e-3, 1.0, 100.0}) {
            const ViscosityLaw law = Carreau{1.0, 1e-3, lambda, r};
            double prev = 0.0;
            for (int k = 0; k <= 160; ++k) {
                const double s = std::pow(10.0, -4.0 + 8.0 * k / 160.0);
                const double stress = viscosity(law, s / std::sqrt(2.0)) * s;
                REQUIRE(stress > prev);
                prev = stress;
            }
        }
    }
}

TEST_CASE("Carreau tends to eta0 as lambda d^2 -> 0", "[rheology]") {
    for (double r : {1.3, 1.7, 2.6}) {
        const double d = 1e-4; // lambda d^2 = 1e-8
        const double eta = viscosity(Carreau{1.0, 1e-3, 1.0, r}, d);
        CHECK_THAT(eta, WithinAbs(1.0, 1e-6));
        // Bound from the spec property list.
        const double bound = 1.0 * (std::exp(std::abs(0.5 * r - 1.0) * 1e-8) - 1.0);
        CHECK(std::abs(eta - 1.0) <= bound + 1e-15);
    }
}

TEST_CASE("regime selection reproduces the nine-cell table", "[rheology]") {
    const Carreau thin{1.0, 1e-3, 1.0, 1.7};
    const Carreau newt{1.0, 1e-3, 1.0, 2.0};
    const Carreau thick{1.0, 1e-3, 1.0, 2.3};

    auto linear_eta = [](const EffectiveLawKind& k) {
        REQUIRE(std::holds_alternative<LinearDarcy>(k));
        return std::get<LinearDarcy>(k).eta;
    };

    SECTION("gamma < 1: linear with eta0 for every r") {
        CHECK(linear_eta(regime_select(thin, 0.5)) == thin.eta0);
        CHECK(linear_eta(regime_select(newt, 0.5)) == newt.eta0);
        CHECK(linear_eta(regime_select(thick, 0.5)) == thick.eta0);
    }
    SECTION("gamma = 1: Carreau type unless Newtonian") {
        CHECK(std::holds_alternative<CarreauDarcy>(regime_select(thin, 1.0)));
        CHECK(linear_eta(regime_select(newt, 1.0)) == newt.eta0);
        CHECK(std::holds_alternative<CarreauDarcy>(regime_select(thick, 1.0)));
    }
    SECTION("gamma > 1: eta_inf / eta0 / power law") {
        CHECK(linear_eta(regime_select(thin, 2.0)) == thin.eta_inf);
        CHECK(linear_eta(regime_select(newt, 2.0)) == newt.eta0);
        CHECK(std::holds_alternative<PowerDarcy>(regime_select(thick, 2.0)));
    }
    SECTION("power prefactor carries the physical constants") {
        const auto kind = regime_select(thick, 2.0);
        const double rp = conjugate_exponent(2.3);
        const double expected = 1.0 / (std::pow(1.0, 0.5 * (2.0 - rp)) * std::pow(0.999, rp - 1.0));
        CHECK_THAT(std::get<PowerDarcy>(kind).prefactor, WithinRel(expected, 1e-14));
        CHECK_THAT(std::get<PowerDarcy>(kind).prefactor, WithinAbs(1.00077, 1e-4));
    }
}

TEST_CASE("regime selection is piecewise constant in gamma", "[rheology]") {
    const Carreau thick{1.0, 1e-3, 10.0, 2.6};
    const Carreau newt{1.0, 1e-3, 10.0, 2.0};
    for (double g : {-5.0, -1.0, 0.0, 0.7, 0.999})
        CHECK(std::get<LinearDarcy>(regime_select(thick, g)).eta == thick.eta0);
    CHECK(std::holds_alternative<CarreauDarcy>(regime_select(thick, 1.0)));
    for (double g : {1.001, 2.0, 40.0})
        CHECK(std::holds_alternative<PowerDarcy>(regime_select(thick, g)));
    for (double g : {-3.0, 0.5, 1.0, 1.5, 12.0})
        CHECK(std::get<LinearDarcy>(regime_select(newt, g)).eta == newt.eta0);
}

TEST_CASE("regime names match the published table wording", "[rheology]") {
    const Carreau thin{1.0, 1e-3, 1.0, 1.7};
    CHECK(regime_name(regime_select(thin, 0.5), thin) == "Linear 2D Darcy's law (viscosity eta0)");
    CHECK(regime_name(regime_select(thin, 2.0), thin) ==
          "Linear 2D Darcy's law (viscosity eta_inf)");
    CHECK(regime_name(regime_select(thin, 1.0), thin) == "Non-linear 2D Darcy's law (Carreau type)");
    const Carreau thick{1.0, 1e-3, 1.0, 2.6};
    CHECK(regime_name(regime_select(thick, 2.0), thick) ==
          "Non-linear 2D Darcy's law (power law type)");
}
