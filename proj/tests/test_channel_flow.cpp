#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "cellflow/channel_flow.hpp"

using namespace cellflow;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("Newtonian channel flux is xi/(6 eta), quadrature exact", "[channel]") {
    CHECK_THAT(channel_flux(Newtonian{1.0}, 1.0), WithinRel(1.0 / 6.0, 1e-12));
    CHECK_THAT(channel_flux(Newtonian{2.0}, 1.0), WithinRel(1.0 / 12.0, 1e-12));
    CHECK_THAT(channel_flux(Newtonian{1.0}, 0.3), WithinRel(0.3 / 6.0, 1e-12));
}

TEST_CASE("power-law channel flux matches the closed form", "[channel]") {
    for (double r : {2.3, 2.6, 3.0}) {
        for (double xi : {0.1, 1.0, 10.0}) {
            const double numeric = channel_flux(PowerLaw{1.0, r, 0.0}, xi);
            const double closed = channel_flux_closed_power(r, xi);
            REQUIRE_THAT(numeric, WithinRel(closed, 1e-8));
        }
    }
    SECTION("frozen spot values") {
        CHECK_THAT(channel_flux_closed_power(2.0, 1.0), WithinRel(1.0 / 6.0, 1e-15));
        CHECK_THAT(channel_flux_closed_power(3.0, 1.0), WithinAbs(0.237842, 1e-6));
        CHECK(channel_flux_closed_power(2.7, 0.0) == 0.0);
    }
    SECTION("pseudoplastic exponents obey the same closed form") {
        for (double r : {1.5, 1.8})
            CHECK_THAT(channel_flux(PowerLaw{1.0, r, 0.0}, 1.0),
                       WithinRel(channel_flux_closed_power(r, 1.0), 1e-8));
    }
}

TEST_CASE("Carreau channel flux properties", "[channel]") {
    CHECK(channel_flux(Carreau{1.0, 1e-3, 1.0, 1.7}, 0.0) == 0.0);

    SECTION("strictly increasing in xi") {
        const Carreau law{1.0, 1e-3, 10.0, 1.7};
        double prev = 0.0;
        for (double xi : {0.01, 0.1, 0.5, 1.0, 3.0, 10.0}) {
            const double u = channel_flux(law, xi);
            REQUIRE(u > prev);
            prev = u;
        }
    }
    SECTION("lambda-independent at r = 2") {
        const double a = channel_flux(Carreau{1.0, 1e-3, 1.0, 2.0}, 0.4);
        const double b = channel_flux(Carreau{1.0, 1e-3, 100.0, 2.0}, 0.4);
        CHECK_THAT(a, WithinRel(b, 1e-12));
        CHECK_THAT(a, WithinRel(0.4 / 6.0, 1e-12));
    }
    SECTION("bounded by the Newtonian envelopes") {
        for (double xi : {0.2, 1.0, 4.0}) {
            const double eta0_flux = channel_flux(Newtonian{1.0}, xi);
            const double etainf_flux = channel_flux(Newtonian{1e-3}, xi);
            const double thin = channel_flux(Carreau{1.0, 1e-3, 10.0, 1.7}, xi);
            CHECK(thin >= eta0_flux);
            CHECK(thin <= etainf_flux);
            CHECK(channel_flux(Carreau{1.0, 1e-3, 10.0, 2.6}, xi) <= eta0_flux);
        }
    }
}

TEST_CASE("channel profile shape", "[channel]") {
    const auto prof = channel_profile(Carreau{1.0, 1e-3, 10.0, 1.7}, 1.0, 201);
    const int n = static_cast<int>(prof.z.size());
    CHECK(prof.w.front() == 0.0);
    CHECK_THAT(prof.w.back(), WithinAbs(0.0, 1e-9));
    CHECK_THAT(prof.dw[(n - 1) / 2], WithinAbs(0.0, 1e-12)); // w'(1/2) = 0
    for (int i = 0; i < n; ++i)
        CHECK_THAT(prof.w[i], WithinAbs(prof.w[n - 1 - i], 1e-9)); // symmetry
    // Flux consistent with a trapezoid sum of the profile.
    double trapz = 0.0;
    for (int i = 0; i + 1 < n; ++i)
        trapz += 0.5 * (prof.w[i] + prof.w[i + 1]) * (prof.z[i + 1] - prof.z[i]);
    CHECK_THAT(prof.flux, WithinRel(trapz, 1e-4));
}

TEST_CASE("shear bracket growth is bounded", "[channel]") {
    CHECK_THROWS_AS(channel_flux(Carreau{1.0, 1e-3, 1.0, 1.7}, 1e29), RootBracketFailure);
}
