#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "cellflow/channel_flow.hpp"
#include "cellflow/homogenization.hpp"
#include "test_helpers.hpp"

using namespace cellflow;
using cellflow::testing::coarse_channel;
using cellflow::testing::coarse_e1;
using cellflow::testing::coarse_e4;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("unobstructed permeability tensor is I/12", "[homogenize]") {
    const auto comp = permeability_tensor_detailed(coarse_channel());
    const auto& A = comp.tensor.A;
    CHECK_THAT(A(0, 0), WithinRel(1.0 / 12.0, 1e-9));
    CHECK_THAT(A(1, 1), WithinRel(1.0 / 12.0, 1e-9));
    CHECK_THAT(A(0, 1), WithinAbs(0.0, 1e-10));
    CHECK_THAT(A(1, 0), WithinAbs(0.0, 1e-10));
    comp.tensor.validate();
    for (const auto& sol : comp.solutions) {
        CHECK(sol.diag.divergence_norm <= 1e-8);
        CHECK(sol.diag.pressure_mean <= 1e-10);
    }
    // Symmetric-form tensor doubles the Laplacian-form channel value.
    const auto sym = permeability_tensor_symmetric(coarse_channel());
    CHECK_THAT(sym.A(0, 0), WithinRel(1.0 / 6.0, 1e-9));
}

TEST_CASE("disk tensors are isotropic and reciprocal", "[homogenize]") {
    const auto tensor = permeability_tensor(coarse_e1());
    const auto& A = tensor.A;
    CHECK(std::abs(A(0, 1) - A(1, 0)) <= 1e-8 * A.norm());
    CHECK(std::abs(A(0, 0) - A(1, 1)) <= 0.01 * A(0, 0));
    CHECK(std::abs(A(0, 1)) <= 1e-3 * A(0, 0));
    tensor.validate();
}

TEST_CASE("obstacles reduce permeability monotonically with area", "[homogenize]") {
    const double none = permeability_tensor(coarse_channel()).A(0, 0);
    const double small = permeability_tensor(coarse_e1()).A(0, 0);
    const double large = permeability_tensor(coarse_e4()).A(0, 0);
    CHECK(none > small);
    CHECK(small > large);
    CHECK(large > 0.0);
}

TEST_CASE("quarter-turn rotation transposes the ellipse tensor", "[homogenize]") {
    CellSpec e2;
    e2.shape = InclusionShape::ellipse(0.3, 0.1, 0.0);
    e2.n_seg = 48;
    e2.h = 0.14;
    e2.n_layers = 5;
    CellSpec e3 = e2;
    e3.shape = InclusionShape::ellipse(0.3, 0.1, std::numbers::pi / 2.0);
    const auto A2 = permeability_tensor(make_cell_context(e2)).A;
    const auto A3 = permeability_tensor(make_cell_context(e3)).A;
    CHECK_THAT(A3(0, 0), WithinRel(A2(1, 1), 0.02));
    CHECK_THAT(A3(1, 1), WithinRel(A2(0, 0), 0.02));
    CHECK(A2(0, 0) > A2(1, 1)); // easier flow along the major axis

    SECTION("intermediate rotation: trace preserved, off-diagonal bounded") {
        // Conjugation R A R^t is broken by the square periodic lattice (the
        // published pi/4 off-diagonal is 43% below the conjugation value), so
        // only the lattice-compatible parts are asserted.
        const double theta = std::numbers::pi / 8.0;
        CellSpec rot = e2;
        rot.shape = InclusionShape::ellipse(0.3, 0.1, theta);
        const auto Ar = permeability_tensor(make_cell_context(rot)).A;
        CHECK_THAT(Ar.trace(), WithinRel(A2.trace(), 0.03));
        const double conj_off = 0.5 * (A2(0, 0) - A2(1, 1)); // pi/4 bound
        CHECK(Ar(0, 1) > 0.0);
        CHECK(Ar(0, 1) < conj_off);
        CHECK(Ar(0, 0) > Ar(1, 1)); // still easier along the rotated major axis
    }
}

TEST_CASE("permeability operator basics", "[homogenize]") {
    const auto& ctx = coarse_channel();
    SECTION("zero forcing short-circuits to zero") {
        const auto s = permeability_operator(ctx, Carreau{1.0, 1e-3, 1.0, 1.7},
                                             Eigen::Vector2d::Zero());
        CHECK(s.U.norm() == 0.0);
        CHECK(s.diag.iterations == 0);
    }
    SECTION("power-law channel against the closed form") {
        const auto s = permeability_operator(ctx, PowerLaw{1.0, 3.0, 1e-8}, {1.0, 0.0});
        CHECK_THAT(s.U.x(), WithinRel(channel_flux_closed_power(3.0, 1.0), 0.02));
        CHECK_THAT(s.U.y(), WithinAbs(0.0, 1e-6 * (1.0 + s.U.norm())));
        CHECK(std::abs(s.w3_integral) <= 1e-6 * (1.0 + s.U.norm()));
    }
    SECTION("Newtonian-limit Carreau recovers the xi/6 channel flux") {
        const auto s = permeability_operator(ctx, Carreau{1.0, 1e-3, 1e-6, 1.7}, {1.0, 0.0});
        CHECK_THAT(s.U.x(), WithinRel(1.0 / 6.0, 0.02));
    }
}

TEST_CASE("power-law operator is homogeneous of degree r' - 1", "[homogenize]") {
    const auto& ctx = coarse_e1();
    const PowerLaw law{1.0, 2.3, 1e-9};
    const double rp = conjugate_exponent(2.3);
    const auto base = permeability_operator(ctx, law, {1.0, 0.0});
    const auto twice = permeability_operator(ctx, law, {2.0, 0.0});
    CHECK_THAT(twice.U.x(), WithinRel(std::pow(2.0, rp - 1.0) * base.U.x(), 0.01));
}

TEST_CASE("operator is monotone and disk-aligned", "[homogenize]") {
    const auto& ctx = coarse_e1();
    const Carreau law{1.0, 1e-3, 10.0, 1.7};
    const std::array<Eigen::Vector2d, 3> xis = {
        Eigen::Vector2d{0.25, 0.0}, Eigen::Vector2d{1.0, 0.0}, Eigen::Vector2d{0.5, 0.5}};
    std::array<Eigen::Vector2d, 3> us;
    for (size_t i = 0; i < xis.size(); ++i) {
        us[i] = permeability_operator(ctx, law, xis[i]).U;
        // Alignment for the disk: U parallel to xi.
        const double cross =
            std::abs(xis[i].x() * us[i].y() - xis[i].y() * us[i].x()) / (xis[i].norm() * us[i].norm());
        CHECK(cross <= 5e-3);
    }
    for (size_t i = 0; i < xis.size(); ++i)
        for (size_t j = i + 1; j < xis.size(); ++j)
            CHECK((us[i] - us[j]).dot(xis[i] - xis[j]) > 0.0);
}

TEST_CASE("darcy_velocity covers the three regimes", "[homogenize]") {
    auto ctx = std::make_shared<const CellContext>(coarse_channel());
    SECTION("linear Darcy is a matrix-vector product with V3 = 0") {
        const auto law = make_effective_law(ctx, Carreau{1.0, 1e-3, 1.0, 1.7}, 0.5);
        REQUIRE(law.tensor.has_value());
        const Eigen::Vector3d v = darcy_velocity(law, {1.0, 0.0});
        CHECK_THAT(v.x(), WithinRel(law.tensor->A(0, 0), 1e-12));
        CHECK(v.z() == 0.0);
    }
    SECTION("Carreau regime at r = 2 equals linear with the half-factor reconciliation") {
        const auto law = make_effective_law(ctx, Carreau{1.0, 1e-3, 1.0, 2.0}, 1.0);
        // regime_select puts r = 2 in the linear branch with eta0.
        REQUIRE(std::holds_alternative<LinearDarcy>(law.kind));
        const Eigen::Vector3d lin = darcy_velocity(law, {1.0, 0.0});
        const auto op = permeability_operator(*ctx, Carreau{1.0, 1e-3, 1.0, 2.0}, {1.0, 0.0});
        CHECK_THAT(op.U.x(), WithinRel(2.0 * lin.x(), 0.02));
    }
    SECTION("power regime applies the theorem prefactor") {
        const Carreau fluid{1.0, 1e-3, 1.0, 2.3};
        auto law = make_effective_law(ctx, fluid, 2.0, 1e-8);
        REQUIRE(std::holds_alternative<PowerDarcy>(law.kind));
        const Eigen::Vector3d v = darcy_velocity(law, {1.0, 0.0});
        const auto raw = permeability_operator(*ctx, PowerLaw{1.0, 2.3, 1e-8}, {1.0, 0.0});
        CHECK_THAT(v.x(), WithinRel(power_law_prefactor(fluid) * raw.U.x(), 1e-10));
    }
}
