#include <catch2/catch_amalgamated.hpp>

#include "cellflow/channel_flow.hpp"
#include "cellflow/picard.hpp"
#include "test_helpers.hpp"

using namespace cellflow;
using cellflow::testing::coarse_channel;
using cellflow::testing::coarse_e1;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Eigen::Vector3d flux_of(const CellContext& ctx, const StokesSolution& sol) {
    const auto nodal = ctx.space->expand_velocity(sol.velocity);
    return integrate_velocity(*ctx.space, *ctx.cache, nodal);
}

} // namespace

TEST_CASE("Newtonian law converges in exactly one iteration", "[picard]") {
    const auto& ctx = coarse_channel();
    SaddleSolver solver;
    const auto sol = picard_solve(*ctx.assembler, solver, Newtonian{2.0},
                                  Eigen::Vector3d::UnitX());
    CHECK(sol.diag.iterations == 1);
    CHECK(sol.diag.history.size() == 1);
    CHECK(sol.diag.history[0].rel_increment == 0.0);
    // -div(eta D[w]) channel: w = z(1-z)/eta, flux 1/(6 eta); exact in P2.
    CHECK_THAT(flux_of(ctx, sol)[0], WithinRel(1.0 / 12.0, 1e-9));
}

TEST_CASE("Carreau channel matches the 1D oracle within 2 percent", "[picard]") {
    const auto& ctx = coarse_channel();
    const Carreau law{1.0, 1e-3, 1.0, 1.7};
    SaddleSolver solver;
    const auto sol = picard_solve(*ctx.assembler, solver, law, Eigen::Vector3d::UnitX());
    const double oracle = channel_flux(law, 1.0);
    CHECK_THAT(flux_of(ctx, sol)[0], WithinRel(oracle, 0.02));

    SECTION("solver hygiene at convergence") {
        CHECK(sol.diag.divergence_norm <= 1e-8);
        CHECK(sol.diag.pressure_mean <= 1e-10);
        CHECK(sol.diag.residual <= 1e-10);
    }
    SECTION("energy identity") {
        const auto nodal = ctx.space->expand_velocity(sol.velocity);
        const auto dnorm = deformation_norm_field(*ctx.space, *ctx.cache, nodal);
        std::vector<double> visc(dnorm.size());
        for (size_t i = 0; i < visc.size(); ++i) visc[i] = viscosity(ViscosityLaw{law}, dnorm[i]);
        const double energy = dissipation_energy(*ctx.space, *ctx.cache, nodal, visc,
                                                 GradientForm::SymmetricGradient);
        const double work = Eigen::Vector3d::UnitX().dot(flux_of(ctx, sol));
        CHECK_THAT(energy, WithinRel(work, 1e-6));
    }
    SECTION("re-solving at the converged viscosity is a fixed point") {
        const auto nodal = ctx.space->expand_velocity(sol.velocity);
        const auto dnorm = deformation_norm_field(*ctx.space, *ctx.cache, nodal);
        std::vector<double> visc(dnorm.size());
        for (size_t i = 0; i < visc.size(); ++i) visc[i] = viscosity(ViscosityLaw{law}, dnorm[i]);
        auto sys = ctx.assembler->assemble(visc, GradientForm::SymmetricGradient,
                                           Eigen::Vector3d::UnitX());
        SaddleSolver lin;
        lin.factorize(sys, ctx.assembler->assemble_pressure_mass(visc));
        const auto re = lin.solve(sys, 1e-10);
        const double change = (re.u - sol.velocity).norm() / sol.velocity.norm();
        CHECK(change <= 10.0 * 1e-8);
    }
}

TEST_CASE("deformation norm field has the expected exact values", "[picard]") {
    const auto& ctx = coarse_channel();
    SECTION("zero field") {
        const std::vector<Eigen::Vector3d> nodal(ctx.space->n_vel_nodes(),
                                                 Eigen::Vector3d::Zero());
        for (double d : deformation_norm_field(*ctx.space, *ctx.cache, nodal)) CHECK(d == 0.0);
    }
    SECTION("linear shear u = (z, 0, 0) gives 1/sqrt(2) everywhere") {
        std::vector<Eigen::Vector3d> nodal(ctx.space->n_vel_nodes());
        for (int n = 0; n < ctx.space->n_vel_nodes(); ++n)
            nodal[n] = {ctx.space->node_position(n).z(), 0.0, 0.0};
        for (double d : deformation_norm_field(*ctx.space, *ctx.cache, nodal))
            CHECK_THAT(d, WithinRel(1.0 / std::sqrt(2.0), 1e-12));
    }
    SECTION("Poiseuille shear profile |D| = |1 - 2z| / (2 sqrt(2))") {
        std::vector<Eigen::Vector3d> nodal(ctx.space->n_vel_nodes());
        for (int n = 0; n < ctx.space->n_vel_nodes(); ++n) {
            const double z = ctx.space->node_position(n).z();
            nodal[n] = {0.5 * z * (1.0 - z), 0.0, 0.0};
        }
        const auto dn = deformation_norm_field(*ctx.space, *ctx.cache, nodal);
        const auto& quad = tet_quadrature();
        for (int t = 0; t < ctx.cache->n_tets; ++t) {
            for (int q = 0; q < ElementCache::kQ; ++q) {
                const auto& T = ctx.mesh->tets[t];
                double z = 0.0;
                for (int i = 0; i < 4; ++i) z += quad.bary[q][i] * ctx.mesh->vertices[T[i]].z();
                const double expected = std::abs(0.5 - z) / std::sqrt(2.0);
                REQUIRE_THAT(dn[t * ElementCache::kQ + q], WithinAbs(expected, 1e-12));
            }
        }
    }
}

TEST_CASE("dilatant Carreau on the obstructed cell converges monotonically", "[picard]") {
    const auto& ctx = coarse_e1();
    SaddleSolver solver;
    const auto sol = picard_solve(*ctx.assembler, solver, Carreau{1.0, 1e-3, 100.0, 2.6},
                                  Eigen::Vector3d::UnitX());
    CHECK(sol.diag.iterations <= 60);
    const auto& h = sol.diag.history;
    REQUIRE(h.size() >= 4);
    for (size_t k = 3; k + 1 < h.size(); ++k)
        CHECK(h[k + 1].rel_increment <= 1.05 * h[k].rel_increment);
}

TEST_CASE("exhausted iteration budget raises NoConvergence with history", "[picard]") {
    const auto& ctx = coarse_channel();
    SaddleSolver solver;
    PicardOptions opts;
    opts.max_iter = 1;
    try {
        picard_solve(*ctx.assembler, solver, Carreau{1.0, 1e-3, 100.0, 2.6},
                     Eigen::Vector3d::UnitX(), opts);
        FAIL("expected NoConvergence");
    } catch (const NoConvergence& e) {
        CHECK(e.history.size() == 2);
        CHECK(e.history.front().omega == 1.0);
        CHECK(e.history.back().omega == 0.5); // automatic one-time fallback
    }
}
