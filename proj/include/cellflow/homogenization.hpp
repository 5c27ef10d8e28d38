#pragma once

// Effective quantities of the cell problems. The permeability tensor A comes
// from the two unit-viscosity -Laplacian cell problems (FULL_GRADIENT, rhs e1
// and e2, one factorization); the permeability operator U(xi') integrates the
// solution of the nonlinear -div(eta D) problem driven by (xi', 0). The two
// weak forms differ by a factor 2 on divergence-free fields (div D[u] =
// Laplacian(u)/2) and are never converted into each other.

#include <array>
#include <memory>
#include <optional>

#include <Eigen/Dense>

#include "cellflow/assembly.hpp"
#include "cellflow/fields.hpp"
#include "cellflow/geometry.hpp"
#include "cellflow/mesh.hpp"
#include "cellflow/picard.hpp"
#include "cellflow/rheology.hpp"
#include "cellflow/saddle_solver.hpp"
#include "cellflow/space.hpp"

namespace cellflow {

/// Everything needed to run solves on one cell; immutable and shareable
/// across threads (each solve owns its SaddleSolver).
struct CellContext {
    CellSpec spec;
    std::shared_ptr<const Mesh3D> mesh;
    std::shared_ptr<const TaylorHoodSpace> space;
    std::shared_ptr<const ElementCache> cache;
    std::shared_ptr<const Assembler> assembler;
};

inline CellContext make_cell_context(const CellSpec& spec) {
    CellContext ctx;
    ctx.spec = spec;
    ctx.mesh = std::make_shared<const Mesh3D>(build_cell_mesh(spec));
    ctx.space = std::make_shared<const TaylorHoodSpace>(build_space(ctx.mesh));
    ctx.cache = std::make_shared<const ElementCache>(build_element_cache(*ctx.mesh));
    ctx.assembler = std::make_shared<const Assembler>(ctx.space, ctx.cache);
    return ctx;
}

struct PermeabilityTensor {
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();

    void validate() const {
        const double scale = A.norm();
        if (!(std::abs(A(0, 1) - A(1, 0)) <= 1e-6 * std::max(scale, 1e-300)))
            throw Error("PermeabilityTensor: asymmetry beyond tolerance");
        const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(0.5 * (A + A.transpose()));
        if (!(es.eigenvalues().minCoeff() > 0.0))
            throw Error("PermeabilityTensor: not positive definite");
    }
};

struct PermeabilityComputation {
    PermeabilityTensor tensor;
    std::array<StokesSolution, 2> solutions; // rhs e1, e2
};

/// Solve the two Newtonian cell problems and integrate: A_ij = int (w^i)_j.
inline PermeabilityComputation permeability_tensor_detailed(const CellContext& ctx,
                                                            double tol = 1e-10) {
    PermeabilityComputation out;
    SaddleSolver solver;
    SaddleSystem sys =
        ctx.assembler->assemble(1.0, GradientForm::FullGradient, Eigen::Vector3d::UnitX());
    solver.factorize(sys, ctx.assembler->assemble_pressure_mass(1.0));
    for (int i = 0; i < 2; ++i) {
        sys.rhs = ctx.assembler->assemble_rhs(i == 0 ? Eigen::Vector3d::UnitX()
                                                     : Eigen::Vector3d::UnitY());
        solver.reset_warm_start();
        const auto r = solver.solve(sys, tol);
        StokesSolution sol;
        sol.velocity = r.u;
        sol.pressure = r.p;
        sol.diag.iterations = 1;
        sol.diag.residual = r.residual;
        sol.diag.divergence_norm = r.divergence_norm;
        sol.diag.pressure_mean = std::abs(sys.m.dot(r.p)) / sys.m.sum();
        const auto nodal = ctx.space->expand_velocity(sol.velocity);
        const Eigen::Vector3d flux = integrate_velocity(*ctx.space, *ctx.cache, nodal);
        out.tensor.A(i, 0) = flux[0];
        out.tensor.A(i, 1) = flux[1];
        out.solutions[i] = std::move(sol);
    }
    return out;
}

inline PermeabilityTensor permeability_tensor(const CellContext& ctx, double tol = 1e-10) {
    return permeability_tensor_detailed(ctx, tol).tensor;
}

/// Companion tensor from the symmetric-gradient Newtonian problem
/// -div(D[w]) + grad pi = e_i. This is the r = 2 limit of the nonlinear
/// pipeline; on divergence-free fields it equals twice the -Laplacian tensor,
/// and it is the form behind the published permeability tables.
inline PermeabilityTensor permeability_tensor_symmetric(const CellContext& ctx,
                                                        double tol = 1e-10) {
    PermeabilityTensor out;
    SaddleSolver solver;
    SaddleSystem sys =
        ctx.assembler->assemble(1.0, GradientForm::SymmetricGradient, Eigen::Vector3d::UnitX());
    solver.factorize(sys, ctx.assembler->assemble_pressure_mass(1.0));
    for (int i = 0; i < 2; ++i) {
        sys.rhs = ctx.assembler->assemble_rhs(i == 0 ? Eigen::Vector3d::UnitX()
                                                     : Eigen::Vector3d::UnitY());
        solver.reset_warm_start();
        const auto r = solver.solve(sys, tol);
        const auto nodal = ctx.space->expand_velocity(r.u);
        const Eigen::Vector3d flux = integrate_velocity(*ctx.space, *ctx.cache, nodal);
        out.A(i, 0) = flux[0];
        out.A(i, 1) = flux[1];
    }
    return out;
}

inline PermeabilityTensor permeability_tensor(const CellSpec& spec, double tol = 1e-10) {
    const CellContext ctx = make_cell_context(spec);
    return permeability_tensor(ctx, tol);
}

struct OperatorSample {
    Eigen::Vector2d xi = Eigen::Vector2d::Zero();
    Eigen::Vector2d U = Eigen::Vector2d::Zero();
    double w3_integral = 0.0; // vertical mean diagnostic, vanishes in the limit
    SolveDiagnostics diag;
};

/// U(xi') = int_{Z_f} w'_{xi'} dz from one nonlinear cell solve.
inline OperatorSample permeability_operator(const CellContext& ctx, const ViscosityLaw& law,
                                            const Eigen::Vector2d& xi,
                                            const PicardOptions& opts = {}) {
    OperatorSample sample;
    sample.xi = xi;
    if (xi.norm() == 0.0) return sample; // zero forcing, zero solution
    SaddleSolver solver;
    const StokesSolution sol = picard_solve(*ctx.assembler, solver, law,
                                            Eigen::Vector3d(xi.x(), xi.y(), 0.0), opts);
    const auto nodal = ctx.space->expand_velocity(sol.velocity);
    const Eigen::Vector3d flux = integrate_velocity(*ctx.space, *ctx.cache, nodal);
    sample.U = flux.head<2>();
    sample.w3_integral = flux[2];
    sample.diag = sol.diag;
    return sample;
}

/// Regime descriptor with the data needed to evaluate V' = V'(f' - grad p).
struct EffectiveLaw {
    EffectiveLawKind kind;
    Carreau fluid;
    double gamma = 1.0;
    std::shared_ptr<const CellContext> cell;
    std::optional<PermeabilityTensor> tensor; // present for LinearDarcy
    double delta_reg = 1e-6;                  // power-law shear floor
    PicardOptions opts;
};

inline EffectiveLaw make_effective_law(std::shared_ptr<const CellContext> cell,
                                       const Carreau& fluid, double gamma,
                                       double delta_reg = 1e-6, const PicardOptions& opts = {}) {
    EffectiveLaw law;
    law.kind = regime_select(fluid, gamma);
    law.fluid = fluid;
    law.gamma = gamma;
    law.cell = std::move(cell);
    law.delta_reg = delta_reg;
    law.opts = opts;
    if (std::holds_alternative<LinearDarcy>(law.kind))
        law.tensor = permeability_tensor(*law.cell, opts.tol_linear);
    return law;
}

/// Filtration velocity for a constant driving force; V3 is identically zero.
inline Eigen::Vector3d darcy_velocity(const EffectiveLaw& law, const Eigen::Vector2d& force) {
    struct Eval {
        const EffectiveLaw& law;
        const Eigen::Vector2d& force;
        Eigen::Vector3d operator()(const LinearDarcy& lin) const {
            const Eigen::Vector2d v = (1.0 / lin.eta) * (law.tensor->A * force);
            return {v.x(), v.y(), 0.0};
        }
        Eigen::Vector3d operator()(const CarreauDarcy&) const {
            const auto s = permeability_operator(*law.cell, law.fluid, force, law.opts);
            return {s.U.x(), s.U.y(), 0.0};
        }
        Eigen::Vector3d operator()(const PowerDarcy& pd) const {
            const PowerLaw plaw{1.0, law.fluid.r, law.delta_reg};
            const auto s = permeability_operator(*law.cell, plaw, force, law.opts);
            return {pd.prefactor * s.U.x(), pd.prefactor * s.U.y(), 0.0};
        }
    };
    return std::visit(Eval{law, force}, law.kind);
}

} // namespace cellflow
