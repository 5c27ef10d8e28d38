#pragma once

// Fixed-point (Picard) solution of the nonlinear cell problem
//   -div(eta_r(|D[u]|) D[u]) + grad pi = f,  div u = 0,
// freezing the viscosity at the previous iterate. The initial guess solves
// the constant-viscosity problem (eta0 for Carreau, mu for the power law),
// which avoids the degenerate zero-shear start of dilatant power laws.

#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "cellflow/assembly.hpp"
#include "cellflow/fields.hpp"
#include "cellflow/rheology.hpp"
#include "cellflow/saddle_solver.hpp"

namespace cellflow {

struct PicardOptions {
    int max_iter = 100;
    double tol_rel = 1e-8;
    double relax = 1.0;       // omega; halved once automatically before failing
    double tol_linear = 1e-10;
};

inline double constant_start_viscosity(const ViscosityLaw& law) {
    struct V {
        double operator()(const Newtonian& l) const { return l.eta; }
        double operator()(const Carreau& l) const { return l.eta0; }
        double operator()(const PowerLaw& l) const { return l.mu; }
    };
    return std::visit(V{}, law);
}

/// Nonlinear solve reusing a prepared assembler and factorization context.
inline StokesSolution picard_solve(const Assembler& assembler, SaddleSolver& solver,
                                   const ViscosityLaw& law, const Eigen::Vector3d& f,
                                   const PicardOptions& opts = {}) {
    validate(law);
    const auto& space = assembler.space();
    const auto& cache = assembler.cache();

    const double eta_start = constant_start_viscosity(law);
    SaddleSystem sys = assembler.assemble(eta_start, GradientForm::SymmetricGradient, f);
    solver.factorize(sys, assembler.assemble_pressure_mass(eta_start));
    auto lin = solver.solve(sys, opts.tol_linear);
    Eigen::VectorXd u = lin.u;
    Eigen::VectorXd p = lin.p;

    std::vector<PicardStep> history;
    double omega = opts.relax;
    bool omega_halved = false;
    int iter = 0;
    while (true) {
        ++iter;
        const auto nodal = space.expand_velocity(u);
        const auto dnorm = deformation_norm_field(space, cache, nodal);
        std::vector<double> visc(dnorm.size());
        for (size_t i = 0; i < dnorm.size(); ++i) visc[i] = viscosity(law, dnorm[i]);

        assembler.reassemble_A(sys.A, visc, GradientForm::SymmetricGradient);
        solver.factorize(sys, assembler.assemble_pressure_mass(visc));
        lin = solver.solve(sys, opts.tol_linear);

        const Eigen::VectorXd u_next = omega * lin.u + (1.0 - omega) * u;
        const Eigen::VectorXd p_next = omega * lin.p + (1.0 - omega) * p;
        const double rel =
            (u_next - u).norm() / std::max(u_next.norm(), 1e-300);
        history.push_back({iter, rel, lin.residual, omega});
        u = u_next;
        p = p_next;
        if (rel <= opts.tol_rel) break;

        if (iter >= (omega_halved ? 2 : 1) * opts.max_iter) {
            if (!omega_halved) {
                omega *= 0.5;
                omega_halved = true;
                continue;
            }
            throw NoConvergence("picard_solve: no convergence after relaxation fallback",
                                history);
        }
    }

    StokesSolution sol;
    sol.velocity = std::move(u);
    sol.pressure = std::move(p);
    sol.diag.iterations = iter;
    sol.diag.residual = lin.residual;
    sol.diag.divergence_norm = (sys.B * sol.velocity).norm();
    const double vol = sys.m.sum();
    sol.diag.pressure_mean = std::abs(sys.m.dot(sol.pressure)) / (vol > 0.0 ? vol : 1.0);
    sol.diag.history = std::move(history);
    return sol;
}

/// Convenience entry creating the assembler and solver internally.
inline StokesSolution picard_solve(std::shared_ptr<const TaylorHoodSpace> space,
                                   std::shared_ptr<const ElementCache> cache,
                                   const ViscosityLaw& law, const Eigen::Vector3d& f,
                                   const PicardOptions& opts = {}) {
    Assembler assembler(std::move(space), std::move(cache));
    SaddleSolver solver;
    return picard_solve(assembler, solver, law, f, opts);
}

} // namespace cellflow
