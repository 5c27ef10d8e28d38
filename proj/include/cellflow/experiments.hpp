#pragma once

// The experiment drivers behind the CLI subcommands: permeability tables,
// amplitude and rotation sweeps, and the regime table. Sweep points are
// independent cell solves dispatched to a small worker pool; output rows keep
// input order regardless of completion order.

#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <thread>
#include <vector>

#include "cellflow/config.hpp"
#include "cellflow/homogenization.hpp"
#include "cellflow/rheology.hpp"

namespace cellflow {

/// Run fn(i) for i in [0, n) on `threads` workers.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
    threads = std::max(1, threads);
    if (threads == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
        });
    }
    for (auto& t : pool) t.join();
}

/// Which nonlinear pipeline a sweep runs through. "auto" follows the regime
/// classification; the explicit families reproduce the experiment layout
/// where the r = 2 reference curve is computed by the same nonlinear solver
/// as its neighbours.
enum class SweepFamily { Auto, Carreau, Power };

inline SweepFamily sweep_family(const RunConfig& cfg) {
    if (cfg.sweep.family == "carreau") return SweepFamily::Carreau;
    if (cfg.sweep.family == "power") return SweepFamily::Power;
    return SweepFamily::Auto;
}

struct SweepPoint {
    Eigen::Vector2d force = Eigen::Vector2d::Zero();
    Eigen::Vector2d V = Eigen::Vector2d::Zero();
    int iterations = 0;
    double residual = 0.0;
    bool failed = false;
    std::string error;
};

/// Evaluate the filtration velocity at one driving force through the
/// configured pipeline.
inline SweepPoint evaluate_point(const CellContext& ctx, const RunConfig& cfg,
                                 SweepFamily family, const EffectiveLawKind& auto_kind,
                                 const std::optional<PermeabilityTensor>& tensor,
                                 const Eigen::Vector2d& force) {
    SweepPoint pt;
    pt.force = force;
    try {
        const bool carreau_pipe =
            family == SweepFamily::Carreau ||
            (family == SweepFamily::Auto && std::holds_alternative<CarreauDarcy>(auto_kind));
        const bool power_pipe =
            family == SweepFamily::Power ||
            (family == SweepFamily::Auto && std::holds_alternative<PowerDarcy>(auto_kind));
        if (carreau_pipe) {
            const auto s = permeability_operator(ctx, cfg.fluid, force, cfg.solver.picard());
            pt.V = s.U;
            pt.iterations = s.diag.iterations;
            pt.residual = s.diag.residual;
        } else if (power_pipe) {
            const PowerLaw plaw{1.0, cfg.fluid.r, cfg.solver.delta_reg};
            const double pf = power_law_prefactor(cfg.fluid);
            const auto s = permeability_operator(ctx, plaw, force, cfg.solver.picard());
            pt.V = pf * s.U;
            pt.iterations = s.diag.iterations;
            pt.residual = s.diag.residual;
        } else {
            const auto* lin = std::get_if<LinearDarcy>(&auto_kind);
            pt.V = (1.0 / lin->eta) * (tensor->A * force);
            pt.iterations = 1;
            pt.residual = 0.0;
        }
    } catch (const Error& e) {
        pt.failed = true;
        pt.error = e.what();
        pt.V.setConstant(std::numeric_limits<double>::quiet_NaN());
        pt.iterations = -1;
        pt.residual = std::numeric_limits<double>::quiet_NaN();
    }
    return pt;
}

struct SweepResult {
    std::vector<SweepPoint> points;
    int failures = 0;
};

inline SweepResult run_sweep(const CellContext& ctx, const RunConfig& cfg,
                             const std::vector<Eigen::Vector2d>& forces, int threads) {
    const SweepFamily family = sweep_family(cfg);
    const EffectiveLawKind auto_kind = regime_select(cfg.fluid, cfg.gamma);
    std::optional<PermeabilityTensor> tensor;
    if (family == SweepFamily::Auto && std::holds_alternative<LinearDarcy>(auto_kind))
        tensor = permeability_tensor(ctx, cfg.solver.tol_linear);

    SweepResult res;
    res.points.resize(forces.size());
    parallel_for(static_cast<int>(forces.size()), threads, [&](int i) {
        res.points[i] = evaluate_point(ctx, cfg, family, auto_kind, tensor, forces[i]);
    });
    for (const auto& p : res.points) res.failures += p.failed ? 1 : 0;
    return res;
}

inline std::vector<Eigen::Vector2d> amplitude_grid(const RunConfig& cfg) {
    std::vector<Eigen::Vector2d> forces(cfg.sweep.f1_count);
    for (int i = 0; i < cfg.sweep.f1_count; ++i) {
        const double f1 = cfg.sweep.f1_start + (cfg.sweep.f1_stop - cfg.sweep.f1_start) * i /
                                                   (cfg.sweep.f1_count - 1);
        forces[i] = {f1, 0.0};
    }
    return forces;
}

inline std::vector<Eigen::Vector2d> rotation_grid(const RunConfig& cfg) {
    std::vector<Eigen::Vector2d> forces(cfg.sweep.theta_count);
    for (int i = 0; i < cfg.sweep.theta_count; ++i) {
        const double theta =
            0.5 * std::numbers::pi * i / (cfg.sweep.theta_count - 1);
        forces[i] = {std::cos(theta), std::sin(theta)};
    }
    return forces;
}

struct RegimeCell {
    double r = 2.0;
    double gamma = 1.0;
    std::string label;
};

/// One label per (r, gamma) pair from the regime classification.
inline std::vector<RegimeCell> regime_table(const std::vector<double>& r_list,
                                            const std::vector<double>& gamma_list,
                                            const Carreau& base) {
    std::vector<RegimeCell> cells;
    for (double gamma : gamma_list) {
        for (double r : r_list) {
            Carreau fluid = base;
            fluid.r = r;
            cells.push_back({r, gamma, regime_name(regime_select(fluid, gamma), fluid)});
        }
    }
    return cells;
}

} // namespace cellflow
