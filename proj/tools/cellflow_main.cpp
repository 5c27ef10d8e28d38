// cellflow command-line front end.
//
// Subcommands: mesh | permeability | sweep-amplitude | sweep-rotation |
// regime-table | validate. Configuration comes from a JSON file (all keys
// optional, unknown keys rejected); results are written as CSV/JSON under the
// output directory. Exit codes: 0 success, 2 configuration or geometry
// error, 3 solver failure, 4 validation failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cellflow/config.hpp"
#include "cellflow/experiments.hpp"
#include "cellflow/fields.hpp"
#include "cellflow/saddle_solver.hpp"
#include "cellflow/homogenization.hpp"
#include "cellflow/io.hpp"
#include "cellflow/validation.hpp"

namespace {

using namespace cellflow;

struct GlobalOpts {
    std::string config_path;
    std::string out_dir;
    int threads = 1;
    std::string resolution; // "h,n_layers"
};

RunConfig make_config(const GlobalOpts& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : load_config(g.config_path);
    if (!g.out_dir.empty()) cfg.out_dir = g.out_dir;
    if (!g.resolution.empty()) {
        double h = 0.0;
        int layers = 0;
        if (std::sscanf(g.resolution.c_str(), "%lf,%d", &h, &layers) != 2)
            throw ConfigError("--resolution expects 'h,n_layers'");
        cfg.cell.h = h;
        cfg.cell.n_layers = layers;
        cfg.cell.validate();
    }
    std::filesystem::create_directories(cfg.out_dir);
    return cfg;
}

int cmd_mesh(const GlobalOpts& g) {
    const RunConfig cfg = make_config(g);
    const Mesh3D mesh = build_cell_mesh(cfg.cell);
    const MeshQuality q = mesh_quality(mesh);
    const std::string msh_path = cfg.out_dir + "/cell.msh";
    write_msh(mesh, msh_path);

    nlohmann::json report;
    report["cell"] = to_json(cfg.cell);
    report["tets"] = q.n_tets;
    report["vertices"] = q.n_vertices;
    report["volume"] = q.volume;
    report["min_tet_volume"] = q.min_tet_volume;
    report["max_tet_volume"] = q.max_tet_volume;
    report["obstacle_area"] = q.obstacle_area;
    report["pairs_x"] = q.n_pairs_x;
    report["pairs_y"] = q.n_pairs_y;
    if (cfg.cell.shape) {
        const auto poly = build_inclusion_polygon(*cfg.cell.shape, cfg.cell.n_seg,
                                                  cfg.cell.clearance);
        report["polygon_area"] = poly.area();
    }
    write_json(report, cfg.out_dir + "/mesh_report.json");
    std::printf("mesh: %d tets, %d vertices, volume %s -> %s\n", q.n_tets, q.n_vertices,
                format_g9(q.volume).c_str(), msh_path.c_str());
    return 0;
}

int cmd_permeability(const GlobalOpts& g, bool export_fields, bool export_kkt) {
    const RunConfig cfg = make_config(g);
    const CellContext ctx = make_cell_context(cfg.cell);
    const auto comp = permeability_tensor_detailed(ctx, cfg.solver.tol_linear);
    const auto sym = permeability_tensor_symmetric(ctx, cfg.solver.tol_linear);
    comp.tensor.validate();
    sym.validate();

    if (export_fields) {
        for (int i = 0; i < 2; ++i) {
            const auto nodal = ctx.space->expand_velocity(comp.solutions[i].velocity);
            const auto press = ctx.space->expand_pressure(comp.solutions[i].pressure);
            write_vtk_solution(*ctx.space, nodal, press,
                               cfg.out_dir + "/cell_w" + std::to_string(i + 1) + ".vtk");
        }
    }
    if (export_kkt) {
        const auto sys = ctx.assembler->assemble(1.0, GradientForm::FullGradient,
                                                 Eigen::Vector3d::UnitX());
        write_matrix_market(compose_kkt(sys), cfg.out_dir + "/kkt.mtx");
    }

    CsvWriter csv(cfg.out_dir + "/permeability.csv", {"form", "a11", "a12", "a21", "a22"});
    csv.row() << "laplacian" << comp.tensor.A(0, 0) << comp.tensor.A(0, 1)
              << comp.tensor.A(1, 0) << comp.tensor.A(1, 1);
    csv.row() << "symmetric" << sym.A(0, 0) << sym.A(0, 1) << sym.A(1, 0) << sym.A(1, 1);

    nlohmann::json rec;
    rec["cell"] = to_json(cfg.cell);
    rec["laplacian_form"] = {{comp.tensor.A(0, 0), comp.tensor.A(0, 1)},
                             {comp.tensor.A(1, 0), comp.tensor.A(1, 1)}};
    rec["symmetric_form"] = {{sym.A(0, 0), sym.A(0, 1)}, {sym.A(1, 0), sym.A(1, 1)}};
    rec["diagnostics"] = {{"residual", comp.solutions[0].diag.residual},
                          {"divergence_norm", comp.solutions[0].diag.divergence_norm},
                          {"pressure_mean", comp.solutions[0].diag.pressure_mean}};
    write_json(rec, cfg.out_dir + "/permeability.json");

    std::printf("A (laplacian form) = [%s %s; %s %s]\n", format_g9(comp.tensor.A(0, 0)).c_str(),
                format_g9(comp.tensor.A(0, 1)).c_str(), format_g9(comp.tensor.A(1, 0)).c_str(),
                format_g9(comp.tensor.A(1, 1)).c_str());
    std::printf("A (symmetric form) = [%s %s; %s %s]\n", format_g9(sym.A(0, 0)).c_str(),
                format_g9(sym.A(0, 1)).c_str(), format_g9(sym.A(1, 0)).c_str(),
                format_g9(sym.A(1, 1)).c_str());
    return 0;
}

nlohmann::json sweep_record(const RunConfig& cfg, const SweepPoint& p) {
    nlohmann::json r;
    r["cell"] = to_json(cfg.cell);
    r["law"] = to_json(cfg.fluid);
    r["gamma"] = cfg.gamma;
    r["xi"] = {p.force.x(), p.force.y()};
    r["U"] = {p.V.x(), p.V.y()};
    r["diagnostics"] = {{"iterations", p.iterations}, {"residual", p.residual}};
    if (p.failed) r["error"] = p.error;
    return r;
}

int cmd_sweep_amplitude(const GlobalOpts& g) {
    const RunConfig cfg = make_config(g);
    const CellContext ctx = make_cell_context(cfg.cell);
    const auto res = run_sweep(ctx, cfg, amplitude_grid(cfg), g.threads);

    CsvWriter csv(cfg.out_dir + "/sweep_amplitude.csv", {"f1", "V1", "V2", "iterations", "residual"});
    nlohmann::json records = nlohmann::json::array();
    for (const auto& p : res.points) {
        csv.row() << p.force.x() << p.V.x() << p.V.y() << p.iterations << p.residual;
        records.push_back(sweep_record(cfg, p));
    }
    write_json(records, cfg.out_dir + "/sweep_amplitude.json");
    std::printf("sweep-amplitude: %zu points, %d failed -> %s\n", res.points.size(), res.failures,
                (cfg.out_dir + "/sweep_amplitude.csv").c_str());
    return 0;
}

int cmd_sweep_rotation(const GlobalOpts& g) {
    const RunConfig cfg = make_config(g);
    const CellContext ctx = make_cell_context(cfg.cell);
    const auto res = run_sweep(ctx, cfg, rotation_grid(cfg), g.threads);

    CsvWriter csv(cfg.out_dir + "/sweep_rotation.csv",
                  {"theta", "f1", "f2", "V1", "V2", "Vnorm"});
    nlohmann::json records = nlohmann::json::array();
    for (int i = 0; i < static_cast<int>(res.points.size()); ++i) {
        const auto& p = res.points[i];
        const double theta = 0.5 * std::numbers::pi * i / (cfg.sweep.theta_count - 1);
        csv.row() << theta << p.force.x() << p.force.y() << p.V.x() << p.V.y() << p.V.norm();
        records.push_back(sweep_record(cfg, p));
    }
    write_json(records, cfg.out_dir + "/sweep_rotation.json");
    std::printf("sweep-rotation: %zu points, %d failed -> %s\n", res.points.size(), res.failures,
                (cfg.out_dir + "/sweep_rotation.csv").c_str());
    return 0;
}

int cmd_regime_table(const GlobalOpts& g, const std::vector<double>& r_list,
                     const std::vector<double>& gamma_list) {
    const RunConfig cfg = g.config_path.empty() && g.out_dir.empty() && g.resolution.empty()
                              ? RunConfig{}
                              : make_config(g);
    const auto cells = regime_table(r_list, gamma_list, cfg.fluid);
    std::printf("%-8s %-8s %s\n", "gamma", "r", "effective law");
    nlohmann::json records = nlohmann::json::array();
    for (const auto& c : cells) {
        std::printf("%-8s %-8s %s\n", format_g9(c.gamma).c_str(), format_g9(c.r).c_str(),
                    c.label.c_str());
        records.push_back({{"gamma", c.gamma}, {"r", c.r}, {"law", c.label}});
    }
    if (!g.out_dir.empty() || !g.config_path.empty()) {
        const RunConfig out_cfg = make_config(g);
        write_json(records, out_cfg.out_dir + "/regime_table.json");
    }
    return 0;
}

int cmd_validate(const GlobalOpts&, bool inject_fault) {
    ValidationOptions opts;
    opts.inject_prefactor_fault = inject_fault;
    const auto checks = run_validation(opts);
    int failures = 0;
    for (const auto& c : checks) {
        std::printf("[%s] %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                    c.detail.empty() ? "" : " : ", c.detail.c_str());
        failures += c.pass ? 0 : 1;
    }
    std::printf("validate: %zu checks, %d failures\n", checks.size(), failures);
    return failures == 0 ? 0 : 4;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"cellflow: unit-cell Stokes homogenization for thin porous media"};
    app.require_subcommand(1);
    app.fallthrough(true); // accept global options after the subcommand name

    GlobalOpts g;
    app.add_option("--config", g.config_path, "JSON configuration file");
    app.add_option("--out", g.out_dir, "output directory (overrides config)");
    app.add_option("--threads", g.threads, "worker threads for sweeps")->default_val(1);
    app.add_option("--resolution", g.resolution, "override mesh resolution as 'h,n_layers'");

    auto* mesh = app.add_subcommand("mesh", "build and export the cell mesh");
    auto* perm = app.add_subcommand("permeability", "compute the permeability tensor");
    bool export_fields = false, export_kkt = false;
    perm->add_flag("--export-fields", export_fields, "write the cell solutions as legacy VTK");
    perm->add_flag("--export-kkt", export_kkt, "write the assembled KKT matrix as MatrixMarket");
    auto* swa = app.add_subcommand("sweep-amplitude", "filtration velocity vs |f'|");
    auto* swr = app.add_subcommand("sweep-rotation", "filtration velocity vs orientation of f'");
    auto* regime = app.add_subcommand("regime-table", "effective law per (r, gamma)");
    std::vector<double> r_list{1.7, 2.0, 2.3};
    std::vector<double> gamma_list{0.5, 1.0, 2.0};
    regime->add_option("--r-list", r_list, "flow indices");
    regime->add_option("--gamma-list", gamma_list, "viscosity scaling exponents");
    auto* validate = app.add_subcommand("validate", "run the oracle and property suite");
    bool inject_fault = false;
    validate->add_flag("--inject-fault", inject_fault,
                       "perturb a reference value to exercise the failure path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2; // bad command lines are configuration errors
    }

    try {
        if (mesh->parsed()) return cmd_mesh(g);
        if (perm->parsed()) return cmd_permeability(g, export_fields, export_kkt);
        if (swa->parsed()) return cmd_sweep_amplitude(g);
        if (swr->parsed()) return cmd_sweep_rotation(g);
        if (regime->parsed()) return cmd_regime_table(g, r_list, gamma_list);
        if (validate->parsed()) return cmd_validate(g, inject_fault);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const ClearanceViolation& e) {
        std::fprintf(stderr, "geometry error: %s\n", e.what());
        return 2;
    } catch (const MeshFailure& e) {
        std::fprintf(stderr, "mesh error: %s\n", e.what());
        return 2;
    } catch (const OrientationFailure& e) {
        std::fprintf(stderr, "mesh error: %s\n", e.what());
        return 2;
    } catch (const PairingIncomplete& e) {
        std::fprintf(stderr, "mesh error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "solver error: %s\n", e.what());
        return 3;
    }
    return 0;
}
