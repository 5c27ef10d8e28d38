#pragma once

// Derived quantities of discrete velocity fields: quadrature-point
// deformation norms, exact integrals of P2 fields over Z_f, dissipation
// energies, and a legacy-VTK dump for visualization.

#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cellflow/assembly.hpp"
#include "cellflow/space.hpp"

namespace cellflow {

/// Velocity gradient (3x3) at quadrature point q of tet t from nodal values.
inline Eigen::Matrix3d velocity_gradient(const TaylorHoodSpace& space, const ElementCache& cache,
                                         const std::vector<Eigen::Vector3d>& nodal, int t, int q) {
    const auto& g = cache.grad_p2[t * ElementCache::kQ + q];
    Eigen::Matrix3d G = Eigen::Matrix3d::Zero();
    const auto& mesh = *space.mesh;
    for (int i = 0; i < 10; ++i) {
        const int node = (i < 4) ? mesh.tets[t][i] : space.n_vertices + space.tet_edges[t][i - 4];
        G.noalias() += nodal[node] * g.row(i); // (grad u)_{ab} = d_b u_a
    }
    return G;
}

/// |D[u]| at every (element, quadrature point), D = (grad u + grad u^t)/2,
/// Frobenius norm.
inline std::vector<double> deformation_norm_field(const TaylorHoodSpace& space,
                                                  const ElementCache& cache,
                                                  const std::vector<Eigen::Vector3d>& nodal) {
    std::vector<double> out(static_cast<size_t>(cache.n_tets) * ElementCache::kQ);
    for (int t = 0; t < cache.n_tets; ++t) {
        for (int q = 0; q < ElementCache::kQ; ++q) {
            const Eigen::Matrix3d G = velocity_gradient(space, cache, nodal, t, q);
            const Eigen::Matrix3d D = 0.5 * (G + G.transpose());
            out[t * ElementCache::kQ + q] = D.norm();
        }
    }
    return out;
}

/// Convenience overload on the reduced coefficients of a solution.
inline std::vector<double> deformation_norm_field(const TaylorHoodSpace& space,
                                                  const ElementCache& cache,
                                                  const Eigen::VectorXd& reduced_velocity) {
    return deformation_norm_field(space, cache, space.expand_velocity(reduced_velocity));
}

/// int_{Z_f} u dz by exact quadrature of the P2 field.
inline Eigen::Vector3d integrate_velocity(const TaylorHoodSpace& space, const ElementCache& cache,
                                          const std::vector<Eigen::Vector3d>& nodal) {
    Eigen::Vector3d total = Eigen::Vector3d::Zero();
    const auto& mesh = *space.mesh;
    for (int t = 0; t < cache.n_tets; ++t) {
        for (int q = 0; q < ElementCache::kQ; ++q) {
            const double w = cache.wdet[t * ElementCache::kQ + q];
            for (int i = 0; i < 10; ++i) {
                const int node =
                    (i < 4) ? mesh.tets[t][i] : space.n_vertices + space.tet_edges[t][i - 4];
                total += w * cache.p2v[q][i] * nodal[node];
            }
        }
    }
    return total;
}

/// Dissipation sum_qp w eta |D[u]|^2 (SYMMETRIC_GRADIENT) or w eta |grad u|^2
/// (FULL_GRADIENT); equals f . int u at a converged solution.
inline double dissipation_energy(const TaylorHoodSpace& space, const ElementCache& cache,
                                 const std::vector<Eigen::Vector3d>& nodal,
                                 const ViscosityField& visc, GradientForm form) {
    double total = 0.0;
    for (int t = 0; t < cache.n_tets; ++t) {
        for (int q = 0; q < ElementCache::kQ; ++q) {
            const size_t iq = static_cast<size_t>(t) * ElementCache::kQ + q;
            const Eigen::Matrix3d G = velocity_gradient(space, cache, nodal, t, q);
            double n2;
            if (form == GradientForm::SymmetricGradient) {
                const Eigen::Matrix3d D = 0.5 * (G + G.transpose());
                n2 = D.squaredNorm();
            } else {
                n2 = G.squaredNorm();
            }
            total += cache.wdet[iq] * visc.at(iq) * n2;
        }
    }
    return total;
}

/// Legacy ASCII VTK unstructured grid with vertex-sampled velocity/pressure.
inline void write_vtk_solution(const TaylorHoodSpace& space,
                               const std::vector<Eigen::Vector3d>& nodal_velocity,
                               const std::vector<double>& vertex_pressure,
                               const std::string& path) {
    const auto& mesh = *space.mesh;
    std::ofstream out(path);
    if (!out) throw Error("write_vtk_solution: cannot open " + path);
    out.precision(12);
    out << "# vtk DataFile Version 2.0\ncell solution\nASCII\nDATASET UNSTRUCTURED_GRID\n";
    out << "POINTS " << mesh.vertices.size() << " double\n";
    for (const auto& p : mesh.vertices) out << p.x() << " " << p.y() << " " << p.z() << "\n";
    out << "CELLS " << mesh.tets.size() << " " << 5 * mesh.tets.size() << "\n";
    for (const auto& T : mesh.tets)
        out << "4 " << T[0] << " " << T[1] << " " << T[2] << " " << T[3] << "\n";
    out << "CELL_TYPES " << mesh.tets.size() << "\n";
    for (size_t i = 0; i < mesh.tets.size(); ++i) out << "10\n";
    out << "POINT_DATA " << mesh.vertices.size() << "\n";
    out << "VECTORS velocity double\n";
    for (size_t v = 0; v < mesh.vertices.size(); ++v) {
        const auto& u = nodal_velocity[v];
        out << u.x() << " " << u.y() << " " << u.z() << "\n";
    }
    out << "SCALARS pressure double 1\nLOOKUP_TABLE default\n";
    for (size_t v = 0; v < mesh.vertices.size(); ++v) out << vertex_pressure[v] << "\n";
}

} // namespace cellflow
