#pragma once

// Discrete saddle systems for the cell Stokes problems:
//   A u + B^t p = rhs,   B u = 0,   m . p = 0,
// with A assembled either from grad u : grad v (FULL_GRADIENT, the -Laplacian
// cell problem) or from D[u] : D[v] (SYMMETRIC_GRADIENT, the -div(eta D)
// problem), a quadrature-point viscosity field, B = -int q div u, and m the
// pressure mean row. Quadrature is exact through degree 5.
//
// The Assembler caches physical basis gradients per element and the sparsity
// pattern of A, so nonlinear iterations only rewrite values.

#include <memory>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "cellflow/errors.hpp"
#include "cellflow/quadrature.hpp"
#include "cellflow/space.hpp"

namespace cellflow {

enum class GradientForm { FullGradient, SymmetricGradient };

struct SaddleSystem {
    Eigen::SparseMatrix<double> A; // n_u x n_u, symmetric
    Eigen::SparseMatrix<double> B; // n_p x n_u
    Eigen::VectorXd m;             // n_p, pressure mean row
    Eigen::VectorXd rhs;           // n_u
};

/// Per-element quadrature data: physical P2 gradients per point, constant P1
/// gradients, and integration weights (quadrature weight times tet volume).
struct ElementCache {
    int n_tets = 0;
    static constexpr int kQ = TetQuadrature::kNumPoints;
    std::vector<double> wdet;                            // [t * kQ + q]
    std::vector<Eigen::Matrix<double, 10, 3>> grad_p2;   // [t * kQ + q]
    std::vector<Eigen::Matrix<double, 4, 3>> grad_p1;    // [t]
    std::array<std::array<double, 10>, kQ> p2v{};        // reference values
    std::array<std::array<double, 4>, kQ> p1v{};

    double total_volume = 0.0;
};

inline ElementCache build_element_cache(const Mesh3D& mesh) {
    const auto& quad = tet_quadrature();
    ElementCache c;
    c.n_tets = static_cast<int>(mesh.tets.size());
    c.wdet.resize(static_cast<size_t>(c.n_tets) * ElementCache::kQ);
    c.grad_p2.resize(static_cast<size_t>(c.n_tets) * ElementCache::kQ);
    c.grad_p1.resize(c.n_tets);
    for (int q = 0; q < ElementCache::kQ; ++q) {
        c.p2v[q] = p2_values(quad.bary[q]);
        c.p1v[q] = p1_values(quad.bary[q]);
    }
    for (int t = 0; t < c.n_tets; ++t) {
        const auto& T = mesh.tets[t];
        const auto gl = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]],
                                              mesh.vertices[T[2]], mesh.vertices[T[3]]);
        const double vol = mesh.tet_volume(t);
        if (!(vol > 0.0)) throw OrientationFailure("build_element_cache: nonpositive tet volume");
        c.total_volume += vol;
        c.grad_p1[t] = gl;
        for (int q = 0; q < ElementCache::kQ; ++q) {
            c.wdet[t * ElementCache::kQ + q] = quad.weight[q] * vol;
            c.grad_p2[t * ElementCache::kQ + q] = p2_gradients(quad.bary[q], gl);
        }
    }
    return c;
}

/// Viscosity evaluated at quadrature points: either one constant or one value
/// per (element, point).
struct ViscosityField {
    double constant = 1.0;
    std::span<const double> values; // empty => constant

    ViscosityField(double c) : constant(c) {} // NOLINT(google-explicit-constructor)
    ViscosityField(std::span<const double> v) : values(v) {} // NOLINT
    ViscosityField(const std::vector<double>& v) : values(v) {} // NOLINT
    double at(size_t i) const { return values.empty() ? constant : values[i]; }
    size_t size_hint() const { return values.size(); }
};

class Assembler {
public:
    Assembler(std::shared_ptr<const TaylorHoodSpace> space,
              std::shared_ptr<const ElementCache> cache)
        : space_(std::move(space)), cache_(std::move(cache)) {
        build_node_tables();
        build_pattern();
        build_divergence_and_mean();
    }

    const TaylorHoodSpace& space() const { return *space_; }
    const ElementCache& cache() const { return *cache_; }

    /// Assemble the full saddle system. Throws NonpositiveViscosity if the
    /// viscosity field is not strictly positive at every quadrature point.
    SaddleSystem assemble(const ViscosityField& visc, GradientForm form,
                          const Eigen::Vector3d& f) const {
        SaddleSystem sys;
        sys.A = A_pattern_;
        assemble_A_values(sys.A, visc, form);
        sys.B = B_;
        sys.m = m_;
        sys.rhs = assemble_rhs(f);
        return sys;
    }

    /// Rewrite the values of a previously assembled A in place (same pattern).
    void reassemble_A(Eigen::SparseMatrix<double>& A, const ViscosityField& visc,
                      GradientForm form) const {
        assemble_A_values(A, visc, form);
    }

    Eigen::VectorXd assemble_rhs(const Eigen::Vector3d& f) const {
        const auto& sp = *space_;
        const auto& c = *cache_;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(sp.n_vel_dofs());
        for (int t = 0; t < c.n_tets; ++t) {
            for (int q = 0; q < ElementCache::kQ; ++q) {
                const double w = c.wdet[t * ElementCache::kQ + q];
                for (int i = 0; i < 10; ++i) {
                    const int ri = nodes_[t][i];
                    if (ri < 0) continue;
                    const double wphi = w * c.p2v[q][i];
                    for (int a = 0; a < 3; ++a) rhs[3 * ri + a] += wphi * f[a];
                }
            }
        }
        return rhs;
    }

    const Eigen::SparseMatrix<double>& divergence() const { return B_; }
    const Eigen::VectorXd& pressure_mean_row() const { return m_; }

    /// Pressure mass matrix weighted by 1/viscosity, the Schur complement
    /// preconditioner for generalized Stokes.
    Eigen::SparseMatrix<double> assemble_pressure_mass(const ViscosityField& visc) const {
        const auto& sp = *space_;
        const auto& c = *cache_;
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(static_cast<size_t>(c.n_tets) * 16);
        for (int t = 0; t < c.n_tets; ++t) {
            Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
            for (int q = 0; q < ElementCache::kQ; ++q) {
                const size_t iq = static_cast<size_t>(t) * ElementCache::kQ + q;
                const double w = c.wdet[iq] / visc.at(iq);
                for (int k = 0; k < 4; ++k)
                    for (int l = 0; l < 4; ++l) M(k, l) += w * c.p1v[q][k] * c.p1v[q][l];
            }
            for (int k = 0; k < 4; ++k)
                for (int l = 0; l < 4; ++l)
                    trips.emplace_back(press_nodes_[t][k], press_nodes_[t][l], M(k, l));
        }
        Eigen::SparseMatrix<double> Mp(sp.n_press_dofs, sp.n_press_dofs);
        Mp.setFromTriplets(trips.begin(), trips.end());
        Mp.makeCompressed();
        return Mp;
    }

    /// Reduced velocity-node index (or -1) of local P2 node i on tet t.
    int reduced_node(int t, int i) const { return nodes_[t][i]; }

private:
    void build_node_tables() {
        const auto& sp = *space_;
        const auto& mesh = *sp.mesh;
        nodes_.resize(mesh.tets.size());
        press_nodes_.resize(mesh.tets.size());
        for (size_t t = 0; t < mesh.tets.size(); ++t) {
            for (int v = 0; v < 4; ++v) {
                nodes_[t][v] = sp.vel_index[mesh.tets[t][v]];
                press_nodes_[t][v] = sp.press_index[mesh.tets[t][v]];
            }
            for (int e = 0; e < 6; ++e)
                nodes_[t][4 + e] = sp.vel_index[sp.n_vertices + sp.tet_edges[t][e]];
        }
    }

    void build_pattern() {
        const auto& sp = *space_;
        std::vector<Eigen::Triplet<double>> trips;
        trips.reserve(nodes_.size() * 100 * 3);
        for (const auto& nd : nodes_) {
            for (int i = 0; i < 10; ++i) {
                if (nd[i] < 0) continue;
                for (int j = 0; j < 10; ++j) {
                    if (nd[j] < 0) continue;
                    for (int a = 0; a < 3; ++a)
                        for (int b = 0; b < 3; ++b)
                            trips.emplace_back(3 * nd[i] + a, 3 * nd[j] + b, 0.0);
                }
            }
        }
        A_pattern_.resize(sp.n_vel_dofs(), sp.n_vel_dofs());
        A_pattern_.setFromTriplets(trips.begin(), trips.end());
        A_pattern_.makeCompressed();

        // Element scatter map: for tet t, node pair (i, j), component b, the
        // position in A's value array of entry (3 nd[i], 3 nd[j] + b); the
        // three row components are contiguous within a column.
        scatter_.assign(nodes_.size() * 300, -1);
        const auto* outer = A_pattern_.outerIndexPtr();
        const auto* inner = A_pattern_.innerIndexPtr();
        auto find_pos = [&](int row, int col) {
            int lo = outer[col], hi = outer[col + 1];
            while (lo < hi) {
                const int mid = (lo + hi) / 2;
                if (inner[mid] < row) lo = mid + 1; else hi = mid;
            }
            return lo;
        };
        for (size_t t = 0; t < nodes_.size(); ++t) {
            for (int i = 0; i < 10; ++i) {
                if (nodes_[t][i] < 0) continue;
                for (int j = 0; j < 10; ++j) {
                    if (nodes_[t][j] < 0) continue;
                    for (int b = 0; b < 3; ++b)
                        scatter_[(t * 100 + i * 10 + j) * 3 + b] =
                            find_pos(3 * nodes_[t][i], 3 * nodes_[t][j] + b);
                }
            }
        }
    }

    void build_divergence_and_mean() {
        const auto& sp = *space_;
        const auto& c = *cache_;
        std::vector<Eigen::Triplet<double>> trips;
        m_ = Eigen::VectorXd::Zero(sp.n_press_dofs);
        for (int t = 0; t < c.n_tets; ++t) {
            double vol = 0.0;
            Eigen::Matrix<double, 4, 30> Bloc = Eigen::Matrix<double, 4, 30>::Zero();
            for (int q = 0; q < ElementCache::kQ; ++q) {
                const double w = c.wdet[t * ElementCache::kQ + q];
                vol += w;
                const auto& g2 = c.grad_p2[t * ElementCache::kQ + q];
                for (int k = 0; k < 4; ++k) {
                    const double wpsi = w * c.p1v[q][k];
                    for (int i = 0; i < 10; ++i)
                        for (int a = 0; a < 3; ++a) Bloc(k, 3 * i + a) -= wpsi * g2(i, a);
                }
            }
            for (int k = 0; k < 4; ++k) {
                m_[press_nodes_[t][k]] += vol / 4.0;
                for (int i = 0; i < 10; ++i) {
                    if (nodes_[t][i] < 0) continue;
                    for (int a = 0; a < 3; ++a)
                        trips.emplace_back(press_nodes_[t][k], 3 * nodes_[t][i] + a,
                                           Bloc(k, 3 * i + a));
                }
            }
        }
        B_.resize(sp.n_press_dofs, sp.n_vel_dofs());
        B_.setFromTriplets(trips.begin(), trips.end());
        B_.makeCompressed();
    }

    void assemble_A_values(Eigen::SparseMatrix<double>& A, const ViscosityField& visc,
                           GradientForm form) const {
        const auto& c = *cache_;
        if (!visc.values.empty() &&
            visc.values.size() != static_cast<size_t>(c.n_tets) * ElementCache::kQ)
            throw Error("assemble: viscosity field size mismatch");
        double* vals = A.valuePtr();
        std::fill(vals, vals + A.nonZeros(), 0.0);

        for (int t = 0; t < c.n_tets; ++t) {
            Eigen::Matrix<double, 10, 10> S = Eigen::Matrix<double, 10, 10>::Zero();
            Eigen::Matrix<double, 30, 30> K;
            const bool sym = (form == GradientForm::SymmetricGradient);
            if (sym) K.setZero();
            for (int q = 0; q < ElementCache::kQ; ++q) {
                const size_t iq = static_cast<size_t>(t) * ElementCache::kQ + q;
                const double eta = visc.at(iq);
                if (!(eta > 0.0))
                    throw NonpositiveViscosity("assemble: viscosity must be positive at all points");
                const double w = c.wdet[iq] * eta;
                const auto& g = c.grad_p2[iq];
                if (!sym) {
                    S.noalias() += w * g * g.transpose();
                } else {
                    // D[phi_i e_a] : D[phi_j e_b]
                    //   = 1/2 (delta_ab grad_i . grad_j + d_b phi_i d_a phi_j)
                    const Eigen::Matrix<double, 10, 10> GG = g * g.transpose();
                    for (int i = 0; i < 10; ++i)
                        for (int j = 0; j < 10; ++j) {
                            const double dot = GG(i, j);
                            for (int a = 0; a < 3; ++a)
                                for (int b = 0; b < 3; ++b)
                                    K(3 * i + a, 3 * j + b) +=
                                        0.5 * w * ((a == b ? dot : 0.0) + g(i, b) * g(j, a));
                        }
                }
            }
            for (int i = 0; i < 10; ++i) {
                if (nodes_[t][i] < 0) continue;
                for (int j = 0; j < 10; ++j) {
                    if (nodes_[t][j] < 0) continue;
                    const int base = static_cast<int>((t * 100 + i * 10 + j) * 3);
                    if (!sym) {
                        const double v = S(i, j);
                        for (int a = 0; a < 3; ++a) vals[scatter_[base + a] + a] += v;
                    } else {
                        for (int b = 0; b < 3; ++b) {
                            const int pos = scatter_[base + b];
                            for (int a = 0; a < 3; ++a) vals[pos + a] += K(3 * i + a, 3 * j + b);
                        }
                    }
                }
            }
        }
    }

    std::shared_ptr<const TaylorHoodSpace> space_;
    std::shared_ptr<const ElementCache> cache_;
    std::vector<std::array<int, 10>> nodes_;      // reduced velocity node per local P2 node
    std::vector<std::array<int, 4>> press_nodes_; // reduced pressure node per vertex
    Eigen::SparseMatrix<double> A_pattern_;
    std::vector<int> scatter_;
    Eigen::SparseMatrix<double> B_;
    Eigen::VectorXd m_;
};

/// One-shot assembly matching the spec operation signature.
inline SaddleSystem assemble(const TaylorHoodSpace& space, const ElementCache& cache,
                             const ViscosityField& visc, GradientForm form,
                             const Eigen::Vector3d& f) {
    Assembler as(std::shared_ptr<const TaylorHoodSpace>(&space, [](auto*) {}),
                 std::shared_ptr<const ElementCache>(&cache, [](auto*) {}));
    return as.assemble(visc, form, f);
}

} // namespace cellflow
