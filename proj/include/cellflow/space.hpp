#pragma once

// Taylor-Hood (P2/P1) space on a tagged periodic cell mesh. Velocity nodes
// are vertices plus edge midpoints; pressure nodes are vertices. Velocity is
// pinned to zero on OBSTACLE, BOTTOM and TOP; the lateral X/Y faces are
// identified periodically for both fields (slave nodes fold onto masters).
// A node lying on both a lateral face and a Dirichlet face is Dirichlet.

#include <array>
#include <cstdint>
#include <memory>
#include <numeric>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cellflow/errors.hpp"
#include "cellflow/mesh.hpp"
#include "cellflow/quadrature.hpp"

namespace cellflow {

struct SpaceCounts {
    int raw_velocity_nodes = 0;
    int velocity_slaves = 0;
    int dirichlet_velocity_nodes = 0; // counted over representatives
    int free_velocity_nodes = 0;
    int velocity_dofs = 0;
    int raw_pressure_nodes = 0;
    int pressure_slaves = 0;
    int pressure_dofs = 0;
};

struct TaylorHoodSpace {
    std::shared_ptr<const Mesh3D> mesh;

    int n_vertices = 0;
    int n_edges = 0;
    std::vector<std::array<int, 6>> tet_edges; // per tet, edge ids in kTetEdges order
    std::vector<std::array<int, 2>> edge_verts;

    // Velocity node resolution: node -> periodic representative -> free index
    // (-1 when the class is Dirichlet). dof id = 3 * index + component.
    std::vector<int> vel_rep;
    std::vector<int> vel_index;
    int n_free_vel_nodes = 0;

    // Pressure: vertices only, periodic, no Dirichlet.
    std::vector<int> press_rep;
    std::vector<int> press_index;
    int n_press_dofs = 0;

    SpaceCounts counts;

    int n_vel_nodes() const { return n_vertices + n_edges; }
    int n_vel_dofs() const { return 3 * n_free_vel_nodes; }

    Eigen::Vector3d node_position(int node) const {
        if (node < n_vertices) return mesh->vertices[node];
        const auto& e = edge_verts[node - n_vertices];
        return 0.5 * (mesh->vertices[e[0]] + mesh->vertices[e[1]]);
    }

    /// Full nodal velocity field from the reduced coefficient vector:
    /// slaves take their master's value, Dirichlet nodes are zero.
    std::vector<Eigen::Vector3d> expand_velocity(const Eigen::VectorXd& reduced) const {
        std::vector<Eigen::Vector3d> out(n_vel_nodes(), Eigen::Vector3d::Zero());
        for (int n = 0; n < n_vel_nodes(); ++n) {
            const int idx = vel_index[n];
            if (idx >= 0) out[n] = reduced.segment<3>(3 * idx);
        }
        return out;
    }
    std::vector<double> expand_pressure(const Eigen::VectorXd& reduced) const {
        std::vector<double> out(n_vertices, 0.0);
        for (int v = 0; v < n_vertices; ++v) out[v] = reduced[press_index[v]];
        return out;
    }
};

inline TaylorHoodSpace build_space(std::shared_ptr<const Mesh3D> mesh_ptr) {
    const Mesh3D& mesh = *mesh_ptr;
    TaylorHoodSpace sp;
    sp.mesh = mesh_ptr;
    sp.n_vertices = static_cast<int>(mesh.vertices.size());

    // Edge table.
    std::unordered_map<std::int64_t, int> edge_ids;
    auto ekey = [](int a, int b) {
        if (a > b) std::swap(a, b);
        return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    sp.tet_edges.resize(mesh.tets.size());
    for (size_t t = 0; t < mesh.tets.size(); ++t) {
        for (int e = 0; e < 6; ++e) {
            const int a = mesh.tets[t][kTetEdges[e][0]];
            const int b = mesh.tets[t][kTetEdges[e][1]];
            auto [it, fresh] = edge_ids.try_emplace(ekey(a, b), static_cast<int>(sp.edge_verts.size()));
            if (fresh) sp.edge_verts.push_back({std::min(a, b), std::max(a, b)});
            sp.tet_edges[t][e] = it->second;
        }
    }
    sp.n_edges = static_cast<int>(sp.edge_verts.size());
    const int n_nodes = sp.n_vel_nodes();

    auto edge_node = [&](int a, int b) -> int {
        const auto it = edge_ids.find(ekey(a, b));
        return it == edge_ids.end() ? -1 : sp.n_vertices + it->second;
    };

    // Tag every node touched by a boundary face.
    std::vector<std::uint8_t> node_tags(n_nodes, 0);
    auto tag_bit = [](FacetTag t) { return static_cast<std::uint8_t>(1u << static_cast<int>(t)); };
    for (const auto& f : mesh.boundary_faces) {
        const auto& v = f.v;
        for (int k = 0; k < 3; ++k) {
            node_tags[v[k]] |= tag_bit(f.tag);
            const int en = edge_node(v[k], v[(k + 1) % 3]);
            if (en < 0) throw MeshFailure("build_space: boundary face edge missing from mesh");
            node_tags[en] |= tag_bit(f.tag);
        }
    }
    const std::uint8_t dirichlet_mask =
        tag_bit(FacetTag::Obstacle) | tag_bit(FacetTag::Bottom) | tag_bit(FacetTag::Top);

    // Periodic merging. Vertex pairs come from the mesh; edge pairs are
    // induced on the lateral surface triangulations.
    mesh_detail::UnionFind uf(n_nodes);
    auto merge_pairs = [&](const std::vector<std::pair<int, int>>& pairs, FacetTag lo_tag,
                           FacetTag hi_tag) {
        std::unordered_map<int, int> lo_to_hi;
        for (const auto& [lo, hi] : pairs) lo_to_hi[lo] = hi;
        for (int v = 0; v < sp.n_vertices; ++v) {
            if ((node_tags[v] & tag_bit(lo_tag)) && !lo_to_hi.count(v))
                throw PairingIncomplete("build_space: lateral vertex lacks a periodic partner");
        }
        for (const auto& [lo, hi] : pairs) uf.merge(lo, hi);
        for (const auto& f : mesh.boundary_faces) {
            if (f.tag != lo_tag) continue;
            for (int k = 0; k < 3; ++k) {
                const int a = f.v[k], b = f.v[(k + 1) % 3];
                const auto ia = lo_to_hi.find(a), ib = lo_to_hi.find(b);
                if (ia == lo_to_hi.end() || ib == lo_to_hi.end())
                    throw PairingIncomplete("build_space: lateral face vertex lacks a partner");
                const int lo_edge = edge_node(a, b);
                const int hi_edge = edge_node(ia->second, ib->second);
                if (hi_edge < 0)
                    throw PairingIncomplete("build_space: periodic partner edge missing");
                uf.merge(lo_edge, hi_edge);
            }
        }
    };
    merge_pairs(mesh.pairs_x, FacetTag::XLo, FacetTag::XHi);
    merge_pairs(mesh.pairs_y, FacetTag::YLo, FacetTag::YHi);

    // Resolve representatives; a class is Dirichlet if any member is.
    sp.vel_rep.resize(n_nodes);
    std::vector<std::uint8_t> class_dirichlet(n_nodes, 0);
    for (int n = 0; n < n_nodes; ++n) {
        sp.vel_rep[n] = uf.find(n);
        if (node_tags[n] & dirichlet_mask) class_dirichlet[sp.vel_rep[n]] = 1;
    }
    sp.vel_index.assign(n_nodes, -1);
    std::vector<int> root_index(n_nodes, -1);
    for (int n = 0; n < n_nodes; ++n) {
        const int r = sp.vel_rep[n];
        if (class_dirichlet[r]) continue;
        if (root_index[r] < 0) root_index[r] = sp.n_free_vel_nodes++;
        sp.vel_index[n] = root_index[r];
    }

    // Pressure on vertices: periodic, no Dirichlet.
    mesh_detail::UnionFind ufp(sp.n_vertices);
    for (const auto& [lo, hi] : mesh.pairs_x) ufp.merge(lo, hi);
    for (const auto& [lo, hi] : mesh.pairs_y) ufp.merge(lo, hi);
    sp.press_rep.resize(sp.n_vertices);
    sp.press_index.assign(sp.n_vertices, -1);
    std::vector<int> proot(sp.n_vertices, -1);
    for (int v = 0; v < sp.n_vertices; ++v) {
        sp.press_rep[v] = ufp.find(v);
        if (proot[sp.press_rep[v]] < 0) proot[sp.press_rep[v]] = sp.n_press_dofs++;
        sp.press_index[v] = proot[sp.press_rep[v]];
    }

    auto& c = sp.counts;
    c.raw_velocity_nodes = n_nodes;
    for (int n = 0; n < n_nodes; ++n) {
        if (sp.vel_rep[n] != n) ++c.velocity_slaves;
        if (sp.vel_rep[n] == n && class_dirichlet[n]) ++c.dirichlet_velocity_nodes;
    }
    c.free_velocity_nodes = sp.n_free_vel_nodes;
    c.velocity_dofs = sp.n_vel_dofs();
    c.raw_pressure_nodes = sp.n_vertices;
    for (int v = 0; v < sp.n_vertices; ++v)
        if (sp.press_rep[v] != v) ++c.pressure_slaves;
    c.pressure_dofs = sp.n_press_dofs;
    return sp;
}

} // namespace cellflow
