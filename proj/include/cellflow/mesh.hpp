#pragma once

// Tetrahedral meshes of the fluid cell Z_f = Z' x (0,1) minus the obstacle
// cylinder. Built by extruding a cross-section triangulation into n_layers
// prism layers, each split into 3 tets. The split diagonal on every lateral
// quad is chosen by a translation-invariant vertex order, so the triangulated
// surfaces of opposite periodic faces match exactly.

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "cellflow/errors.hpp"
#include "cellflow/geometry.hpp"
#include "cellflow/triangulation.hpp"

namespace cellflow {

enum class FacetTag : int {
    Interior = 0,
    Obstacle = 1,
    Bottom = 2,
    Top = 3,
    XLo = 4,
    XHi = 5,
    YLo = 6,
    YHi = 7,
};

inline const char* facet_tag_name(FacetTag t) {
    switch (t) {
        case FacetTag::Interior: return "INTERIOR";
        case FacetTag::Obstacle: return "OBSTACLE";
        case FacetTag::Bottom: return "BOTTOM";
        case FacetTag::Top: return "TOP";
        case FacetTag::XLo: return "X_LO";
        case FacetTag::XHi: return "X_HI";
        case FacetTag::YLo: return "Y_LO";
        case FacetTag::YHi: return "Y_HI";
    }
    return "?";
}

struct Mesh3D {
    std::vector<Eigen::Vector3d> vertices;
    std::vector<std::array<int, 4>> tets; // positively oriented

    struct BoundaryFace {
        std::array<int, 3> v;
        FacetTag tag;
    };
    std::vector<BoundaryFace> boundary_faces;

    // Periodic vertex bijections, lo -> hi; hi - lo = (1,0,0) resp. (0,1,0).
    std::vector<std::pair<int, int>> pairs_x;
    std::vector<std::pair<int, int>> pairs_y;

    double tet_volume(int t) const {
        const auto& T = tets[t];
        const Eigen::Vector3d a = vertices[T[1]] - vertices[T[0]];
        const Eigen::Vector3d b = vertices[T[2]] - vertices[T[0]];
        const Eigen::Vector3d c = vertices[T[3]] - vertices[T[0]];
        return a.cross(b).dot(c) / 6.0;
    }
    double volume() const {
        double v = 0.0;
        for (int t = 0; t < static_cast<int>(tets.size()); ++t) v += tet_volume(t);
        return v;
    }
    double face_area(const std::array<int, 3>& f) const {
        const Eigen::Vector3d a = vertices[f[1]] - vertices[f[0]];
        const Eigen::Vector3d b = vertices[f[2]] - vertices[f[0]];
        return 0.5 * a.cross(b).norm();
    }
    double tagged_area(FacetTag tag) const {
        double s = 0.0;
        for (const auto& f : boundary_faces)
            if (f.tag == tag) s += face_area(f.v);
        return s;
    }
};

namespace mesh_detail {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void merge(int a, int b) { parent[find(a)] = find(b); }
};

inline constexpr double kSnapTol = 1e-12;

/// Sorted vertex ids on a coordinate plane (axis==0 for x, 1 for y), ordered
/// by the transverse coordinate.
inline std::vector<int> side_vertices(const std::vector<Eigen::Vector2d>& pts, int axis,
                                      double plane) {
    std::vector<int> ids;
    for (int i = 0; i < static_cast<int>(pts.size()); ++i)
        if (pts[i][axis] == plane) ids.push_back(i);
    std::sort(ids.begin(), ids.end(),
              [&](int a, int b) { return pts[a][1 - axis] < pts[b][1 - axis]; });
    return ids;
}

} // namespace mesh_detail

/// Extrude a cross-section triangulation into n_layers prism layers and split
/// to tets. Tags boundary facets and constructs the lateral periodic vertex
/// bijections (coordinate matching, tolerance 1e-12, snapped to exact).
inline Mesh3D extrude_to_tets(const Mesh2D& mesh2d, int n_layers) {
    using namespace mesh_detail;
    if (n_layers < 1) throw std::invalid_argument("extrude_to_tets: n_layers must be positive");
    if (mesh2d.triangles.empty()) throw MeshFailure("extrude_to_tets: empty cross-section");

    // Snap near-boundary coordinates to the exact cell planes.
    std::vector<Eigen::Vector2d> pts = mesh2d.vertices;
    for (auto& p : pts)
        for (int a = 0; a < 2; ++a) {
            if (std::abs(p[a] + 0.5) <= kSnapTol) p[a] = -0.5;
            if (std::abs(p[a] - 0.5) <= kSnapTol) p[a] = 0.5;
        }

    // Lateral pairings in 2D; snap the hi side onto the lo distribution.
    std::array<std::vector<std::pair<int, int>>, 2> pairs2d;
    for (int axis = 0; axis < 2; ++axis) {
        auto lo = side_vertices(pts, axis, -0.5);
        auto hi = side_vertices(pts, axis, 0.5);
        if (lo.size() != hi.size() || lo.empty())
            throw PairingIncomplete("extrude_to_tets: mismatched lateral vertex counts");
        for (size_t i = 0; i < lo.size(); ++i) {
            const double tlo = pts[lo[i]][1 - axis], thi = pts[hi[i]][1 - axis];
            if (std::abs(tlo - thi) > kSnapTol)
                throw PairingIncomplete("extrude_to_tets: mismatched lateral vertex distributions");
            pts[hi[i]][1 - axis] = tlo;
            pairs2d[axis].push_back({lo[i], hi[i]});
        }
    }

    // Canonical representative of each vertex under the periodic maps; used
    // as the primary prism-split sort key so it is translation invariant.
    const int n2 = static_cast<int>(pts.size());
    UnionFind uf(n2);
    for (int axis = 0; axis < 2; ++axis)
        for (const auto& [lo, hi] : pairs2d[axis]) uf.merge(lo, hi);
    auto column_less = [&](int a, int b) {
        const int ca = uf.find(a), cb = uf.find(b);
        if (ca != cb) return ca < cb;
        if (pts[a].x() != pts[b].x()) return pts[a].x() < pts[b].x();
        return pts[a].y() < pts[b].y();
    };

    Mesh3D mesh;
    mesh.vertices.reserve(static_cast<size_t>(n2) * (n_layers + 1));
    for (int k = 0; k <= n_layers; ++k) {
        const double z = static_cast<double>(k) / n_layers;
        for (const auto& p : pts) mesh.vertices.push_back({p.x(), p.y(), z});
    }
    auto vid = [n2](int layer, int v) { return layer * n2 + v; };

    for (const auto& tri : mesh2d.triangles) {
        std::array<int, 3> s = tri;
        std::sort(s.begin(), s.end(), column_less);
        for (int k = 0; k < n_layers; ++k) {
            const std::array<int, 3> b = {vid(k, s[0]), vid(k, s[1]), vid(k, s[2])};
            const std::array<int, 3> t = {vid(k + 1, s[0]), vid(k + 1, s[1]), vid(k + 1, s[2])};
            const std::array<std::array<int, 4>, 3> split = {{
                {b[0], b[1], b[2], t[2]},
                {b[0], b[1], t[2], t[1]},
                {b[0], t[1], t[2], t[0]},
            }};
            for (auto tet : split) {
                mesh.tets.push_back(tet);
                const int id = static_cast<int>(mesh.tets.size()) - 1;
                double vol = mesh.tet_volume(id);
                if (vol < 0.0) {
                    std::swap(mesh.tets[id][2], mesh.tets[id][3]);
                    vol = -vol;
                }
                if (!(vol > 0.0))
                    throw OrientationFailure("extrude_to_tets: degenerate tetrahedron");
            }
        }
    }

    // Volume must match the cross-section area exactly (extrusion height 1).
    if (std::abs(mesh.volume() - mesh2d.area()) > 1e-10)
        throw OrientationFailure("extrude_to_tets: volume does not match cross-section area");

    // Boundary faces: those referenced by exactly one tet.
    {
        static constexpr int kFaces[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
        std::unordered_map<std::int64_t, std::pair<std::array<int, 3>, int>> faces;
        auto key3 = [](std::array<int, 3> f) {
            std::sort(f.begin(), f.end());
            return (static_cast<std::int64_t>(f[0]) << 42) |
                   (static_cast<std::int64_t>(f[1]) << 21) | f[2];
        };
        for (const auto& T : mesh.tets) {
            for (const auto& lf : kFaces) {
                const std::array<int, 3> f = {T[lf[0]], T[lf[1]], T[lf[2]]};
                auto [it, fresh] = faces.try_emplace(key3(f), std::make_pair(f, 0));
                ++it->second.second;
            }
        }
        for (const auto& [key, fc] : faces) {
            if (fc.second != 1) continue;
            const auto& f = fc.first;
            auto all_on = [&](int axis, double plane) {
                return mesh.vertices[f[0]][axis] == plane && mesh.vertices[f[1]][axis] == plane &&
                       mesh.vertices[f[2]][axis] == plane;
            };
            int hits = 0;
            FacetTag tag = FacetTag::Obstacle;
            const std::array<std::tuple<int, double, FacetTag>, 6> planes = {{
                {2, 0.0, FacetTag::Bottom},
                {2, 1.0, FacetTag::Top},
                {0, -0.5, FacetTag::XLo},
                {0, 0.5, FacetTag::XHi},
                {1, -0.5, FacetTag::YLo},
                {1, 0.5, FacetTag::YHi},
            }};
            for (const auto& [axis, plane, t] : planes) {
                if (all_on(axis, plane)) {
                    ++hits;
                    tag = t;
                }
            }
            if (hits > 1) throw MeshFailure("extrude_to_tets: facet lies on two boundary planes");
            mesh.boundary_faces.push_back({f, tag});
        }
        std::sort(mesh.boundary_faces.begin(), mesh.boundary_faces.end(),
                  [](const auto& a, const auto& b) { return a.v < b.v; });
    }

    for (int k = 0; k <= n_layers; ++k) {
        for (const auto& [lo, hi] : pairs2d[0]) mesh.pairs_x.push_back({vid(k, lo), vid(k, hi)});
        for (const auto& [lo, hi] : pairs2d[1]) mesh.pairs_y.push_back({vid(k, lo), vid(k, hi)});
    }
    return mesh;
}

/// Polygonize, triangulate, and extrude a cell in one step.
inline Mesh3D build_cell_mesh(const CellSpec& spec) {
    spec.validate();
    std::optional<Polygon2D> poly;
    if (spec.shape) poly = build_inclusion_polygon(*spec.shape, spec.n_seg, spec.clearance);
    const Mesh2D cross = triangulate_cross_section(poly, spec.h);
    return extrude_to_tets(cross, spec.n_layers);
}

struct MeshQuality {
    int n_vertices = 0;
    int n_tets = 0;
    double volume = 0.0;
    double min_tet_volume = 0.0;
    double max_tet_volume = 0.0;
    double obstacle_area = 0.0;
    int n_pairs_x = 0;
    int n_pairs_y = 0;
};

inline MeshQuality mesh_quality(const Mesh3D& mesh) {
    MeshQuality q;
    q.n_vertices = static_cast<int>(mesh.vertices.size());
    q.n_tets = static_cast<int>(mesh.tets.size());
    q.min_tet_volume = std::numeric_limits<double>::max();
    for (int t = 0; t < q.n_tets; ++t) {
        const double v = mesh.tet_volume(t);
        q.volume += v;
        q.min_tet_volume = std::min(q.min_tet_volume, v);
        q.max_tet_volume = std::max(q.max_tet_volume, v);
    }
    q.obstacle_area = mesh.tagged_area(FacetTag::Obstacle);
    q.n_pairs_x = static_cast<int>(mesh.pairs_x.size());
    q.n_pairs_y = static_cast<int>(mesh.pairs_y.size());
    return q;
}

/// ASCII Gmsh MSH 2.2: nodes, tagged boundary triangles, tets.
inline void write_msh(const Mesh3D& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_msh: cannot open " + path);
    out.precision(17);
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    out << "$PhysicalNames\n8\n";
    for (int t = 1; t <= 7; ++t)
        out << 2 << " " << t << " \"" << facet_tag_name(static_cast<FacetTag>(t)) << "\"\n";
    out << "3 10 \"FLUID\"\n$EndPhysicalNames\n";
    out << "$Nodes\n" << mesh.vertices.size() << "\n";
    for (size_t i = 0; i < mesh.vertices.size(); ++i) {
        const auto& p = mesh.vertices[i];
        out << i + 1 << " " << p.x() << " " << p.y() << " " << p.z() << "\n";
    }
    out << "$EndNodes\n";
    out << "$Elements\n" << mesh.boundary_faces.size() + mesh.tets.size() << "\n";
    std::size_t id = 1;
    for (const auto& f : mesh.boundary_faces) {
        out << id++ << " 2 2 " << static_cast<int>(f.tag) << " " << static_cast<int>(f.tag);
        for (int v : f.v) out << " " << v + 1;
        out << "\n";
    }
    for (const auto& T : mesh.tets) {
        out << id++ << " 4 2 10 10";
        for (int v : T) out << " " << v + 1;
        out << "\n";
    }
    out << "$EndElements\n";
}

} // namespace cellflow
