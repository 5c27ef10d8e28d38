#pragma once

// Conforming triangulation of the cross-section Z' \ T': structured boundary
// sampling, Bowyer-Watson Delaunay over boundary + lattice + polygon points,
// constrained-edge recovery by flips, hole carving, and guarded Laplacian
// smoothing. The four lateral sides of Z' share one tick array, so opposite
// sides carry bitwise-identical 1D vertex distributions and periodic matching
// downstream is exact.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "cellflow/errors.hpp"
#include "cellflow/geometry.hpp"

namespace cellflow {

struct Mesh2D {
    std::vector<Eigen::Vector2d> vertices;
    std::vector<std::array<int, 3>> triangles; // counter-clockwise

    double area() const {
        double a = 0.0;
        for (const auto& t : triangles) {
            const auto &p = vertices[t[0]], &q = vertices[t[1]], &r = vertices[t[2]];
            a += 0.5 * ((q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x()));
        }
        return a;
    }
};

namespace tri_detail {

using BigFloat = boost::multiprecision::cpp_bin_float_50;

inline int sign_of(double v, double bound) {
    if (v > bound) return 1;
    if (v < -bound) return -1;
    return 0;
}

/// Orientation of (a, b, c): +1 counter-clockwise, -1 clockwise, 0 collinear.
/// Long-double filter with a multiprecision fallback near the decision line.
inline int orient2d(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c) {
    const long double ax = a.x(), ay = a.y(), bx = b.x(), by = b.y(), cx = c.x(), cy = c.y();
    const long double t1 = (bx - ax) * (cy - ay);
    const long double t2 = (by - ay) * (cx - ax);
    const long double det = t1 - t2;
    const long double bound = 8.0L * 1.1e-19L * (std::abs(t1) + std::abs(t2));
    if (det > bound) return 1;
    if (det < -bound) return -1;
    const BigFloat u1 = (BigFloat(b.x()) - BigFloat(a.x())) * (BigFloat(c.y()) - BigFloat(a.y()));
    const BigFloat u2 = (BigFloat(b.y()) - BigFloat(a.y())) * (BigFloat(c.x()) - BigFloat(a.x()));
    const BigFloat d = u1 - u2;
    const BigFloat scale = abs(u1) + abs(u2);
    if (d > scale * 1e-40) return 1;
    if (d < -scale * 1e-40) return -1;
    return 0;
}

/// Strict incircle test: +1 if d lies inside the circumcircle of the
/// counter-clockwise triangle (a, b, c).
inline int incircle(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                    const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    auto det3 = [](auto ax, auto ay, auto aw, auto bx, auto by, auto bw, auto cx, auto cy,
                   auto cw, auto& result, auto& magnitude) {
        auto m1 = by * cw - bw * cy;
        auto m2 = bx * cw - bw * cx;
        auto m3 = bx * cy - by * cx;
        result = ax * m1 - ay * m2 + aw * m3;
        magnitude = abs(ax * m1) + abs(ay * m2) + abs(aw * m3);
    };
    {
        const long double dx = d.x(), dy = d.y();
        const long double ax = (long double)a.x() - dx, ay = (long double)a.y() - dy;
        const long double bx = (long double)b.x() - dx, by = (long double)b.y() - dy;
        const long double cx = (long double)c.x() - dx, cy = (long double)c.y() - dy;
        const long double aw = ax * ax + ay * ay, bw = bx * bx + by * by, cw = cx * cx + cy * cy;
        long double det, mag;
        det3(ax, ay, aw, bx, by, bw, cx, cy, cw, det, mag);
        const long double bound = 32.0L * 1.1e-19L * mag;
        if (det > bound) return 1;
        if (det < -bound) return -1;
    }
    const BigFloat ax = BigFloat(a.x()) - BigFloat(d.x()), ay = BigFloat(a.y()) - BigFloat(d.y());
    const BigFloat bx = BigFloat(b.x()) - BigFloat(d.x()), by = BigFloat(b.y()) - BigFloat(d.y());
    const BigFloat cx = BigFloat(c.x()) - BigFloat(d.x()), cy = BigFloat(c.y()) - BigFloat(d.y());
    const BigFloat aw = ax * ax + ay * ay, bw = bx * bx + by * by, cw = cx * cx + cy * cy;
    BigFloat det, mag;
    det3(ax, ay, aw, bx, by, bw, cx, cy, cw, det, mag);
    if (det > mag * 1e-40) return 1;
    if (det < -mag * 1e-40) return -1;
    return 0;
}

inline std::int64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::int64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

/// Incremental Delaunay triangulation with a fixed super-triangle. Vertex ids
/// refer to the caller's point array; super vertices live past the end.
class Delaunay {
public:
    explicit Delaunay(const std::vector<Eigen::Vector2d>& points) : pts_(points) {
        const int n = static_cast<int>(pts_.size());
        super_ = {n, n + 1, n + 2};
        all_ = pts_;
        all_.push_back({-40.0, -39.0});
        all_.push_back({40.0, -41.0});
        all_.push_back({0.5, 60.0});
        tris_.push_back({{super_[0], super_[1], super_[2]}, true});
        for (int i = 0; i < n; ++i) insert(i);
    }

    /// Alive triangles not touching the super-triangle.
    std::vector<std::array<int, 3>> real_triangles() const {
        std::vector<std::array<int, 3>> out;
        for (const auto& t : tris_) {
            if (!t.alive) continue;
            if (t.v[0] >= super_[0] || t.v[1] >= super_[0] || t.v[2] >= super_[0]) continue;
            out.push_back(t.v);
        }
        return out;
    }

private:
    struct Tri {
        std::array<int, 3> v;
        bool alive;
    };

    void insert(int p) {
        // Cavity: alive triangles whose circumcircle strictly contains p.
        std::vector<int> cavity;
        for (int t = 0; t < static_cast<int>(tris_.size()); ++t) {
            if (!tris_[t].alive) continue;
            const auto& v = tris_[t].v;
            if (incircle(all_[v[0]], all_[v[1]], all_[v[2]], all_[p]) > 0) cavity.push_back(t);
        }
        if (cavity.empty())
            throw MeshFailure("triangulation: point outside all circumcircles (duplicate point?)");

        // Directed boundary edges of the cavity: interior edges appear twice.
        std::unordered_map<std::int64_t, int> count;
        for (int t : cavity)
            for (int e = 0; e < 3; ++e)
                ++count[edge_key(tris_[t].v[e], tris_[t].v[(e + 1) % 3])];
        for (int t : cavity) tris_[t].alive = false;
        for (int t : cavity) {
            for (int e = 0; e < 3; ++e) {
                const int a = tris_[t].v[e], b = tris_[t].v[(e + 1) % 3];
                if (count[edge_key(a, b)] != 1) continue;
                if (orient2d(all_[a], all_[b], all_[p]) <= 0)
                    throw MeshFailure("triangulation: non-star-shaped cavity");
                tris_.push_back({{a, b, p}, true});
            }
        }
    }

    const std::vector<Eigen::Vector2d>& pts_;
    std::vector<Eigen::Vector2d> all_;
    std::array<int, 3> super_;
    std::vector<Tri> tris_;
};

inline bool segments_cross(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                           const Eigen::Vector2d& c, const Eigen::Vector2d& d) {
    const int d1 = orient2d(a, b, c), d2 = orient2d(a, b, d);
    const int d3 = orient2d(c, d, a), d4 = orient2d(c, d, b);
    return d1 * d2 < 0 && d3 * d4 < 0;
}

/// Force segment (a, b) to be an edge by flipping the diagonals it crosses.
inline void recover_edge(std::vector<std::array<int, 3>>& tris,
                         const std::vector<Eigen::Vector2d>& pts, int a, int b) {
    auto has_edge = [&](int u, int v) {
        for (const auto& t : tris)
            for (int e = 0; e < 3; ++e)
                if ((t[e] == u && t[(e + 1) % 3] == v) || (t[e] == v && t[(e + 1) % 3] == u))
                    return true;
        return false;
    };
    for (int guard = 0; guard < 1000; ++guard) {
        if (has_edge(a, b)) return;
        // Adjacency of undirected edges to triangles.
        std::unordered_map<std::int64_t, std::array<int, 2>> adj;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            for (int e = 0; e < 3; ++e) {
                auto& slot = adj.try_emplace(edge_key(tris[t][e], tris[t][(e + 1) % 3]),
                                             std::array<int, 2>{-1, -1})
                                 .first->second;
                (slot[0] < 0 ? slot[0] : slot[1]) = t;
            }
        }
        bool flipped = false;
        for (auto& [key, ts] : adj) {
            if (ts[1] < 0) continue;
            const int c = static_cast<int>(key >> 32);
            const int d = static_cast<int>(key & 0xffffffff);
            if (c == a || c == b || d == a || d == b) continue;
            if (!segments_cross(pts[a], pts[b], pts[c], pts[d])) continue;
            // Opposite apexes of the two triangles sharing (c, d).
            auto apex = [&](int t) {
                for (int k = 0; k < 3; ++k)
                    if (tris[t][k] != c && tris[t][k] != d) return tris[t][k];
                return -1;
            };
            const int p = apex(ts[0]), q = apex(ts[1]);
            // Flip is legal only if the quad (p, c, q, d) is strictly convex.
            if (orient2d(pts[p], pts[c], pts[q]) == 0 || orient2d(pts[p], pts[d], pts[q]) == 0)
                continue;
            if (orient2d(pts[c], pts[p], pts[q]) * orient2d(pts[d], pts[p], pts[q]) >= 0)
                continue;
            auto orient_fix = [&](std::array<int, 3> t) {
                if (orient2d(pts[t[0]], pts[t[1]], pts[t[2]]) < 0) std::swap(t[1], t[2]);
                return t;
            };
            tris[ts[0]] = orient_fix({p, q, c});
            tris[ts[1]] = orient_fix({p, q, d});
            flipped = true;
            break;
        }
        if (!flipped && has_edge(a, b)) return;
        if (!flipped) throw MeshFailure("triangulation: constrained edge recovery stalled");
    }
    throw MeshFailure("triangulation: constrained edge recovery did not terminate");
}

} // namespace tri_detail

/// Triangulate Z' \ polygon with target edge length h. The polygon (if any)
/// must be simple, counter-clockwise, and strictly inside Z'.
inline Mesh2D triangulate_cross_section(const std::optional<Polygon2D>& hole, double h) {
    using namespace tri_detail;
    if (!(h > 0.0)) throw std::invalid_argument("triangulate_cross_section: h must be positive");
    if (hole) {
        if (hole->size() < 3 || !hole->is_simple())
            throw MeshFailure("triangulate_cross_section: polygon is degenerate or self-intersecting");
        if (!hole->is_ccw())
            throw MeshFailure("triangulate_cross_section: polygon must be counter-clockwise");
        if (!(hole->max_abs_coord() < 0.5))
            throw ClearanceViolation("triangulate_cross_section: polygon touches the cell boundary");
    }

    const int m = std::max<int>(1, std::lround(1.0 / h));
    std::vector<double> ticks(m + 1);
    for (int i = 0; i <= m; ++i) ticks[i] = static_cast<double>(i) / m - 0.5;
    const double hx = 1.0 / m;

    std::vector<Eigen::Vector2d> pts;
    // Lateral boundary: corners via the shared tick array so the four sides
    // carry the same 1D distribution.
    for (int j = 0; j <= m; ++j) pts.push_back({ticks[0], ticks[j]});          // x = -1/2
    for (int j = 0; j <= m; ++j) pts.push_back({ticks[m], ticks[j]});          // x = +1/2
    for (int i = 1; i < m; ++i) pts.push_back({ticks[i], ticks[0]});           // y = -1/2
    for (int i = 1; i < m; ++i) pts.push_back({ticks[i], ticks[m]});           // y = +1/2
    const int n_boundary = static_cast<int>(pts.size());

    const int poly_begin = n_boundary;
    if (hole)
        for (const auto& p : hole->pts) pts.push_back(p);
    const int poly_end = static_cast<int>(pts.size());

    // Graded ring at distance h/2 outside the polygon, resampled to the
    // lattice spacing. Without it, a finely sampled polygon in a coarse mesh
    // fans into a fixed number of slivers that would not refine with h.
    const int interior_begin = poly_end;
    if (hole) {
        const int n = hole->size();
        const double chord = hole->perimeter() / n;
        const int stride = std::max(1, static_cast<int>(std::ceil(0.45 * h / chord)));
        for (int k = 0; k < n; k += stride) {
            const Eigen::Vector2d prev = hole->pts[(k + n - 1) % n];
            const Eigen::Vector2d cur = hole->pts[k];
            const Eigen::Vector2d next = hole->pts[(k + 1) % n];
            // Outward normal of a CCW polygon: rotate edge tangents by -90deg.
            auto outward = [](const Eigen::Vector2d& e) {
                return Eigen::Vector2d(e.y(), -e.x()).normalized();
            };
            const Eigen::Vector2d nrm = (outward(cur - prev) + outward(next - cur)).normalized();
            const Eigen::Vector2d p = cur + 0.5 * h * nrm;
            if (std::abs(p.x()) > 0.5 - 0.45 * hx || std::abs(p.y()) > 0.5 - 0.45 * hx) continue;
            if (hole->contains(p) || hole->distance(p) < 0.3 * h) continue;
            pts.push_back(p);
        }
    }

    // Interior lattice, offset rows, kept clear of the boundaries and the
    // ring band.
    const int rows = std::max<int>(2, std::lround(1.0 / (0.866 * h)));
    for (int j = 1; j < rows; ++j) {
        const double y = static_cast<double>(j) / rows - 0.5;
        const double off = (j % 2 == 1) ? 0.5 : 0.0;
        for (int i = -1; i <= m + 1; ++i) {
            const double x = (i + off) * hx - 0.5;
            if (x < -0.5 + 0.45 * hx || x > 0.5 - 0.45 * hx) continue;
            const Eigen::Vector2d p(x, y);
            if (hole && (hole->contains(p) || hole->distance(p) < 0.95 * h)) continue;
            pts.push_back(p);
        }
    }

    Delaunay dt(pts);
    auto tris = dt.real_triangles();

    // Constrained edges: the four sides (consecutive ticks) and the polygon.
    std::vector<std::array<int, 2>> constrained;
    for (int j = 0; j < m; ++j) {
        constrained.push_back({j, j + 1});                       // left
        constrained.push_back({m + 1 + j, m + 1 + j + 1});       // right
    }
    auto bottom_id = [&](int i) { return i == 0 ? 0 : (i == m ? m + 1 : 2 * (m + 1) + (i - 1)); };
    auto top_id = [&](int i) {
        return i == 0 ? m : (i == m ? 2 * m + 1 : 2 * (m + 1) + (m - 1) + (i - 1));
    };
    for (int i = 0; i < m; ++i) {
        constrained.push_back({bottom_id(i), bottom_id(i + 1)});
        constrained.push_back({top_id(i), top_id(i + 1)});
    }
    if (hole)
        for (int k = poly_begin; k < poly_end; ++k)
            constrained.push_back({k, k == poly_end - 1 ? poly_begin : k + 1});
    for (const auto& e : constrained) recover_edge(tris, pts, e[0], e[1]);

    // Carve the hole.
    if (hole) {
        std::erase_if(tris, [&](const std::array<int, 3>& t) {
            const Eigen::Vector2d c = (pts[t[0]] + pts[t[1]] + pts[t[2]]) / 3.0;
            return hole->contains(c);
        });
    }

    Mesh2D mesh;
    mesh.vertices = std::move(pts);
    mesh.triangles = std::move(tris);

    // Guarded Laplacian smoothing of lattice vertices only.
    {
        std::unordered_map<int, std::unordered_set<int>> nbrs;
        std::unordered_map<int, std::vector<int>> v2t;
        for (int t = 0; t < static_cast<int>(mesh.triangles.size()); ++t) {
            for (int e = 0; e < 3; ++e) {
                const int u = mesh.triangles[t][e], v = mesh.triangles[t][(e + 1) % 3];
                nbrs[u].insert(v);
                nbrs[v].insert(u);
                v2t[u].push_back(t);
            }
        }
        auto tri_ok = [&](int t) {
            const auto& tri = mesh.triangles[t];
            const auto &p = mesh.vertices[tri[0]], &q = mesh.vertices[tri[1]],
                       &r = mesh.vertices[tri[2]];
            return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x()) >
                   1e-14;
        };
        for (int pass = 0; pass < 2; ++pass) {
            for (int v = interior_begin; v < static_cast<int>(mesh.vertices.size()); ++v) {
                if (nbrs[v].empty()) continue;
                Eigen::Vector2d avg = Eigen::Vector2d::Zero();
                for (int u : nbrs[v]) avg += mesh.vertices[u];
                avg /= static_cast<double>(nbrs[v].size());
                const Eigen::Vector2d old = mesh.vertices[v];
                mesh.vertices[v] = avg;
                bool ok = true;
                for (int t : v2t[v])
                    if (!tri_ok(t)) { ok = false; break; }
                if (!ok) mesh.vertices[v] = old;
            }
        }
    }

    // Final validation: orientation and exact area.
    for (const auto& t : mesh.triangles) {
        if (orient2d(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]) <= 0)
            throw MeshFailure("triangulate_cross_section: inverted or degenerate triangle");
    }
    const double expected = 1.0 - (hole ? hole->area() : 0.0);
    if (std::abs(mesh.area() - expected) > 1e-10)
        throw MeshFailure("triangulate_cross_section: triangulated area does not match the domain");
    return mesh;
}

} // namespace cellflow
