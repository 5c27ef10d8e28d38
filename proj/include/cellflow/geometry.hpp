#pragma once

// Parametric inclusion shapes and their polygonal approximations inside the
// unit periodicity cell Z' = (-1/2, 1/2)^2.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "cellflow/errors.hpp"

namespace cellflow {

inline constexpr double kDefaultClearance = 0.05;

enum class InclusionKind { Disk, Ellipse };

struct InclusionShape {
    InclusionKind kind = InclusionKind::Disk;
    double radius = 0.1;      // Disk
    double semi_major = 0.3;  // Ellipse
    double semi_minor = 0.1;  // Ellipse
    double angle = 0.0;       // rotation of the major axis w.r.t. x1, radians

    static InclusionShape disk(double r) {
        InclusionShape s;
        s.kind = InclusionKind::Disk;
        s.radius = r;
        return s;
    }
    static InclusionShape ellipse(double a, double b, double angle = 0.0) {
        InclusionShape s;
        s.kind = InclusionKind::Ellipse;
        s.semi_major = a;
        s.semi_minor = b;
        s.angle = angle;
        return s;
    }

    double max_extent() const {
        return kind == InclusionKind::Disk ? radius : semi_major;
    }

    /// Boundary point at parameter t in [0, 2pi), counter-clockwise.
    Eigen::Vector2d point(double t) const {
        if (kind == InclusionKind::Disk)
            return {radius * std::cos(t), radius * std::sin(t)};
        const double c = std::cos(angle), s = std::sin(angle);
        const double x = semi_major * std::cos(t), y = semi_minor * std::sin(t);
        return {c * x - s * y, s * x + c * y};
    }

    void validate(double clearance = kDefaultClearance) const {
        if (kind == InclusionKind::Disk) {
            if (!(radius > 0.0)) throw std::invalid_argument("InclusionShape: radius must be positive");
        } else {
            if (!(semi_minor > 0.0) || !(semi_major >= semi_minor))
                throw std::invalid_argument("InclusionShape: requires semi_major >= semi_minor > 0");
        }
        if (!(max_extent() < 0.5 - clearance))
            throw ClearanceViolation("inclusion extends to within the clearance of the cell boundary");
    }
};

/// Closed simple polygon, vertices in counter-clockwise order (closure
/// implicit: last vertex connects back to the first).
struct Polygon2D {
    std::vector<Eigen::Vector2d> pts;

    int size() const { return static_cast<int>(pts.size()); }

    double signed_area() const {
        double a = 0.0;
        const int n = size();
        for (int i = 0; i < n; ++i) {
            const auto& p = pts[i];
            const auto& q = pts[(i + 1) % n];
            a += p.x() * q.y() - q.x() * p.y();
        }
        return 0.5 * a;
    }
    double area() const { return std::abs(signed_area()); }
    bool is_ccw() const { return signed_area() > 0.0; }

    double perimeter() const {
        double len = 0.0;
        const int n = size();
        for (int i = 0; i < n; ++i) len += (pts[(i + 1) % n] - pts[i]).norm();
        return len;
    }

    /// Even-odd ray cast; points on the boundary are classified arbitrarily.
    bool contains(const Eigen::Vector2d& p) const {
        bool inside = false;
        const int n = size();
        for (int i = 0, j = n - 1; i < n; j = i++) {
            const auto& a = pts[i];
            const auto& b = pts[j];
            if ((a.y() > p.y()) != (b.y() > p.y()) &&
                p.x() < (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x())
                inside = !inside;
        }
        return inside;
    }

    double distance(const Eigen::Vector2d& p) const {
        double d2 = std::numeric_limits<double>::max();
        const int n = size();
        for (int i = 0; i < n; ++i) {
            const auto& a = pts[i];
            const auto& b = pts[(i + 1) % n];
            const Eigen::Vector2d ab = b - a;
            const double t = std::clamp((p - a).dot(ab) / ab.squaredNorm(), 0.0, 1.0);
            d2 = std::min(d2, (p - (a + t * ab)).squaredNorm());
        }
        return std::sqrt(d2);
    }

    /// O(n^2) proper-intersection test between non-adjacent edges.
    bool is_simple() const {
        const int n = size();
        if (n < 3) return false;
        auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b) {
            return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
        };
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j) {
                // Skip adjacent edges (shared endpoint).
                if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
                const auto &a = pts[i], &b = pts[(i + 1) % n];
                const auto &c = pts[j], &d = pts[(j + 1) % n];
                const double d1 = cross(a, b, c), d2 = cross(a, b, d);
                const double d3 = cross(c, d, a), d4 = cross(c, d, b);
                if (((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0))) return false;
            }
        }
        return true;
    }

    double max_abs_coord() const {
        double m = 0.0;
        for (const auto& p : pts) m = std::max({m, std::abs(p.x()), std::abs(p.y())});
        return m;
    }
};

/// Inscribe an n_seg-gon in the analytic inclusion boundary. Vertices sit
/// exactly on the curve at uniformly spaced parameters.
inline Polygon2D build_inclusion_polygon(const InclusionShape& shape, int n_seg,
                                         double clearance = kDefaultClearance) {
    if (n_seg < 3) throw std::invalid_argument("build_inclusion_polygon: n_seg must be at least 3");
    shape.validate(clearance);
    Polygon2D poly;
    poly.pts.reserve(n_seg);
    for (int k = 0; k < n_seg; ++k)
        poly.pts.push_back(shape.point(2.0 * std::numbers::pi * k / n_seg));
    if (!(poly.max_abs_coord() < 0.5))
        throw ClearanceViolation("inclusion polygon touches the cell boundary");
    return poly;
}

/// Cell description: inclusion (optional; absent means an unobstructed cell),
/// boundary sampling, and mesh resolution.
struct CellSpec {
    std::optional<InclusionShape> shape = InclusionShape::disk(0.1);
    int n_seg = 64;
    double h = 0.08;
    int n_layers = 8;
    double clearance = kDefaultClearance;

    void validate() const {
        if (n_seg < 16) throw std::invalid_argument("CellSpec: n_seg must be at least 16");
        if (n_layers < 4) throw std::invalid_argument("CellSpec: n_layers must be at least 4");
        if (!(h > 0.0)) throw std::invalid_argument("CellSpec: h must be positive");
        if (shape) shape->validate(clearance);
    }
};

} // namespace cellflow
