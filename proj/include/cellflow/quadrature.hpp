#pragma once

// Degree-5 tetrahedral quadrature (14 points, positive weights) and the
// Taylor-Hood reference bases: quadratic (P2) velocity with vertex + edge
// midpoint nodes, linear (P1) pressure on vertices.
//
// Local node ordering on a tet (v0 v1 v2 v3):
//   nodes 0..3  : vertices,  phi_i = li (2 li - 1)
//   nodes 4..9  : edges (0,1)(0,2)(0,3)(1,2)(1,3)(2,3),  phi = 4 li lj

#include <array>
#include <cstdint>

#include <Eigen/Dense>

namespace cellflow {

inline constexpr std::array<std::array<int, 2>, 6> kTetEdges = {{
    {0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3},
}};

struct TetQuadrature {
    static constexpr int kNumPoints = 14;
    // Barycentric coordinates and weights (weights sum to one; multiply by
    // the tet volume when integrating).
    std::array<Eigen::Vector4d, kNumPoints> bary;
    std::array<double, kNumPoints> weight;
};

/// Keast 14-point rule, exact for polynomials of total degree <= 5.
inline const TetQuadrature& tet_quadrature() {
    static const TetQuadrature quad = [] {
        TetQuadrature q;
        int n = 0;
        auto orbit4 = [&](double a, double w) {
            const double b = 1.0 - 3.0 * a;
            for (int i = 0; i < 4; ++i) {
                Eigen::Vector4d l(a, a, a, a);
                l[i] = b;
                q.bary[n] = l;
                q.weight[n] = w;
                ++n;
            }
        };
        auto orbit6 = [&](double a, double w) {
            const double b = 0.5 - a;
            static constexpr int pairs[6][2] = {{0, 1}, {0, 2}, {0, 3},
                                                {1, 2}, {1, 3}, {2, 3}};
            for (const auto& p : pairs) {
                Eigen::Vector4d l(b, b, b, b);
                l[p[0]] = a;
                l[p[1]] = a;
                q.bary[n] = l;
                q.weight[n] = w;
                ++n;
            }
        };
        orbit4(0.0927352503108912264023239137370306, 0.0734930431163619493435869458636788);
        orbit4(0.3108859192633006097973457337634578, 0.1126879257180158507991856523332863);
        orbit6(0.0455037041256496494918805262793394, 0.0425460207770814664380694281202574);
        return q;
    }();
    return quad;
}

/// P2 shape function values at a barycentric point.
inline std::array<double, 10> p2_values(const Eigen::Vector4d& l) {
    std::array<double, 10> v;
    for (int i = 0; i < 4; ++i) v[i] = l[i] * (2.0 * l[i] - 1.0);
    for (int e = 0; e < 6; ++e)
        v[4 + e] = 4.0 * l[kTetEdges[e][0]] * l[kTetEdges[e][1]];
    return v;
}

/// P1 shape function values (the barycentrics themselves).
inline std::array<double, 4> p1_values(const Eigen::Vector4d& l) {
    return {l[0], l[1], l[2], l[3]};
}

/// Physical gradients of the barycentric coordinates on a tet; rows are
/// grad l_i. Throws nothing; callers check volume positivity separately.
inline Eigen::Matrix<double, 4, 3> barycentric_gradients(const Eigen::Vector3d& p0,
                                                         const Eigen::Vector3d& p1,
                                                         const Eigen::Vector3d& p2,
                                                         const Eigen::Vector3d& p3) {
    Eigen::Matrix3d M;
    M.col(0) = p1 - p0;
    M.col(1) = p2 - p0;
    M.col(2) = p3 - p0;
    const Eigen::Matrix3d Minv = M.inverse();
    Eigen::Matrix<double, 4, 3> g;
    g.row(1) = Minv.row(0);
    g.row(2) = Minv.row(1);
    g.row(3) = Minv.row(2);
    g.row(0) = -(g.row(1) + g.row(2) + g.row(3));
    return g;
}

/// P2 physical gradients at barycentric point l given grad l (4x3).
inline Eigen::Matrix<double, 10, 3> p2_gradients(const Eigen::Vector4d& l,
                                                 const Eigen::Matrix<double, 4, 3>& gl) {
    Eigen::Matrix<double, 10, 3> g;
    for (int i = 0; i < 4; ++i) g.row(i) = (4.0 * l[i] - 1.0) * gl.row(i);
    for (int e = 0; e < 6; ++e) {
        const int a = kTetEdges[e][0], b = kTetEdges[e][1];
        g.row(4 + e) = 4.0 * (l[a] * gl.row(b) + l[b] * gl.row(a));
    }
    return g;
}

} // namespace cellflow
