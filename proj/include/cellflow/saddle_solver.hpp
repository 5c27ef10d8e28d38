#pragma once

// Solution of the saddle system
//   A u + B^t p = rhs,   B u = 0,   m . p = 0
// by the pressure Schur complement: A is factored directly (CHOLMOD
// supernodal Cholesky; Eigen simplicial fallback), and S = B A^-1 B^t is
// solved by conjugate gradients preconditioned with the pressure mass matrix
// weighted by 1/viscosity. S has the constant-pressure kernel; the rhs is
// consistent and the zero-mean gauge m . p = 0 is enforced by projection.
// The CG residual equals the divergence residual B u of the returned
// velocity, so the stopping test bounds it directly.

#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#ifdef CELLFLOW_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif

#include "cellflow/assembly.hpp"
#include "cellflow/errors.hpp"

namespace cellflow {

struct SolveDiagnostics {
    int iterations = 0;        // nonlinear iterations (1 for a linear solve)
    double residual = 0.0;     // relative KKT residual of the last solve
    double divergence_norm = 0.0;
    double pressure_mean = 0.0;
    std::vector<PicardStep> history;
};

struct StokesSolution {
    Eigen::VectorXd velocity; // reduced free dofs, 3 per free node
    Eigen::VectorXd pressure; // reduced pressure dofs
    SolveDiagnostics diag;
};

class SaddleSolver {
public:
    struct Result {
        Eigen::VectorXd u;
        Eigen::VectorXd p;
        double residual = 0.0;       // relative residual of the full system
        double divergence_norm = 0.0;
        int cg_iterations = 0;
    };

    /// Factor the velocity block and the pressure preconditioner. The A
    /// pattern must not change between calls; the first call pays the
    /// symbolic analysis.
    void factorize(const SaddleSystem& sys, const Eigen::SparseMatrix<double>& pressure_mass) {
        if (!analyzed_) {
            a_solver_.analyzePattern(sys.A);
            analyzed_ = true;
        }
        a_solver_.factorize(sys.A);
        if (a_solver_.info() != Eigen::Success)
            throw SolverBreakdown("velocity block factorization failed (not SPD?)");
        mass_solver_.compute(pressure_mass);
        if (mass_solver_.info() != Eigen::Success)
            throw SolverBreakdown("pressure mass factorization failed");
    }

    /// Factor with the lumped fallback preconditioner diag(m).
    void factorize(const SaddleSystem& sys) {
        Eigen::SparseMatrix<double> lumped(sys.m.size(), sys.m.size());
        std::vector<Eigen::Triplet<double>> trips;
        for (int k = 0; k < sys.m.size(); ++k) trips.emplace_back(k, k, sys.m[k]);
        lumped.setFromTriplets(trips.begin(), trips.end());
        factorize(sys, lumped);
    }

    Result solve(const SaddleSystem& sys, double tol, int max_cg = 1000) const {
        const double scale = std::max(sys.rhs.norm(), 1e-300);
        const Eigen::VectorXd Ainv_f = a_solver_.solve(sys.rhs);
        const Eigen::VectorXd b = sys.B * Ainv_f;

        // PCG on S p = b, S = B A^-1 B^t (SPSD, kernel = constants).
        Eigen::VectorXd p = Eigen::VectorXd::Zero(b.size());
        if (warm_p_.size() == b.size()) p = warm_p_;
        auto apply_S = [&](const Eigen::VectorXd& q) {
            const Eigen::VectorXd Btq = sys.B.transpose() * q;
            const Eigen::VectorXd w = a_solver_.solve(Btq);
            return Eigen::VectorXd(sys.B * w);
        };
        Eigen::VectorXd r = b - apply_S(p);
        Eigen::VectorXd z = mass_solver_.solve(r);
        Eigen::VectorXd d = z;
        double rz = r.dot(z);
        int it = 0;
        std::vector<double> res_history;
        const double target = tol * scale;
        while (r.norm() > target && it < max_cg) {
            const Eigen::VectorXd Sd = apply_S(d);
            const double dSd = d.dot(Sd);
            if (!(dSd > 0.0))
                throw SolverBreakdown("Schur CG breakdown (operator not positive)", res_history);
            const double alpha = rz / dSd;
            p += alpha * d;
            r -= alpha * Sd;
            z = mass_solver_.solve(r);
            const double rz_new = r.dot(z);
            d = z + (rz_new / rz) * d;
            rz = rz_new;
            res_history.push_back(r.norm());
            ++it;
        }
        if (r.norm() > target)
            throw SolverBreakdown("Schur CG did not reach the requested tolerance", res_history);
        warm_p_ = p;

        // Zero-mean gauge.
        p -= (sys.m.dot(p) / sys.m.sum()) * Eigen::VectorXd::Ones(p.size());

        Result out;
        const Eigen::VectorXd rhs_mom = sys.rhs - sys.B.transpose() * p;
        out.u = a_solver_.solve(rhs_mom);
        out.p = p;
        out.cg_iterations = it;
        out.divergence_norm = (sys.B * out.u).norm();
        const double mom_res = (sys.A * out.u + sys.B.transpose() * p - sys.rhs).norm();
        out.residual =
            std::sqrt(mom_res * mom_res + out.divergence_norm * out.divergence_norm) / scale;
        return out;
    }

    void reset_warm_start() const { warm_p_.resize(0); }

private:
#ifdef CELLFLOW_HAVE_CHOLMOD
    Eigen::CholmodSupernodalLLT<Eigen::SparseMatrix<double>> a_solver_;
#else
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> a_solver_;
#endif
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> mass_solver_;
    bool analyzed_ = false;
    mutable Eigen::VectorXd warm_p_;
};

/// Spec-level one-shot solve. Diagnostics carry the relative residual of the
/// full system, the discrete divergence norm |B u| and the pressure mean.
inline StokesSolution solve_saddle(const SaddleSystem& sys, double tol = 1e-10) {
    SaddleSolver solver;
    solver.factorize(sys);
    const auto r = solver.solve(sys, tol);
    StokesSolution sol;
    sol.velocity = r.u;
    sol.pressure = r.p;
    sol.diag.iterations = 1;
    sol.diag.residual = r.residual;
    sol.diag.divergence_norm = r.divergence_norm;
    const double vol = sys.m.sum();
    sol.diag.pressure_mean = std::abs(sys.m.dot(r.p)) / (vol > 0.0 ? vol : 1.0);
    return sol;
}

/// The assembled blocks as one bordered KKT matrix (for export and tests).
inline Eigen::SparseMatrix<double> compose_kkt(const SaddleSystem& sys) {
    const int nu = static_cast<int>(sys.rhs.size());
    const int np = static_cast<int>(sys.m.size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(sys.A.nonZeros() + 2 * sys.B.nonZeros() + 2 * np);
    for (int col = 0; col < sys.A.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.A, col); it; ++it)
            trips.emplace_back(static_cast<int>(it.row()), col, it.value());
    for (int col = 0; col < sys.B.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sys.B, col); it; ++it) {
            trips.emplace_back(nu + static_cast<int>(it.row()), col, it.value());
            trips.emplace_back(col, nu + static_cast<int>(it.row()), it.value());
        }
    for (int k = 0; k < np; ++k) {
        trips.emplace_back(nu + k, nu + np, sys.m[k]);
        trips.emplace_back(nu + np, nu + k, sys.m[k]);
    }
    Eigen::SparseMatrix<double> K(nu + np + 1, nu + np + 1);
    K.setFromTriplets(trips.begin(), trips.end());
    K.makeCompressed();
    return K;
}

/// MatrixMarket coordinate output.
inline void write_matrix_market(const Eigen::SparseMatrix<double>& M, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_matrix_market: cannot open " + path);
    out << "%%MatrixMarket matrix coordinate real general\n";
    out.precision(17);
    out << M.rows() << " " << M.cols() << " " << M.nonZeros() << "\n";
    for (int col = 0; col < M.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(M, col); it; ++it)
            out << it.row() + 1 << " " << col + 1 << " " << it.value() << "\n";
}

} // namespace cellflow
