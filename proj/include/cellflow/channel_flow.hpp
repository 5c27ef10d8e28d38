#pragma once

// Reference solutions for unidirectional flow in the obstacle-free cell, a
// plane channel of unit height with no-slip walls. For a velocity profile
// w(z) e_1 driven by a constant force xi e_1, the momentum balance of
// -div(eta(|D|) D[w]) + grad pi = xi e_1 reduces to the scalar stress balance
//
//     eta(s / sqrt(2)) * s / 2 = xi * (1/2 - z),   s = w'(z),
//
// using |D|^2 = (w')^2 / 2. The shear is recovered pointwise by safeguarded
// root finding and integrated twice; these values back-stop the 3D solver.

#include <cmath>
#include <vector>

#include "cellflow/errors.hpp"
#include "cellflow/rheology.hpp"

namespace cellflow {

namespace channel_detail {

// 5-point Gauss-Legendre rule on [-1, 1].
inline constexpr double kGaussX[5] = {
    -0.9061798459386639928, -0.5384693101056830910, 0.0,
    0.5384693101056830910, 0.9061798459386639928};
inline constexpr double kGaussW[5] = {
    0.2369268850561890875, 0.4786286704993664680, 0.5688888888888888889,
    0.4786286704993664680, 0.2369268850561890875};

inline constexpr int kPanels = 64;

/// Shear stress sigma(s) = eta(s/sqrt(2)) * s / 2 for s >= 0.
inline double shear_stress(const ViscosityLaw& law, double s) {
    return 0.5 * viscosity(law, s / std::sqrt(2.0)) * s;
}

/// d sigma / d s, analytic per law; positive for admissible laws at s > 0.
inline double shear_stress_derivative(const ViscosityLaw& law, double s) {
    struct Eval {
        double s;
        double operator()(const Newtonian& l) const { return 0.5 * l.eta; }
        double operator()(const Carreau& l) const {
            const double d = s / std::sqrt(2.0);
            const double base = 1.0 + l.lambda * d * d;
            const double eta =
                (l.eta0 - l.eta_inf) * std::pow(base, 0.5 * l.r - 1.0) + l.eta_inf;
            const double deta =
                (l.eta0 - l.eta_inf) * (l.r - 2.0) * l.lambda * d * std::pow(base, 0.5 * l.r - 2.0);
            return 0.5 * eta + 0.5 * s * deta / std::sqrt(2.0);
        }
        double operator()(const PowerLaw& l) const {
            const double d = s / std::sqrt(2.0);
            const double s2 = l.delta_reg * l.delta_reg + d * d;
            const double eta = l.mu * std::pow(s2, 0.5 * (l.r - 2.0));
            const double deta = l.mu * (l.r - 2.0) * d * std::pow(s2, 0.5 * l.r - 2.0);
            return 0.5 * eta + 0.5 * s * deta / std::sqrt(2.0);
        }
    };
    return std::visit(Eval{s}, law);
}

/// Solve sigma(s) = tau for s >= 0 (tau >= 0): bisection bracket with
/// geometric growth, Newton steps clipped to the bracket, residual tolerance
/// 1e-12 relative to tau.
inline double solve_shear(const ViscosityLaw& law, double tau) {
    if (tau <= 0.0) return 0.0;
    const double tol = 1e-12 * tau;

    double hi = 1.0;
    while (shear_stress(law, hi) < tau) {
        hi *= 10.0;
        if (hi > 1e30)
            throw RootBracketFailure("solve_shear: shear bracket exceeded 1e30");
    }
    // Newtonian-style initial guess where the zero-shear viscosity is
    // finite; plain midpoint otherwise. Guesses far below hi*1e-9 are
    // avoided: squaring the shear there can underflow the stress evaluation.
    double lo = 0.0;
    double s = 0.5 * hi;
    const double eta_rest = viscosity(law, 0.0);
    if (std::isfinite(eta_rest) && eta_rest > 0.0)
        s = std::min(hi, std::max(2.0 * tau / eta_rest, 1e-9 * hi));

    for (int it = 0; it < 200; ++it) {
        const double f = shear_stress(law, s) - tau;
        if (std::abs(f) <= tol) return s;
        if (f > 0.0) hi = s; else lo = s;
        const double df = shear_stress_derivative(law, s);
        double next = (df > 0.0 && std::isfinite(df)) ? s - f / df : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        s = next;
    }
    return s;
}

} // namespace channel_detail

/// Sampled profile of the channel solution: shear w'(z), velocity w(z), and
/// the flux U = int_0^1 w dz.
struct ChannelProfile {
    std::vector<double> z;
    std::vector<double> w;
    std::vector<double> dw;
    double flux = 0.0;
};

/// Flux U = int_0^1 w(z) dz of the channel profile driven by xi >= 0,
/// computed as int_0^1 (1 - z) w'(z) dz on a composite 5-point Gauss grid.
inline double channel_flux(const ViscosityLaw& law, double xi) {
    validate(law);
    if (xi == 0.0) return 0.0;
    using namespace channel_detail;
    double flux = 0.0;
    const double hp = 1.0 / kPanels;
    for (int p = 0; p < kPanels; ++p) {
        const double z0 = p * hp;
        for (int g = 0; g < 5; ++g) {
            const double z = z0 + 0.5 * hp * (1.0 + kGaussX[g]);
            const double tau = xi * (0.5 - z);
            const double s = (tau >= 0.0) ? solve_shear(law, tau) : -solve_shear(law, -tau);
            flux += 0.5 * hp * kGaussW[g] * (1.0 - z) * s;
        }
    }
    return flux;
}

/// Full profile on a uniform grid of `samples` points (w by cumulative
/// quadrature of the shear between grid points).
inline ChannelProfile channel_profile(const ViscosityLaw& law, double xi, int samples = 129) {
    validate(law);
    using namespace channel_detail;
    ChannelProfile prof;
    prof.z.resize(samples);
    prof.w.resize(samples);
    prof.dw.resize(samples);
    const double h = 1.0 / (samples - 1);
    auto shear_at = [&](double z) {
        const double tau = xi * (0.5 - z);
        return (tau >= 0.0) ? solve_shear(law, tau) : -solve_shear(law, -tau);
    };
    double w = 0.0;
    for (int i = 0; i < samples; ++i) {
        const double z = i * h;
        prof.z[i] = z;
        prof.dw[i] = shear_at(z);
        if (i > 0) {
            double dw_int = 0.0;
            for (int g = 0; g < 5; ++g) {
                const double zg = (i - 1) * h + 0.5 * h * (1.0 + kGaussX[g]);
                dw_int += 0.5 * h * kGaussW[g] * shear_at(zg);
            }
            w += dw_int;
        }
        prof.w[i] = w;
    }
    prof.flux = channel_flux(law, xi);
    return prof;
}

/// Closed-form channel flux for the pure power law with mu = 1:
/// U = xi^(r'-1) / (2^(r'/2) (r'+1)).
inline double channel_flux_closed_power(double r, double xi) {
    const double rp = conjugate_exponent(r);
    if (xi == 0.0) return 0.0;
    return std::pow(xi, rp - 1.0) / (std::pow(2.0, 0.5 * rp) * (rp + 1.0));
}

} // namespace cellflow
