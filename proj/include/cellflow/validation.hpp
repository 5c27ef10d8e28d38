#pragma once

// Self-contained oracle suite: channel closed forms, rheology properties and
// the regime table, all cheap enough to run on every invocation. The CLI
// `validate` command reports each check and exits nonzero on failure.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "cellflow/channel_flow.hpp"
#include "cellflow/io.hpp"
#include "cellflow/rheology.hpp"

namespace cellflow {

struct ValidationCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ValidationOptions {
    // Fault injection for testing the harness itself: perturbs the power-law
    // prefactor comparison so the corresponding check must fail.
    bool inject_prefactor_fault = false;
};

inline std::vector<ValidationCheck> run_validation(const ValidationOptions& opts = {}) {
    std::vector<ValidationCheck> checks;
    auto check = [&](const std::string& name, bool ok, const std::string& detail = "") {
        checks.push_back({name, ok, detail});
    };
    auto rel_err = [](double a, double b) {
        return std::abs(a - b) / std::max(std::abs(b), 1e-300);
    };

    // Newtonian channel: quadrature-exact quadratic profile.
    {
        const double u = channel_flux(Newtonian{2.0}, 1.0);
        check("channel Newtonian flux = 1/(6 eta)", rel_err(u, 1.0 / 12.0) < 1e-12,
              "U=" + format_g9(u));
    }

    // Power-law channel against the closed form.
    {
        bool ok = true;
        std::string detail;
        for (double r : {2.3, 2.6, 3.0}) {
            for (double xi : {0.1, 1.0, 10.0}) {
                const double num = channel_flux(PowerLaw{1.0, r, 0.0}, xi);
                const double ref = channel_flux_closed_power(r, xi);
                if (rel_err(num, ref) > 1e-8) {
                    ok = false;
                    detail = "r=" + format_g9(r) + " xi=" + format_g9(xi);
                }
            }
        }
        check("channel power-law flux matches xi^(r'-1)/(2^(r'/2)(r'+1))", ok, detail);
    }
    check("channel power-law r=3 xi=1 flux = 0.237842",
          rel_err(channel_flux_closed_power(3.0, 1.0), 0.237842) < 1e-5, "");
    check("channel Carreau zero driving force", channel_flux(Carreau{1.0, 1e-3, 1.0, 1.7}, 0.0) == 0.0,
          "");

    // Carreau channel monotone in xi; independent of lambda at r = 2.
    {
        const Carreau law{1.0, 1e-3, 10.0, 1.7};
        bool increasing = true;
        double prev = 0.0;
        for (double xi : {0.05, 0.2, 0.5, 1.0, 2.0, 5.0}) {
            const double u = channel_flux(law, xi);
            if (u <= prev) increasing = false;
            prev = u;
        }
        check("channel Carreau flux strictly increasing in xi", increasing, "");
        const double u1 = channel_flux(Carreau{1.0, 1e-3, 1.0, 2.0}, 0.7);
        const double u2 = channel_flux(Carreau{1.0, 1e-3, 100.0, 2.0}, 0.7);
        check("channel Carreau flux lambda-independent at r=2", rel_err(u1, u2) < 1e-12, "");
    }

    // Carreau envelopes: between the eta0 and eta_inf Newtonian channels for
    // r < 2; below the eta0 channel for r > 2.
    {
        bool ok = true;
        for (double xi : {0.3, 1.0, 3.0}) {
            const double lo = channel_flux(Newtonian{1.0}, xi);
            const double hi = channel_flux(Newtonian{1e-3}, xi);
            const double thin = channel_flux(Carreau{1.0, 1e-3, 10.0, 1.7}, xi);
            const double thick = channel_flux(Carreau{1.0, 1e-3, 10.0, 2.6}, xi);
            if (!(thin >= lo && thin <= hi)) ok = false;
            if (!(thick <= lo)) ok = false;
        }
        check("channel Carreau flux bounded by Newtonian envelopes", ok, "");
    }

    // Viscosity bounds on a logarithmic shear grid.
    {
        bool ok = true;
        for (double r : {1.3, 1.7}) {
            const Carreau law{1.0, 1e-3, 5.0, r};
            for (int k = -8; k <= 6; ++k) {
                const double d = std::pow(10.0, k);
                const double eta = viscosity(ViscosityLaw{law}, d);
                if (!(eta <= law.eta0 + 1e-15 && eta >= law.eta_inf - 1e-15)) ok = false;
            }
        }
        for (double r : {2.3, 3.0}) {
            const Carreau law{1.0, 1e-3, 5.0, r};
            for (int k = -8; k <= 6; ++k) {
                const double d = std::pow(10.0, k);
                if (!(viscosity(ViscosityLaw{law}, d) >= law.eta0 - 1e-15)) ok = false;
            }
        }
        check("Carreau viscosity bounds (eta_inf..eta0 / >= eta0)", ok, "");
    }

    // Monotone stress s -> eta(s/sqrt(2)) s on (0, 1e4].
    {
        bool ok = true;
        for (double r : {1.3, 1.7, 2.0, 2.3, 2.6, 3.0}) {
            for (double lambda : {1e-3, 1.0, 100.0}) {
                const ViscosityLaw law = Carreau{1.0, 1e-3, lambda, r};
                double prev = 0.0;
                for (int k = 0; k <= 80; ++k) {
                    const double s = std::pow(10.0, -4.0 + 8.0 * k / 80.0);
                    const double stress = viscosity(law, s / std::sqrt(2.0)) * s;
                    if (!(stress > prev)) ok = false;
                    prev = stress;
                }
            }
        }
        check("Carreau stress strictly monotone on (0, 1e4]", ok, "");
    }

    // Newtonian continuity as lambda d^2 -> 0.
    {
        const double d = 1e-4; // lambda d^2 = 1e-8 at lambda = 1
        const double eta = viscosity(ViscosityLaw{Carreau{1.0, 1e-3, 1.0, 1.7}}, d);
        check("Carreau -> eta0 continuity at lambda d^2 = 1e-8", std::abs(eta - 1.0) < 1e-6,
              "eta=" + format_g9(eta));
    }

    check("conjugate exponent r=2 -> 2", conjugate_exponent(2.0) == 2.0, "");
    check("conjugate exponent r=3 -> 1.5", conjugate_exponent(3.0) == 1.5, "");
    check("conjugate exponent r=2.6 -> 1.625", std::abs(conjugate_exponent(2.6) - 1.625) < 1e-15,
          "");

    // The nine regime table cells.
    {
        const Carreau thin{1.0, 1e-3, 1.0, 1.7};
        const Carreau newt{1.0, 1e-3, 1.0, 2.0};
        const Carreau thick{1.0, 1e-3, 1.0, 2.3};
        auto is_lin = [](const EffectiveLawKind& k, double eta) {
            const auto* l = std::get_if<LinearDarcy>(&k);
            return l && l->eta == eta;
        };
        bool ok = true;
        ok = ok && is_lin(regime_select(thin, 0.5), thin.eta0);
        ok = ok && is_lin(regime_select(newt, 0.5), newt.eta0);
        ok = ok && is_lin(regime_select(thick, 0.5), thick.eta0);
        ok = ok && std::holds_alternative<CarreauDarcy>(regime_select(thin, 1.0));
        ok = ok && is_lin(regime_select(newt, 1.0), newt.eta0);
        ok = ok && std::holds_alternative<CarreauDarcy>(regime_select(thick, 1.0));
        ok = ok && is_lin(regime_select(thin, 2.0), thin.eta_inf);
        ok = ok && is_lin(regime_select(newt, 2.0), newt.eta0);
        ok = ok && std::holds_alternative<PowerDarcy>(regime_select(thick, 2.0));
        check("regime table (9 cells)", ok, "");

        // Piecewise constant in gamma with the only breakpoint at gamma = 1.
        bool pc = true;
        for (double g : {-3.0, -1.0, 0.0, 0.5, 0.99}) {
            if (!is_lin(regime_select(thick, g), thick.eta0)) pc = false;
        }
        for (double g : {1.01, 1.5, 4.0, 50.0}) {
            if (!std::holds_alternative<PowerDarcy>(regime_select(thick, g))) pc = false;
        }
        for (double g : {-2.0, 0.3, 1.0, 1.7, 9.0}) {
            if (!is_lin(regime_select(newt, g), newt.eta0)) pc = false;
        }
        check("regime piecewise constant in gamma (breakpoint only at 1)", pc, "");
    }

    // Theorem prefactor spot value: r=2.3, lambda=1, eta0-eta_inf=0.999.
    {
        const double pf = power_law_prefactor(Carreau{1.0, 1e-3, 1.0, 2.3});
        const double expected =
            std::pow(0.999, -(conjugate_exponent(2.3) - 1.0)) * (opts.inject_prefactor_fault ? 1.01 : 1.0);
        check("power-law prefactor r=2.3 lambda=1 = 0.999^(-(r'-1))",
              std::abs(pf - expected) < 1e-12 && std::abs(pf - 1.00077) < 1e-4,
              "prefactor=" + format_g9(pf));
    }

    // Regularization insensitivity of the power channel.
    {
        const double a = channel_flux(PowerLaw{1.0, 3.0, 1e-4}, 1.0);
        const double b = channel_flux(PowerLaw{1.0, 3.0, 1e-8}, 1.0);
        check("power channel flux delta_reg 1e-4 vs 1e-8 within 0.5%", rel_err(a, b) < 5e-3,
              "diff=" + format_g9(rel_err(a, b)));
    }

    return checks;
}

} // namespace cellflow
