#pragma once

// Constitutive viscosity laws and the (r, gamma) classification of the
// effective Darcy regime. All shear-rate arguments are Frobenius norms of the
// symmetric velocity gradient, |D|^2 = Tr(D D^t).

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>

#include "cellflow/errors.hpp"

namespace cellflow {

struct Newtonian {
    double eta = 1.0;
};

/// Carreau model: eta(d) = (eta0 - eta_inf) (1 + lambda d^2)^(r/2 - 1) + eta_inf.
struct Carreau {
    double eta0 = 1.0;
    double eta_inf = 1e-3;
    double lambda = 1.0;
    double r = 2.0;
};

/// Ostwald-de Waele model with a shear-rate floor:
/// eta(d) = mu (delta_reg^2 + d^2)^((r-2)/2).
struct PowerLaw {
    double mu = 1.0;
    double r = 2.0;
    double delta_reg = 1e-6;
};

using ViscosityLaw = std::variant<Newtonian, Carreau, PowerLaw>;

inline void validate(const Newtonian& law) {
    if (!(law.eta > 0.0)) throw std::invalid_argument("Newtonian: eta must be positive");
}

inline void validate(const Carreau& law) {
    if (!(law.eta0 > law.eta_inf) || !(law.eta_inf > 0.0))
        throw std::invalid_argument("Carreau: requires eta0 > eta_inf > 0");
    if (!(law.lambda > 0.0)) throw std::invalid_argument("Carreau: lambda must be positive");
    if (!(law.r > 1.0)) throw std::invalid_argument("Carreau: flow index r must exceed 1");
}

inline void validate(const PowerLaw& law) {
    if (!(law.mu > 0.0)) throw std::invalid_argument("PowerLaw: mu must be positive");
    if (!(law.r > 1.0)) throw std::invalid_argument("PowerLaw: flow index r must exceed 1");
    if (law.delta_reg < 0.0) throw std::invalid_argument("PowerLaw: delta_reg must be nonnegative");
}

inline void validate(const ViscosityLaw& law) {
    std::visit([](const auto& l) { validate(l); }, law);
}

/// Viscosity at shear-rate norm d = |D[u]| >= 0.
inline double viscosity(const ViscosityLaw& law, double d) {
    struct Eval {
        double d;
        double operator()(const Newtonian& l) const { return l.eta; }
        double operator()(const Carreau& l) const {
            return (l.eta0 - l.eta_inf) * std::pow(1.0 + l.lambda * d * d, 0.5 * l.r - 1.0) +
                   l.eta_inf;
        }
        double operator()(const PowerLaw& l) const {
            const double s2 = l.delta_reg * l.delta_reg + d * d;
            return l.mu * std::pow(s2, 0.5 * (l.r - 2.0));
        }
    };
    return std::visit(Eval{d}, law);
}

/// r' = r/(r-1), so that 1/r + 1/r' = 1.
inline double conjugate_exponent(double r) {
    if (!(r > 1.0)) throw std::invalid_argument("conjugate_exponent: r must exceed 1");
    return r / (r - 1.0);
}

// ---------------------------------------------------------------------------
// Effective regime classification
// ---------------------------------------------------------------------------

struct LinearDarcy {
    double eta = 1.0; // constant viscosity entering V' = (1/eta) A (f' - grad p)
};
struct CarreauDarcy {};
struct PowerDarcy {
    double prefactor = 1.0; // 1 / (lambda^((2-r')/2) (eta0 - eta_inf)^(r'-1))
};

using EffectiveLawKind = std::variant<LinearDarcy, CarreauDarcy, PowerDarcy>;

/// Scalar multiplier of the power-law permeability operator in the dilatant
/// high-gamma regime. The cell problem itself uses mu = 1; all physical
/// constants sit here.
inline double power_law_prefactor(const Carreau& fluid) {
    validate(fluid);
    const double rp = conjugate_exponent(fluid.r);
    return 1.0 / (std::pow(fluid.lambda, 0.5 * (2.0 - rp)) *
                  std::pow(fluid.eta0 - fluid.eta_inf, rp - 1.0));
}

/// Map (r, gamma) to the effective law family. Total on r > 1.
inline EffectiveLawKind regime_select(const Carreau& fluid, double gamma) {
    validate(fluid);
    const double r = fluid.r;
    if (gamma < 1.0) return LinearDarcy{fluid.eta0};
    if (gamma == 1.0) {
        if (r == 2.0) return LinearDarcy{fluid.eta0};
        return CarreauDarcy{};
    }
    // gamma > 1
    if (r < 2.0) return LinearDarcy{fluid.eta_inf};
    if (r == 2.0) return LinearDarcy{fluid.eta0};
    return PowerDarcy{power_law_prefactor(fluid)};
}

/// Human-readable regime label; the fluid supplies the eta0/eta_inf naming.
inline std::string regime_name(const EffectiveLawKind& kind, const Carreau& fluid) {
    struct Name {
        const Carreau& fluid;
        std::string operator()(const LinearDarcy& l) const {
            const char* sym = (l.eta == fluid.eta_inf) ? "eta_inf" : "eta0";
            return std::string("Linear 2D Darcy's law (viscosity ") + sym + ")";
        }
        std::string operator()(const CarreauDarcy&) const {
            return "Non-linear 2D Darcy's law (Carreau type)";
        }
        std::string operator()(const PowerDarcy&) const {
            return "Non-linear 2D Darcy's law (power law type)";
        }
    };
    return std::visit(Name{fluid}, kind);
}

} // namespace cellflow
