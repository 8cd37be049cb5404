#pragma once

#include <cmath>

#include "evershell/errors.hpp"

namespace evershell {

// Internal unit system: mm / N / s (mass in tonnes, stress in MPa, energy
// in mJ = N*mm). File and report boundaries use Pa, kg and J; the
// conversion factors live here so they appear exactly once.
namespace units {
inline constexpr double pa_to_mpa = 1e-6;
inline constexpr double mpa_to_pa = 1e6;
inline constexpr double kg_per_m3_to_tonne_per_mm3 = 1e-12;
inline constexpr double tonne_per_mm3_to_kg_per_m3 = 1e12;
inline constexpr double kg_to_tonne = 1e-3;
inline constexpr double tonne_to_kg = 1e3;
inline constexpr double mj_to_j = 1e-3;   // N*mm -> J
inline constexpr double gravity = 9810.0; // mm/s^2
}  // namespace units

// Design inputs of the axisymmetric shell: an arc-shaped generator of
// radius r1, swept around the axis at equatorial radius r2, wall
// thickness h. arc_angle = pi is the semicircular generator.
struct ShellGeometry {
    double r1 = 4.0;        // generator arc radius, mm
    double r2 = 20.0;       // equatorial radius, mm
    double h = 0.5;         // thickness, mm
    double arc_angle = M_PI;

    void validate() const {
        if (!(r1 > 0.0)) throw InvalidGeometry("r1 must be positive");
        if (!(r2 > r1))
            throw InvalidGeometry("r2 must exceed r1 (generator would reach the axis)");
        if (!(h > 0.0)) throw InvalidGeometry("h must be positive");
        if (!(h < r1)) throw InvalidGeometry("h must be below r1 (thin-shell regime)");
        if (!(arc_angle > 0.0) || arc_angle > 2.0 * M_PI + 1e-12)
            throw InvalidGeometry("arc_angle must lie in (0, 2*pi]");
    }

    bool closed() const { return std::abs(arc_angle - 2.0 * M_PI) < 1e-12; }
    double outer_radius() const { return r2 + r1; }
};

// Dimensionless stability parameter (h/r2)*(r2/r1)^2.
inline double compute_eta(const ShellGeometry& g) {
    g.validate();
    return (g.h / g.r2) * (g.r2 / g.r1) * (g.r2 / g.r1);
}

struct MaterialParams {
    double young_modulus = 25.0;          // MPa (N/mm^2)
    double poisson_ratio = 0.49;          // strictly below 0.5
    double density = 1.1e-9;              // tonne/mm^3 (1100 kg/m^3)
    double rayleigh_mass_damping = 0.0;   // 1/s, for dynamic runs

    static MaterialParams from_si(double young_pa, double nu, double rho_kg_m3,
                                  double damping = 0.0) {
        MaterialParams m;
        m.young_modulus = young_pa * units::pa_to_mpa;
        m.poisson_ratio = nu;
        m.density = rho_kg_m3 * units::kg_per_m3_to_tonne_per_mm3;
        m.rayleigh_mass_damping = damping;
        m.validate();
        return m;
    }

    void validate() const {
        if (!(young_modulus > 0.0)) throw UnitViolation("young_modulus must be positive");
        if (!(poisson_ratio >= 0.0) || !(poisson_ratio < 0.5))
            throw UnitViolation("poisson_ratio must lie in [0, 0.5)");
        if (!(density > 0.0)) throw UnitViolation("density must be positive");
        if (!(rayleigh_mass_damping >= 0.0))
            throw UnitViolation("rayleigh_mass_damping must be non-negative");
    }
};

}  // namespace evershell
