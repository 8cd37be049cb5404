#pragma once

#include "evershell/errors.hpp"

namespace evershell {

// Reduced constitutive description of one bistable everted-shell unit, as
// consumed by the 2D granular module. Internal units (mm, N, s, tonne, mJ).
struct UnitModel {
    double intact_radius = 24.0;              // mm
    double collapsed_radius = 14.0;           // mm
    double contact_stiffness_intact = 5.0;    // N/mm
    double contact_stiffness_collapsed = 50.0;
    double critical_force = 3.0;              // N
    double snap_energy = 20.0;                // mJ released on collapse
    double collapse_time = 2e-4;              // s
    double mass = 1.8e-6;                     // tonne
    double depth = 8.0;                       // mm, out-of-plane extent

    void validate() const {
        if (!(collapsed_radius > 0.0) || !(collapsed_radius < intact_radius))
            throw UnitViolation("collapsed_radius must lie in (0, intact_radius)");
        if (!(critical_force > 0.0)) throw UnitViolation("critical_force must be positive");
        if (!(contact_stiffness_collapsed >= contact_stiffness_intact))
            throw UnitViolation("collapsed stiffness must be >= intact stiffness");
        if (!(contact_stiffness_intact > 0.0))
            throw UnitViolation("contact_stiffness_intact must be positive");
        if (!(mass > 0.0)) throw UnitViolation("mass must be positive");
        if (!(collapse_time > 0.0)) throw UnitViolation("collapse_time must be positive");
        if (!(depth > 0.0)) throw UnitViolation("depth must be positive");
    }
};

}  // namespace evershell
