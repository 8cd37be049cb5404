#pragma once

#include "evershell/mesh.hpp"

namespace evershell::fixtures {

// Closed unit-speed lat/long sphere of radius R: n_lat interior rings plus
// two pole fans. Zero boundary loops.
ShellMesh build_sphere(double radius, double thickness, int n_lat, int n_lon);

// Flat rectangular plate in the x-y plane, structured grid with
// alternating diagonals, nx-by-ny vertices spanning lx-by-ly.
ShellMesh build_plate(double lx, double ly, double thickness, int nx, int ny);

// Open hemispherical cap of radius R (equator boundary ring at z = 0).
ShellMesh build_hemisphere(double radius, double thickness, int n_lat, int n_lon);

// Plate configuration rolled onto a cylinder of radius rho about the x axis.
Configuration roll_plate_to_cylinder(const ShellMesh& plate, double rho);

}  // namespace evershell::fixtures
