#pragma once

#include <Eigen/Dense>

#include "evershell/mesh.hpp"

namespace evershell {

namespace defaults {
// Hinge-bending prefactor, fixed once by the plate-to-cylinder calibration
// test at fine resolution on the structured alternating-diagonal grid.
inline constexpr double c_hinge = 0.3352;
}  // namespace defaults

struct EnergyBreakdown {
    double membrane = 0.0;  // mJ (N*mm)
    double bending = 0.0;
    double total = 0.0;
};

// Plane-stress St. Venant-Kirchhoff membrane plus discrete hinge bending.
EnergyBreakdown elastic_energy(const ShellMesh& mesh, const MaterialParams& mat,
                               const Configuration& config);

// Per-vertex elastic force field, i.e. the negative energy gradient.
Eigen::Matrix3Xd elastic_forces(const ShellMesh& mesh, const MaterialParams& mat,
                                const Configuration& config);

// Fused evaluation; `forces` is resized and overwritten.
EnergyBreakdown elastic_energy_and_forces(const ShellMesh& mesh, const MaterialParams& mat,
                                          const Configuration& config,
                                          Eigen::Matrix3Xd& forces);

// Signed enclosed volume (divergence theorem), open boundary rings closed
// by fans to their centroids; positive for the reference shell.
double enclosed_volume(const ShellMesh& mesh, const Configuration& config);

// Per-triangle membrane PK2 stress in the rest frame (first axis = hoop).
Eigen::Matrix2d membrane_pk2(const ShellMesh& mesh, const MaterialParams& mat,
                             const Configuration& config, int triangle);

// Per-vertex lumped rest area (one third of adjacent triangle areas).
Eigen::VectorXd lumped_vertex_areas(const ShellMesh& mesh);

}  // namespace evershell
