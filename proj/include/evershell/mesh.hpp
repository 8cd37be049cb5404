#pragma once

#include <array>
#include <vector>

#include <Eigen/Dense>

#include "evershell/geometry.hpp"

namespace evershell {

// Current vertex positions, one column per mesh vertex (mm).
struct Configuration {
    Eigen::Matrix3Xd positions;
};

struct MeshEdge {
    int v0 = -1, v1 = -1;
    double rest_length = 0.0;
};

// Interior edge with its bending stencil. Triangle A carries the directed
// edge v0->v1 and opposite vertex v2; triangle B carries v1->v0 and v3.
// height_bar is one third of the summed rest heights of the two triangles.
struct Hinge {
    int v0 = -1, v1 = -1, v2 = -1, v3 = -1;
    double rest_length = 0.0;
    double height_bar = 0.0;
    double rest_dihedral = 0.0;
};

// Discretized mid-surface with rest elastic data. Eversion keeps the rest
// metric (edge lengths, triangle frames) and negates the rest dihedrals.
struct ShellMesh {
    ShellGeometry geom;
    int n_s = 0, n_theta = 0;
    bool closed = false;

    Eigen::Matrix3Xd vertices;                 // reference positions
    std::vector<std::array<int, 3>> triangles; // consistent winding
    std::vector<MeshEdge> edges;
    std::vector<Hinge> hinges;

    // Per-triangle rest data: inverse of the 2x2 rest edge matrix expressed
    // in an in-plane frame whose first axis tracks the hoop direction, and
    // the rest area. The frame makes PK2 components directly (theta, s).
    std::vector<Eigen::Matrix2d> rest_shape_inv;
    std::vector<double> rest_area;

    std::vector<std::vector<int>> boundary_loops; // ordered surface-direction loops
    std::vector<double> alpha;                    // generator angle per ring (torus meshes)

    bool eversion_applied = false;
    double volume_sign = 1.0;

    int vertex_count() const { return static_cast<int>(vertices.cols()); }
    int vid(int i, int j) const { return i * n_theta + j; }
    double total_rest_area() const;
    double mean_rest_area() const;
};

// Builds the surface of revolution r(a) = r2 + r1*cos(a), z(a) = r1*sin(a),
// a in [-arc/2, +arc/2], with n_s generator rings of n_theta vertices and
// alternating quad diagonals.
ShellMesh build_reference_shell(const ShellGeometry& geom, const MaterialParams& mat,
                                int n_s, int n_theta);

// Generic construction from an arbitrary triangulated surface (used by the
// torus builder and by test fixtures). hoop_hint gives the preferred first
// axis of each triangle's rest frame; pass an empty matrix to use the first
// edge direction.
ShellMesh build_mesh_from_triangles(Eigen::Matrix3Xd vertices,
                                    std::vector<std::array<int, 3>> triangles,
                                    double thickness,
                                    const Eigen::Matrix3Xd& hoop_hint = {});

// Returns a copy with negated rest dihedrals and eversion_applied set.
ShellMesh evert(const ShellMesh& mesh);

// Replaces the rest data by what the given configuration realizes: the
// result is a stress-free shell of that shape (used for the non-everted
// comparison twin).
ShellMesh rebuild_rest_from(const ShellMesh& mesh, const Configuration& config);

Configuration reference_configuration(const ShellMesh& mesh);

// Signed dihedral angle across the hinge, in (-pi, pi).
double dihedral_angle(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                      const Eigen::Vector3d& p2, const Eigen::Vector3d& p3);

}  // namespace evershell
