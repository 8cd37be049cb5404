#include "evershell/elastic.hpp"

#include <cmath>

namespace evershell {

namespace {

void check_dimensions(const ShellMesh& mesh, const Configuration& config) {
    if (config.positions.cols() != mesh.vertices.cols())
        throw DimensionMismatch("configuration has " + std::to_string(config.positions.cols()) +
                                " vertices, mesh has " + std::to_string(mesh.vertices.cols()));
    if (!config.positions.allFinite())
        throw DegenerateElement("non-finite coordinates in configuration");
}

struct MembraneScratch {
    Eigen::Matrix<double, 3, 2> D;   // current edge matrix
    Eigen::Matrix<double, 3, 2> F;   // deformation gradient
    Eigen::Matrix2d G;               // Green strain
    Eigen::Matrix2d S;               // PK2 stress
};

// Evaluates the per-triangle Green strain and PK2 stress; returns the
// energy density W(G).
double membrane_point(const ShellMesh& mesh, const MaterialParams& mat,
                      const Configuration& config, int t, MembraneScratch& s) {
    const auto& tri = mesh.triangles[t];
    const Eigen::Vector3d x0 = config.positions.col(tri[0]);
    s.D.col(0) = config.positions.col(tri[1]) - x0;
    s.D.col(1) = config.positions.col(tri[2]) - x0;
    s.F.noalias() = s.D * mesh.rest_shape_inv[t];
    s.G.noalias() = 0.5 * (s.F.transpose() * s.F - Eigen::Matrix2d::Identity());
    const double nu = mat.poisson_ratio;
    const double pref = mat.young_modulus / (1.0 - nu * nu);
    const double tr = s.G.trace();
    s.S.noalias() = pref * ((1.0 - nu) * s.G + nu * tr * Eigen::Matrix2d::Identity());
    const double tr2 = s.G.squaredNorm();  // tr(G^T G) = tr(G^2) for symmetric G
    return 0.5 * pref * (nu * tr * tr + (1.0 - nu) * tr2);
}

}  // namespace

Eigen::Matrix2d membrane_pk2(const ShellMesh& mesh, const MaterialParams& mat,
                             const Configuration& config, int triangle) {
    MembraneScratch s;
    membrane_point(mesh, mat, config, triangle, s);
    return s.S;
}

EnergyBreakdown elastic_energy_and_forces(const ShellMesh& mesh, const MaterialParams& mat,
                                          const Configuration& config,
                                          Eigen::Matrix3Xd& forces) {
    check_dimensions(mesh, config);
    const int nv = mesh.vertex_count();
    forces.setZero(3, nv);

    EnergyBreakdown out;
    const double degenerate_floor = 1e-12 * mesh.mean_rest_area();

    MembraneScratch s;
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d a =
            (config.positions.col(tri[1]) - config.positions.col(tri[0]))
                .cross(config.positions.col(tri[2]) - config.positions.col(tri[0]));
        if (0.5 * a.norm() <= degenerate_floor)
            throw DegenerateElement("triangle " + std::to_string(t) + " degenerated");

        const double w = membrane_point(mesh, mat, config, t, s);
        const double coeff = mesh.geom.h * mesh.rest_area[t];
        out.membrane += coeff * w;

        // dE/dD = h*A * F*S*Binv^T, distributed to the triangle vertices.
        Eigen::Matrix<double, 3, 2> P;
        P.noalias() = coeff * s.F * s.S * mesh.rest_shape_inv[t].transpose();
        forces.col(tri[1]) -= P.col(0);
        forces.col(tri[2]) -= P.col(1);
        forces.col(tri[0]) += P.col(0) + P.col(1);
    }

    const double nu = mat.poisson_ratio;
    const double kb = defaults::c_hinge * mat.young_modulus * mesh.geom.h * mesh.geom.h *
                      mesh.geom.h / (12.0 * (1.0 - nu * nu));
    for (const auto& hg : mesh.hinges) {
        const Eigen::Vector3d p0 = config.positions.col(hg.v0);
        const Eigen::Vector3d p1 = config.positions.col(hg.v1);
        const Eigen::Vector3d p2 = config.positions.col(hg.v2);
        const Eigen::Vector3d p3 = config.positions.col(hg.v3);

        const Eigen::Vector3d e = p1 - p0;
        const double len = e.norm();
        const Eigen::Vector3d n1 = (p1 - p0).cross(p2 - p0);
        const Eigen::Vector3d n2 = (p3 - p0).cross(p1 - p0);
        const double n1sq = n1.squaredNorm();
        const double n2sq = n2.squaredNorm();
        if (n1sq <= 0.0 || n2sq <= 0.0)
            throw DegenerateElement("hinge flap degenerated");

        const double theta = std::atan2(e.dot(n1.cross(n2)) / len, n1.dot(n2));
        const double weight = kb * hg.rest_length / hg.height_bar;
        const double gap = theta - hg.rest_dihedral;
        out.bending += weight * gap * gap;

        // d(theta)/dx for the four stencil vertices.
        const Eigen::Vector3d ehat = e / len;
        const Eigen::Vector3d g2 = -len / n1sq * n1;
        const Eigen::Vector3d g3 = -len / n2sq * n2;
        const Eigen::Vector3d g0 =
            -((p2 - p1).dot(ehat) / n1sq) * n1 - ((p3 - p1).dot(ehat) / n2sq) * n2;
        const Eigen::Vector3d g1 =
            ((p2 - p0).dot(ehat) / n1sq) * n1 + ((p3 - p0).dot(ehat) / n2sq) * n2;

        const double df = 2.0 * weight * gap;
        forces.col(hg.v0) -= df * g0;
        forces.col(hg.v1) -= df * g1;
        forces.col(hg.v2) -= df * g2;
        forces.col(hg.v3) -= df * g3;
    }

    out.total = out.membrane + out.bending;
    return out;
}

EnergyBreakdown elastic_energy(const ShellMesh& mesh, const MaterialParams& mat,
                               const Configuration& config) {
    Eigen::Matrix3Xd scratch;
    return elastic_energy_and_forces(mesh, mat, config, scratch);
}

Eigen::Matrix3Xd elastic_forces(const ShellMesh& mesh, const MaterialParams& mat,
                                const Configuration& config) {
    Eigen::Matrix3Xd forces;
    elastic_energy_and_forces(mesh, mat, config, forces);
    return forces;
}

double enclosed_volume(const ShellMesh& mesh, const Configuration& config) {
    check_dimensions(mesh, config);
    double six_v = 0.0;
    for (const auto& tri : mesh.triangles) {
        const Eigen::Vector3d x0 = config.positions.col(tri[0]);
        const Eigen::Vector3d x1 = config.positions.col(tri[1]);
        const Eigen::Vector3d x2 = config.positions.col(tri[2]);
        six_v += x0.cross(x1).dot(x2);
    }
    for (const auto& loop : mesh.boundary_loops) {
        Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
        for (int v : loop) centroid += config.positions.col(v);
        centroid /= static_cast<double>(loop.size());
        const int n = static_cast<int>(loop.size());
        for (int k = 0; k < n; ++k) {
            // Loop vertices are stored in surface winding order; the fan
            // triangle must traverse the shared edge in reverse.
            const Eigen::Vector3d u = config.positions.col(loop[k]);
            const Eigen::Vector3d v = config.positions.col(loop[(k + 1) % n]);
            six_v += centroid.cross(v).dot(u);
        }
    }
    return mesh.volume_sign * six_v / 6.0;
}

Eigen::VectorXd lumped_vertex_areas(const ShellMesh& mesh) {
    Eigen::VectorXd areas = Eigen::VectorXd::Zero(mesh.vertex_count());
    for (size_t t = 0; t < mesh.triangles.size(); ++t)
        for (int k = 0; k < 3; ++k) areas[mesh.triangles[t][k]] += mesh.rest_area[t] / 3.0;
    return areas;
}

}  // namespace evershell
