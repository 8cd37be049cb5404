#include "fixtures.hpp"

#include <cmath>

#include "evershell/elastic.hpp"

namespace evershell::fixtures {

namespace {

void append_ring_band(std::vector<std::array<int, 3>>& tris, int ring_a_start,
                      int ring_b_start, int n_lon, int parity) {
    for (int j = 0; j < n_lon; ++j) {
        const int jp = (j + 1) % n_lon;
        const int a = ring_a_start + j, b = ring_a_start + jp;
        const int c = ring_b_start + jp, d = ring_b_start + j;
        if ((parity + j) % 2 == 0) {
            tris.push_back({a, b, c});
            tris.push_back({a, c, d});
        } else {
            tris.push_back({a, b, d});
            tris.push_back({b, c, d});
        }
    }
}

}  // namespace

ShellMesh build_sphere(double radius, double thickness, int n_lat, int n_lon) {
    // Rings at latitude t_k in (0, pi), plus two pole vertices.
    const int nv = n_lat * n_lon + 2;
    Eigen::Matrix3Xd verts(3, nv);
    for (int i = 0; i < n_lat; ++i) {
        const double t = M_PI * (i + 1) / (n_lat + 1);
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * M_PI * j / n_lon;
            verts.col(i * n_lon + j) =
                radius * Eigen::Vector3d(std::sin(t) * std::cos(phi),
                                         std::sin(t) * std::sin(phi), std::cos(t));
        }
    }
    const int north = n_lat * n_lon;
    const int south = north + 1;
    verts.col(north) = Eigen::Vector3d(0, 0, radius);
    verts.col(south) = Eigen::Vector3d(0, 0, -radius);

    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < n_lon; ++j) {
        const int jp = (j + 1) % n_lon;
        tris.push_back({north, jp, j});
        const int base = (n_lat - 1) * n_lon;
        tris.push_back({south, base + j, base + jp});
    }
    for (int i = 0; i + 1 < n_lat; ++i)
        append_ring_band(tris, i * n_lon, (i + 1) * n_lon, n_lon, i);

    ShellMesh mesh = build_mesh_from_triangles(std::move(verts), std::move(tris), thickness);
    const Configuration ref = reference_configuration(mesh);
    if (enclosed_volume(mesh, ref) < 0.0) mesh.volume_sign = -1.0;
    return mesh;
}

ShellMesh build_plate(double lx, double ly, double thickness, int nx, int ny) {
    Eigen::Matrix3Xd verts(3, nx * ny);
    for (int i = 0; i < ny; ++i)
        for (int j = 0; j < nx; ++j)
            verts.col(i * nx + j) =
                Eigen::Vector3d(lx * j / (nx - 1), ly * i / (ny - 1), 0.0);

    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i + 1 < ny; ++i) {
        for (int j = 0; j + 1 < nx; ++j) {
            const int a = i * nx + j, b = i * nx + j + 1;
            const int c = (i + 1) * nx + j + 1, d = (i + 1) * nx + j;
            if ((i + j) % 2 == 0) {
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            } else {
                tris.push_back({a, b, d});
                tris.push_back({b, c, d});
            }
        }
    }
    return build_mesh_from_triangles(std::move(verts), std::move(tris), thickness);
}

ShellMesh build_hemisphere(double radius, double thickness, int n_lat, int n_lon) {
    // Rings from the equator (t = pi/2) up to near the pole, plus the pole.
    const int nv = n_lat * n_lon + 1;
    Eigen::Matrix3Xd verts(3, nv);
    for (int i = 0; i < n_lat; ++i) {
        const double t = 0.5 * M_PI * (1.0 - static_cast<double>(i) / n_lat);
        for (int j = 0; j < n_lon; ++j) {
            const double phi = 2.0 * M_PI * j / n_lon;
            verts.col(i * n_lon + j) =
                radius * Eigen::Vector3d(std::sin(t) * std::cos(phi),
                                         std::sin(t) * std::sin(phi), std::cos(t));
        }
    }
    const int pole = n_lat * n_lon;
    verts.col(pole) = Eigen::Vector3d(0, 0, radius);

    std::vector<std::array<int, 3>> tris;
    for (int i = 0; i + 1 < n_lat; ++i)
        append_ring_band(tris, i * n_lon, (i + 1) * n_lon, n_lon, i);
    const int top = (n_lat - 1) * n_lon;
    for (int j = 0; j < n_lon; ++j) {
        const int jp = (j + 1) % n_lon;
        tris.push_back({pole, top + j, top + jp});
    }

    ShellMesh mesh = build_mesh_from_triangles(std::move(verts), std::move(tris), thickness);
    const Configuration ref = reference_configuration(mesh);
    if (enclosed_volume(mesh, ref) < 0.0) mesh.volume_sign = -1.0;
    return mesh;
}

Configuration roll_plate_to_cylinder(const ShellMesh& plate, double rho) {
    Configuration config = reference_configuration(plate);
    for (int v = 0; v < config.positions.cols(); ++v) {
        const double y = plate.vertices(1, v);
        config.positions.col(v) = Eigen::Vector3d(
            plate.vertices(0, v), rho * std::sin(y / rho), rho * (1.0 - std::cos(y / rho)));
    }
    return config;
}

}  // namespace evershell::fixtures
