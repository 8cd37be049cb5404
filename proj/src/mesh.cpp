#include "evershell/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "evershell/elastic.hpp"

namespace evershell {

double ShellMesh::total_rest_area() const {
    return std::accumulate(rest_area.begin(), rest_area.end(), 0.0);
}

double ShellMesh::mean_rest_area() const {
    return rest_area.empty() ? 0.0 : total_rest_area() / static_cast<double>(rest_area.size());
}

double dihedral_angle(const Eigen::Vector3d& p0, const Eigen::Vector3d& p1,
                      const Eigen::Vector3d& p2, const Eigen::Vector3d& p3) {
    const Eigen::Vector3d e = p1 - p0;
    const Eigen::Vector3d n1 = (p1 - p0).cross(p2 - p0);
    const Eigen::Vector3d n2 = (p3 - p0).cross(p1 - p0);
    const double len = e.norm();
    const double sin_term = e.dot(n1.cross(n2)) / len;
    const double cos_term = n1.dot(n2);
    return std::atan2(sin_term, cos_term);
}

namespace {

// Isometric 2D embedding of a triangle, first axis aligned with the
// projection of `hint` onto the triangle plane.
Eigen::Matrix2d rest_shape_matrix(const Eigen::Vector3d& x0, const Eigen::Vector3d& x1,
                                  const Eigen::Vector3d& x2, Eigen::Vector3d hint) {
    const Eigen::Vector3d e1 = x1 - x0;
    const Eigen::Vector3d e2 = x2 - x0;
    Eigen::Vector3d n = e1.cross(e2);
    const double nn = n.norm();
    if (nn <= 0.0) throw DegenerateElement("zero-area triangle in reference mesh");
    n /= nn;
    Eigen::Vector3d u = hint - hint.dot(n) * n;
    if (u.norm() < 1e-9 * std::max(1.0, hint.norm())) u = e1 - e1.dot(n) * n;
    u.normalize();
    const Eigen::Vector3d v = n.cross(u);
    Eigen::Matrix2d D;
    D << e1.dot(u), e2.dot(u), e1.dot(v), e2.dot(v);
    return D;
}

}  // namespace

ShellMesh build_mesh_from_triangles(Eigen::Matrix3Xd vertices,
                                    std::vector<std::array<int, 3>> triangles,
                                    double thickness,
                                    const Eigen::Matrix3Xd& hoop_hint) {
    if (!(thickness > 0.0)) throw InvalidGeometry("thickness must be positive");
    ShellMesh mesh;
    mesh.geom.h = thickness;
    mesh.vertices = std::move(vertices);
    mesh.triangles = std::move(triangles);

    const int nt = static_cast<int>(mesh.triangles.size());
    mesh.rest_shape_inv.resize(nt);
    mesh.rest_area.resize(nt);
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        const Eigen::Vector3d x0 = mesh.vertices.col(tri[0]);
        const Eigen::Vector3d x1 = mesh.vertices.col(tri[1]);
        const Eigen::Vector3d x2 = mesh.vertices.col(tri[2]);
        Eigen::Vector3d hint = (hoop_hint.cols() == nt) ? Eigen::Vector3d(hoop_hint.col(t))
                                                        : Eigen::Vector3d(x1 - x0);
        const Eigen::Matrix2d D = rest_shape_matrix(x0, x1, x2, hint);
        const double area = 0.5 * std::abs(D.determinant());
        if (area <= 0.0) throw DegenerateElement("zero-area triangle in reference mesh");
        mesh.rest_shape_inv[t] = D.inverse();
        mesh.rest_area[t] = area;
    }

    // Edge table: key (min,max) -> triangle, opposite vertex, directed-as-stored flag.
    struct EdgeRef {
        int tri, opposite;
        bool forward;  // edge appears as v0->v1 within the triangle winding
    };
    std::map<std::pair<int, int>, std::vector<EdgeRef>> table;
    for (int t = 0; t < nt; ++t) {
        const auto& tri = mesh.triangles[t];
        for (int k = 0; k < 3; ++k) {
            int a = tri[k], b = tri[(k + 1) % 3], c = tri[(k + 2) % 3];
            const bool forward = a < b;
            std::pair<int, int> key = forward ? std::make_pair(a, b) : std::make_pair(b, a);
            table[key].push_back({t, c, forward});
        }
    }

    std::map<std::pair<int, int>, int> boundary_next;  // directed boundary edges u->v
    for (const auto& [key, refs] : table) {
        MeshEdge edge;
        edge.v0 = key.first;
        edge.v1 = key.second;
        edge.rest_length = (mesh.vertices.col(edge.v1) - mesh.vertices.col(edge.v0)).norm();
        if (edge.rest_length <= 0.0) throw DegenerateElement("zero-length edge");
        mesh.edges.push_back(edge);

        if (refs.size() == 2) {
            if (refs[0].forward == refs[1].forward)
                throw DegenerateElement("inconsistent triangle winding across an edge");
            const EdgeRef& fa = refs[0].forward ? refs[0] : refs[1];
            const EdgeRef& fb = refs[0].forward ? refs[1] : refs[0];
            Hinge hinge;
            hinge.v0 = key.first;
            hinge.v1 = key.second;
            hinge.v2 = fa.opposite;
            hinge.v3 = fb.opposite;
            hinge.rest_length = edge.rest_length;
            const double area_a = mesh.rest_area[fa.tri];
            const double area_b = mesh.rest_area[fb.tri];
            hinge.height_bar = 2.0 * (area_a + area_b) / (3.0 * edge.rest_length);
            hinge.rest_dihedral =
                dihedral_angle(mesh.vertices.col(hinge.v0), mesh.vertices.col(hinge.v1),
                               mesh.vertices.col(hinge.v2), mesh.vertices.col(hinge.v3));
            mesh.hinges.push_back(hinge);
        } else if (refs.size() == 1) {
            // Boundary edge; the fan closure traverses it against the surface
            // winding, so record the surface direction u->v here.
            int u = refs[0].forward ? key.first : key.second;
            int v = refs[0].forward ? key.second : key.first;
            boundary_next[{u, v}] = 0;
        } else {
            throw DegenerateElement("non-manifold edge");
        }
    }

    // Group directed boundary edges into ordered loops.
    std::map<int, int> next_vertex;
    for (const auto& [uv, _] : boundary_next) next_vertex[uv.first] = uv.second;
    std::vector<bool> used;
    while (!next_vertex.empty()) {
        int start = next_vertex.begin()->first;
        std::vector<int> loop;
        int cur = start;
        do {
            loop.push_back(cur);
            auto it = next_vertex.find(cur);
            if (it == next_vertex.end()) throw DegenerateElement("open boundary chain");
            int nxt = it->second;
            next_vertex.erase(it);
            cur = nxt;
        } while (cur != start);
        mesh.boundary_loops.push_back(std::move(loop));
    }

    return mesh;
}

ShellMesh build_reference_shell(const ShellGeometry& geom, const MaterialParams& mat,
                                int n_s, int n_theta) {
    geom.validate();
    mat.validate();
    if (n_s < 8 || n_theta < 24)
        throw ResolutionTooCoarse("need n_s >= 8 and n_theta >= 24");

    const bool closed = geom.closed();
    const int nv = n_s * n_theta;

    std::vector<double> alpha(n_s);
    for (int i = 0; i < n_s; ++i) {
        alpha[i] = closed ? (-M_PI + 2.0 * M_PI * i / n_s)
                          : (-0.5 * geom.arc_angle +
                             geom.arc_angle * i / static_cast<double>(n_s - 1));
    }

    Eigen::Matrix3Xd verts(3, nv);
    for (int i = 0; i < n_s; ++i) {
        const double r = geom.r2 + geom.r1 * std::cos(alpha[i]);
        const double z = geom.r1 * std::sin(alpha[i]);
        for (int j = 0; j < n_theta; ++j) {
            const double phi = 2.0 * M_PI * j / n_theta;
            verts.col(i * n_theta + j) = Eigen::Vector3d(r * std::cos(phi), r * std::sin(phi), z);
        }
    }

    auto vid = [n_theta](int i, int j) { return i * n_theta + j; };
    std::vector<std::array<int, 3>> tris;
    std::vector<Eigen::Vector3d> hints;
    const int n_strips = closed ? n_s : n_s - 1;
    for (int i = 0; i < n_strips; ++i) {
        const int ip = (i + 1) % n_s;
        for (int j = 0; j < n_theta; ++j) {
            const int jp = (j + 1) % n_theta;
            const int a = vid(i, j), b = vid(i, jp), c = vid(ip, jp), d = vid(ip, j);
            // Alternating diagonals avoid a global chirality bias.
            if ((i + j) % 2 == 0) {
                tris.push_back({a, b, c});
                tris.push_back({a, c, d});
            } else {
                tris.push_back({a, b, d});
                tris.push_back({b, c, d});
            }
            const double phi_mid = 2.0 * M_PI * (j + 0.5) / n_theta;
            const Eigen::Vector3d hoop(-std::sin(phi_mid), std::cos(phi_mid), 0.0);
            hints.push_back(hoop);
            hints.push_back(hoop);
        }
    }

    Eigen::Matrix3Xd hint_mat(3, static_cast<int>(hints.size()));
    for (int t = 0; t < hint_mat.cols(); ++t) hint_mat.col(t) = hints[t];

    ShellMesh mesh = build_mesh_from_triangles(std::move(verts), std::move(tris), geom.h, hint_mat);
    mesh.geom = geom;
    mesh.n_s = n_s;
    mesh.n_theta = n_theta;
    mesh.closed = closed;
    mesh.alpha = std::move(alpha);

    const Configuration ref = reference_configuration(mesh);
    const double v = enclosed_volume(mesh, ref);
    if (v < 0.0) mesh.volume_sign = -1.0;
    return mesh;
}

ShellMesh evert(const ShellMesh& mesh) {
    if (mesh.eversion_applied) throw AlreadyEverted("mesh already everted");
    ShellMesh out = mesh;
    for (auto& hinge : out.hinges) hinge.rest_dihedral = -hinge.rest_dihedral;
    out.eversion_applied = true;
    return out;
}

ShellMesh rebuild_rest_from(const ShellMesh& mesh, const Configuration& config) {
    if (config.positions.cols() != mesh.vertices.cols())
        throw DimensionMismatch("configuration size does not match mesh");
    ShellMesh out = mesh;
    out.vertices = config.positions;
    out.eversion_applied = false;
    const int nt = static_cast<int>(out.triangles.size());
    for (int t = 0; t < nt; ++t) {
        const auto& tri = out.triangles[t];
        const Eigen::Vector3d x0 = out.vertices.col(tri[0]);
        const Eigen::Vector3d x1 = out.vertices.col(tri[1]);
        const Eigen::Vector3d x2 = out.vertices.col(tri[2]);
        const Eigen::Vector3d hint = x1 - x0;
        const Eigen::Matrix2d D = rest_shape_matrix(x0, x1, x2, hint);
        const double area = 0.5 * std::abs(D.determinant());
        if (area <= 0.0) throw DegenerateElement("degenerate triangle in donor configuration");
        out.rest_shape_inv[t] = D.inverse();
        out.rest_area[t] = area;
    }
    for (auto& edge : out.edges)
        edge.rest_length = (out.vertices.col(edge.v1) - out.vertices.col(edge.v0)).norm();
    for (auto& hinge : out.hinges) {
        hinge.rest_length = (out.vertices.col(hinge.v1) - out.vertices.col(hinge.v0)).norm();
        hinge.rest_dihedral =
            dihedral_angle(out.vertices.col(hinge.v0), out.vertices.col(hinge.v1),
                           out.vertices.col(hinge.v2), out.vertices.col(hinge.v3));
    }
    // Recompute height_bar from the new rest areas.
    std::map<std::pair<int, int>, double> area_sum;
    for (int t = 0; t < nt; ++t) {
        const auto& tri = out.triangles[t];
        for (int k = 0; k < 3; ++k) {
            const int a = std::min(tri[k], tri[(k + 1) % 3]);
            const int b = std::max(tri[k], tri[(k + 1) % 3]);
            area_sum[{a, b}] += out.rest_area[t];
        }
    }
    for (auto& hinge : out.hinges) {
        const double sum = area_sum.at({std::min(hinge.v0, hinge.v1), std::max(hinge.v0, hinge.v1)});
        hinge.height_bar = 2.0 * sum / (3.0 * hinge.rest_length);
    }
    return out;
}

Configuration reference_configuration(const ShellMesh& mesh) {
    return Configuration{mesh.vertices};
}

}  // namespace evershell
