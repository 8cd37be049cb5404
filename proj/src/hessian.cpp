#include "evershell/hessian.hpp"

#include <algorithm>
#include <vector>

namespace evershell {

namespace {

// Vertices sharing a triangle or a hinge stencil with v (including v).
std::vector<std::vector<int>> influence_sets(const ShellMesh& mesh) {
    const int nv = mesh.vertex_count();
    std::vector<std::vector<int>> nbr(nv);
    auto link = [&](int a, int b) {
        nbr[a].push_back(b);
        nbr[b].push_back(a);
    };
    for (const auto& tri : mesh.triangles) {
        link(tri[0], tri[1]);
        link(tri[1], tri[2]);
        link(tri[2], tri[0]);
    }
    for (const auto& hg : mesh.hinges) {
        link(hg.v0, hg.v3);
        link(hg.v1, hg.v3);
        link(hg.v2, hg.v3);
        link(hg.v0, hg.v2);
        link(hg.v1, hg.v2);
        link(hg.v2, hg.v3);
    }
    for (int v = 0; v < nv; ++v) {
        nbr[v].push_back(v);
        std::sort(nbr[v].begin(), nbr[v].end());
        nbr[v].erase(std::unique(nbr[v].begin(), nbr[v].end()), nbr[v].end());
    }
    return nbr;
}

// Greedy coloring so that same-color vertices have disjoint influence sets
// (exactness condition for block finite differences).
std::vector<int> fd_coloring(const std::vector<std::vector<int>>& influence, int& n_colors) {
    const int nv = static_cast<int>(influence.size());
    // conflict(u, v) iff influence sets intersect <=> some w lists both.
    std::vector<std::vector<int>> owners(nv);  // vertex w -> perturbed u with w in infl(u)
    std::vector<int> color(nv, -1);
    std::vector<char> forbidden;
    n_colors = 0;
    for (int u = 0; u < nv; ++u) {
        forbidden.assign(n_colors, 0);
        for (int w : influence[u])
            for (int other : owners[w])
                if (color[other] >= 0) forbidden[color[other]] = 1;
        int c = 0;
        while (c < n_colors && forbidden[c]) ++c;
        if (c == n_colors) ++n_colors;
        color[u] = c;
        for (int w : influence[u]) owners[w].push_back(u);
    }
    return color;
}

}  // namespace

Eigen::SparseMatrix<double> assemble_hessian(const ShellMesh& mesh, const MaterialParams& mat,
                                             const Configuration& config, double fd_step,
                                             double* max_asymmetry) {
    const int nv = mesh.vertex_count();
    const int n = 3 * nv;
    const auto influence = influence_sets(mesh);
    int n_colors = 0;
    const auto color = fd_coloring(influence, n_colors);

    std::vector<std::vector<int>> classes(n_colors);
    for (int v = 0; v < nv; ++v) classes[color[v]].push_back(v);

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(nv) * 120);

    Configuration work = config;
    Eigen::Matrix3Xd f_plus, f_minus;
    for (int c = 0; c < n_colors; ++c) {
        for (int axis = 0; axis < 3; ++axis) {
            for (int u : classes[c]) work.positions(axis, u) += fd_step;
            elastic_energy_and_forces(mesh, mat, work, f_plus);
            for (int u : classes[c]) work.positions(axis, u) -= 2.0 * fd_step;
            elastic_energy_and_forces(mesh, mat, work, f_minus);
            for (int u : classes[c]) work.positions(axis, u) += fd_step;

            for (int u : classes[c]) {
                const int col = 3 * u + axis;
                for (int w : influence[u]) {
                    for (int b = 0; b < 3; ++b) {
                        // Hessian = -d(force)/dx.
                        const double entry =
                            -(f_plus(b, w) - f_minus(b, w)) / (2.0 * fd_step);
                        if (entry != 0.0)
                            triplets.emplace_back(3 * w + b, col, entry);
                    }
                }
            }
        }
    }

    Eigen::SparseMatrix<double> hessian(n, n);
    hessian.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::SparseMatrix<double> transpose = hessian.transpose();
    if (max_asymmetry) {
        double num = 0.0, den = 0.0;
        Eigen::SparseMatrix<double> diff = hessian - transpose;
        for (int k = 0; k < diff.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(diff, k); it; ++it)
                num = std::max(num, std::abs(it.value()));
        for (int k = 0; k < hessian.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(hessian, k); it; ++it)
                den = std::max(den, std::abs(it.value()));
        *max_asymmetry = den > 0.0 ? num / den : 0.0;
    }
    hessian = 0.5 * (hessian + transpose);
    hessian.makeCompressed();
    return hessian;
}

Eigen::MatrixXd rigid_body_basis(const Configuration& config) {
    const int nv = static_cast<int>(config.positions.cols());
    const int n = 3 * nv;
    Eigen::MatrixXd basis(n, 6);
    basis.setZero();
    const Eigen::Vector3d centroid = config.positions.rowwise().mean();
    for (int v = 0; v < nv; ++v) {
        const Eigen::Vector3d p = config.positions.col(v) - centroid;
        for (int a = 0; a < 3; ++a) basis(3 * v + a, a) = 1.0;
        // omega x p for omega = e_x, e_y, e_z
        basis.block<3, 1>(3 * v, 3) = Eigen::Vector3d(0.0, p.z(), -p.y());
        basis.block<3, 1>(3 * v, 4) = Eigen::Vector3d(-p.z(), 0.0, p.x());
        basis.block<3, 1>(3 * v, 5) = Eigen::Vector3d(p.y(), -p.x(), 0.0);
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    return qr.householderQ() * Eigen::MatrixXd::Identity(n, 6);
}

namespace {

void project_out(const Eigen::MatrixXd& deflation, Eigen::MatrixXd& block) {
    if (deflation.cols() > 0)
        block.noalias() -= deflation * (deflation.transpose() * block);
}

// Deterministic pseudo-random initial block.
Eigen::MatrixXd seeded_block(int n, int cols) {
    Eigen::MatrixXd x(n, cols);
    uint64_t state = 0x9e3779b97f4a7c15ull;
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < n; ++i) {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            x(i, j) = static_cast<double>(state >> 11) / 9007199254740992.0 - 0.5;
        }
    return x;
}

// B-orthonormalizes the columns of S (plain QR with rank filtering).
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& s) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(s);
    qr.setThreshold(1e-12);
    const int rank = static_cast<int>(qr.rank());
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(s.rows(), rank);
    return q;
}

EigenResult dense_eigenpairs(const Eigen::SparseMatrix<double>& hessian,
                             const Eigen::MatrixXd& deflation, int k) {
    const int n = static_cast<int>(hessian.rows());
    Eigen::MatrixXd dense = Eigen::MatrixXd(hessian);
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(dense(i, i)));
    // Shift the deflation space far up the spectrum.
    if (deflation.cols() > 0)
        dense.noalias() += (10.0 * scale) * deflation * deflation.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
    if (solver.info() != Eigen::Success) throw EigenSolverFailure("dense eigensolver failed");
    EigenResult out;
    out.values = solver.eigenvalues().head(k);
    out.vectors = solver.eigenvectors().leftCols(k);
    out.used_dense = true;
    return out;
}

}  // namespace

EigenResult lowest_eigenpairs(const Eigen::SparseMatrix<double>& hessian,
                              const Eigen::MatrixXd& deflation, int k,
                              const EigenOptions& opts) {
    const int n = static_cast<int>(hessian.rows());
    if (k <= 0 || k + deflation.cols() >= n)
        throw EigenSolverFailure("requested too many eigenpairs");

    double scale = 0.0;
    for (int c = 0; c < hessian.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(hessian, c); it; ++it)
            if (it.row() == c) scale = std::max(scale, std::abs(it.value()));

    // Shift ladder: factor H + tau*I, raising tau until positive definite.
    // A tau just above |lambda_min| makes M^-1 a shift-invert-grade
    // preconditioner; negative eigenvalues here live on the bending scale,
    // orders of magnitude below the membrane-dominated diagonal.
    double tau = opts.shift_hint > 0.0 ? opts.shift_hint : 1e-8 * scale;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool factored = false;
    for (int attempt = 0; attempt < 14 && !factored; ++attempt, tau *= 8.0) {
        Eigen::SparseMatrix<double> shifted = hessian;
        for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) += tau;
        ldlt.compute(shifted);
        if (ldlt.info() != Eigen::Success) continue;
        const auto& d = ldlt.vectorD();
        if (d.allFinite() && (d.array() > 0.0).all()) factored = true;
    }
    if (!factored) {
        if (n <= opts.dense_fallback_dofs) return dense_eigenpairs(hessian, deflation, k);
        throw EigenSolverFailure("preconditioner factorization failed");
    }

    const int block = std::min(n - static_cast<int>(deflation.cols()) - 1, k + std::min(k, 8));
    Eigen::MatrixXd x = seeded_block(n, block);
    project_out(deflation, x);
    x = orthonormalize(x);

    Eigen::VectorXd lambda = Eigen::VectorXd::Zero(block);
    Eigen::MatrixXd p;  // previous search directions
    const double tol = opts.tol_scale * scale;

    EigenResult out;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
        Eigen::MatrixXd hx = hessian * x;
        Eigen::MatrixXd xtHx = x.transpose() * hx;
        // Rayleigh quotients on the current orthonormal block.
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(0.5 * (xtHx + xtHx.transpose()));
        x = x * small.eigenvectors();
        hx = hx * small.eigenvectors();
        lambda = small.eigenvalues();

        Eigen::MatrixXd residual = hx - x * lambda.asDiagonal();
        double worst = 0.0;
        for (int j = 0; j < std::min(k, block); ++j)
            worst = std::max(worst, residual.col(j).norm());
        if (worst < tol) {
            out.iterations = iter;
            out.values = lambda.head(k);
            out.vectors = x.leftCols(k);
            return out;
        }

        Eigen::MatrixXd w = ldlt.solve(residual);
        project_out(deflation, w);

        Eigen::MatrixXd basis(n, x.cols() + w.cols() + (p.cols() > 0 ? p.cols() : 0));
        basis.leftCols(x.cols()) = x;
        basis.middleCols(x.cols(), w.cols()) = w;
        if (p.cols() > 0) basis.rightCols(p.cols()) = p;
        // Orthonormalize the combined subspace against the deflation space.
        project_out(deflation, basis);
        Eigen::MatrixXd q = orthonormalize(basis);

        Eigen::MatrixXd hq = hessian * q;
        Eigen::MatrixXd t = q.transpose() * hq;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ritz(0.5 * (t + t.transpose()));
        const int keep = std::min<int>(block, ritz.eigenvalues().size());
        Eigen::MatrixXd x_new = q * ritz.eigenvectors().leftCols(keep);

        // LOBPCG-style history: the part of the new block outside span(x).
        Eigen::MatrixXd delta = x_new - x * (x.transpose() * x_new);
        p = orthonormalize(delta);
        if (p.cols() > block) p = p.leftCols(block);
        x = x_new;
    }

    if (n <= opts.dense_fallback_dofs) return dense_eigenpairs(hessian, deflation, k);
    // Return the best effort with a failure marker via exception.
    throw EigenSolverFailure("LOBPCG did not converge");
}

}  // namespace evershell
