#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "evershell/elastic.hpp"

namespace evershell {

// Full-mesh energy Hessian by central finite differences of the analytic
// gradient, assembled column-block-wise with a distance-based coloring so
// each color needs just two gradient evaluations.
Eigen::SparseMatrix<double> assemble_hessian(const ShellMesh& mesh, const MaterialParams& mat,
                                             const Configuration& config, double fd_step,
                                             double* max_asymmetry = nullptr);

// Orthonormal basis of the 6-dimensional rigid-body space at the given
// configuration (3 translations, 3 rotations), one column per mode.
Eigen::MatrixXd rigid_body_basis(const Configuration& config);

struct EigenOptions {
    int max_iterations = 250;
    double tol_scale = 3e-8;      // residual tol = tol_scale * max |H_ii|
    int dense_fallback_dofs = 6000;
    // Initial preconditioner shift; should sit just above |lambda_min|.
    // Zero means 1e-8 * max |H_ii|. The factorization retries with 8x the
    // shift until the shifted matrix is positive definite.
    double shift_hint = 0.0;
};

// Lowest eigenpairs of H restricted to the orthogonal complement of the
// deflation space. LOBPCG with an LDLT-preconditioner; dense fallback below
// `dense_fallback_dofs` degrees of freedom.
struct EigenResult {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
    bool used_dense = false;
    int iterations = 0;
};

EigenResult lowest_eigenpairs(const Eigen::SparseMatrix<double>& hessian,
                              const Eigen::MatrixXd& deflation, int k,
                              const EigenOptions& opts = {});

}  // namespace evershell
