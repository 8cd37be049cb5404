#pragma once

#include <Eigen/Dense>

#include "evershell/elastic.hpp"
#include "evershell/mesh.hpp"

namespace evershell {

// Axisymmetric subspace: one (r, z) pair per generator ring; the full
// configuration follows by revolution.
struct GeneratorState {
    Eigen::VectorXd r;
    Eigen::VectorXd z;

    int size() const { return static_cast<int>(r.size()); }
    void validate() const {
        if (r.size() != z.size()) throw InvalidGuess("r and z sizes differ");
        if ((r.array() <= 0.0).any()) throw InvalidGuess("generator radii must be positive");
        if (!r.allFinite() || !z.allFinite()) throw InvalidGuess("non-finite generator state");
    }
};

struct SolverOptions {
    double tol_force_scale = 1e-8;  // tol_force = scale * E * h * r1
    int max_iterations = 20000;
    int max_line_search = 60;
    // Per-iteration displacement cap as a fraction of r1; keeps descent
    // inside the basin of the supplied guess.
    double max_step_scale = 0.02;
};

struct EquilibriumResult {
    GeneratorState generator;
    Configuration lifted_config;
    EnergyBreakdown energy;
    double grad_norm = 0.0;  // projected infinity norm, N
    bool converged = false;
    int iterations = 0;
};

// Per generator node, hoop (n_theta) and meridional (n_s) membrane force
// resultants, N/mm; compression negative.
struct ResultantProfile {
    Eigen::VectorXd alpha;
    Eigen::VectorXd r;
    Eigen::VectorXd z;
    Eigen::VectorXd n_s;
    Eigen::VectorXd n_theta;
};

struct EtaReport {
    double eta_geometric = 0.0;
    double eta_energetic = 0.0;
};

GeneratorState reference_generator(const ShellMesh& mesh);

// Default initial guess for everted equilibria: the generator reflected
// through the cylinder r = r2.
GeneratorState mirrored_generator(const ShellMesh& mesh);

Configuration lift_generator(const ShellMesh& mesh, const GeneratorState& gen);

// Minimizes the elastic energy over generator (r, z) with the mean z
// pinned to zero. Quasi-Newton descent with backtracking line search.
EquilibriumResult solve_axisymmetric_equilibrium(const ShellMesh& mesh,
                                                 const MaterialParams& mat,
                                                 const GeneratorState& guess,
                                                 const SolverOptions& opts = {});

ResultantProfile stress_resultants(const ShellMesh& mesh, const MaterialParams& mat,
                                   const EquilibriumResult& eq);

// sqrt(U_m / U_b) at the everted equilibrium.
double energy_ratio_eta(const EquilibriumResult& eq);

double solver_force_tolerance(const ShellMesh& mesh, const MaterialParams& mat,
                              const SolverOptions& opts);

}  // namespace evershell
