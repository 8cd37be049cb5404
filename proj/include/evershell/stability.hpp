#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evershell/equilibria.hpp"
#include "evershell/hessian.hpp"

namespace evershell {

enum class Verdict { Bistable, Monostable, Marginal };

std::string to_string(Verdict v);

struct EigenvalueEntry {
    double value = 0.0;      // N/mm
    int multiplicity = 1;    // size of its near-degenerate group
};

struct StabilityReport {
    std::vector<EigenvalueEntry> lowest_eigenvalues;
    Eigen::VectorXd critical_mode;  // unit 3N vector, rigid-space deflated
    int azimuthal_wavenumber = 0;
    Verdict verdict = Verdict::Marginal;
    double tol_eig = 0.0;
    double hessian_asymmetry = 0.0;
    double max_rigid_projection = 0.0;
};

struct LandscapeSample {
    std::vector<double> amplitudes;  // mm
    std::vector<double> energies;    // mJ, shifted so energy(0) = 0
};

struct PhasePoint {
    ShellGeometry geom;
    double eta = 0.0;
    double lambda_min = 0.0;
    int wavenumber = 0;
    Verdict verdict = Verdict::Marginal;
};

struct PhaseDiagram {
    std::vector<PhasePoint> points;
    double fitted_eta_c = 0.0;
    double fit_quality = 0.0;       // r^2 of the log h_c vs log(r1/r2) fit
    double slope = 0.0;             // log-log critical-thickness slope
    int misclassified = 0;
    std::vector<double> eta_c_per_slenderness;
    std::vector<double> slenderness;
    std::vector<double> critical_thickness;
};

struct StabilityOptions {
    double tol_eig_scale = 1e-6;  // tol_eig = scale * E h^3 / r1^2
    double fd_step_scale = 1e-6;  // Hessian FD step = scale * r1
    bool marginal_refine = true;  // one automatic resolution doubling
    EigenOptions eigen;
};

double eigenvalue_tolerance(const ShellGeometry& geom, const MaterialParams& mat,
                            const StabilityOptions& opts = {});

// Lowest-k spectrum of the full Hessian at the lifted equilibrium in the
// orthogonal complement of the rigid-body space.
StabilityReport hessian_spectrum(const ShellMesh& mesh, const MaterialParams& mat,
                                 const EquilibriumResult& eq, int k,
                                 const StabilityOptions& opts = {});

// Verdict using k = 12 eigenpairs; a Marginal verdict triggers one
// resolution doubling before being reported.
Verdict classify_bistability(const ShellMesh& mesh, const MaterialParams& mat,
                             const EquilibriumResult& eq,
                             const StabilityOptions& opts = {});

// Raw energy profile along the frozen critical mode.
LandscapeSample energy_landscape(const ShellMesh& mesh, const MaterialParams& mat,
                                 const EquilibriumResult& eq, const StabilityReport& report,
                                 const std::vector<double>& amplitudes);

struct SweepOptions {
    bool refine = true;
    int max_bisection = 6;
    int max_parallel = 1;
    StabilityOptions stability;
    SolverOptions solver;
};

struct MeshResolution {
    int n_s = 24;
    int n_theta = 72;
};

// Classifies every geometry in the grid, fits eta_c by a logistic fit in
// log(eta), and refines the per-slenderness critical thickness by bisection.
PhaseDiagram phase_diagram_sweep(const std::vector<ShellGeometry>& grid,
                                 const MaterialParams& mat, const MeshResolution& resolution,
                                 const SweepOptions& opts = {});

// One full pipeline step shared by classify and the sweep.
PhasePoint classify_geometry(const ShellGeometry& geom, const MaterialParams& mat,
                             const MeshResolution& resolution, const SolverOptions& solver_opts,
                             const StabilityOptions& stab_opts);

}  // namespace evershell
