#pragma once

#include <optional>
#include <vector>

#include "evershell/equilibria.hpp"
#include "evershell/stability.hpp"
#include "evershell/unit_model.hpp"

namespace evershell {

enum class Support { ConcaveSeat, TwoPoint, ThreePoint, Free };

struct IndentationCurve {
    std::vector<double> depths;  // mm
    std::vector<double> forces;  // N
    double critical_force = 0.0;
    double critical_depth = 0.0;
    bool critical_defined = false;
    double direction = 0.0;  // azimuthal angle, rad
    Support support = Support::ConcaveSeat;
};

struct SnapTrace {
    std::vector<double> times;           // s
    std::vector<double> kinetic_energy;  // mJ
    std::vector<double> elastic_energy;  // mJ
    std::vector<double> dissipated;      // mJ, cumulative
    std::vector<double> volume;          // mm^3
    std::vector<Configuration> snapshots;
    Configuration final_config;
    double work_input = 0.0;             // mJ (zero for velocity triggers)
    double max_ledger_residual = 0.0;    // fraction of peak energy
};

struct SnapSummary {
    double peak_kinetic_energy = 0.0;  // mJ
    double volume_ratio_final = 0.0;   // V_final / V_0
    double collapse_duration = 0.0;    // s
};

struct TriggerSpec {
    enum class Kind { IndenterImpulse, ModeVelocity };
    Kind kind = Kind::IndenterImpulse;
    double energy = 0.0;     // mJ of initial kinetic energy
    double direction = 0.0;  // azimuth for IndenterImpulse
    // Mode for ModeVelocity triggers (unit 3N vector).
    Eigen::VectorXd mode;
};

struct IndentOptions {
    int n_steps = 40;
    double settle_ke_ratio = 1e-4;
    int max_settle_steps = 400000;
    double drop_fraction = 0.2;
    double contact_stiffness_scale = 100.0;  // k_c = scale * E * h
    std::optional<Verdict> verdict;          // skip re-classification when known
};

struct SnapOptions {
    double damping_ratio = 0.05;   // fraction of critical on the fundamental mode
    double fundamental_omega = 0.0;  // rad/s; 0 = estimate from bending scale
    int n_samples = 600;
    int n_snapshots = 9;
    bool undamped_check = false;   // raise Instability on >1% energy growth
};

// Displacement-controlled rigid spherical indentation with damped dynamic
// re-settling per increment; the curve terminates at the first post-critical
// force drop or max_depth.
IndentationCurve indent_quasistatic(const ShellMesh& mesh, const MaterialParams& mat,
                                    const EquilibriumResult& eq, double direction,
                                    Support support, double max_depth, int n_steps,
                                    const IndentOptions& opts = {});

// Explicit velocity-Verlet snap run with lumped masses and mass-proportional
// damping; time step 0.2*sqrt(m_min/k_max) from the Hessian diagonal bound.
SnapTrace simulate_snap(const ShellMesh& mesh, const MaterialParams& mat,
                        const EquilibriumResult& eq, const TriggerSpec& trigger,
                        double duration, const SnapOptions& opts = {});

SnapSummary snap_summary(const SnapTrace& trace, const ShellMesh& mesh);

UnitModel calibrate_unit_model(const ShellMesh& mesh, const IndentationCurve& curve,
                               const SnapSummary& summary, const SnapTrace& trace,
                               const EquilibriumResult& eq, const ShellGeometry& geom,
                               const MaterialParams& mat, double depth);

// Projected silhouette area on the equatorial plane, rasterized at a fixed
// resolution over a frame centred on the axis.
double silhouette_area(const ShellMesh& mesh, const Configuration& config, double half_width,
                       int resolution = 512);

}  // namespace evershell
