#include "evershell/snap.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace evershell {

namespace {

// One-sided quadratic penalties acting on vertices: the moving spherical
// indenter plus the fixed support bodies.
struct ContactSet {
    double k = 0.0;  // N/mm per vertex
    double validity = 0.0;  // max penetration before ContactFailure (= h)

    // Indenter sphere.
    bool has_indenter = false;
    Eigen::Vector3d indenter_center = Eigen::Vector3d::Zero();
    double indenter_radius = 0.0;

    // Concave seat: vertices with azimuth within half_span of seat_azimuth
    // are kept inside radius seat_radius (cylindrical).
    bool has_seat = false;
    double seat_radius = 0.0;
    double seat_azimuth = 0.0;
    double seat_half_span = M_PI / 3.0;

    // Support pegs (outward-blocking spheres).
    std::vector<Eigen::Vector3d> peg_centers;
    double peg_radius = 0.0;

    // Returns penalty energy, adds forces, and reports the indenter reaction
    // along `reaction_dir` plus the worst penetration seen.
    double accumulate(const Eigen::Matrix3Xd& x, Eigen::Matrix3Xd& forces,
                      const Eigen::Vector3d& reaction_dir, double& reaction,
                      double& worst_pen) const {
        double energy = 0.0;
        reaction = 0.0;
        worst_pen = 0.0;
        const int nv = static_cast<int>(x.cols());
        for (int v = 0; v < nv; ++v) {
            const Eigen::Vector3d p = x.col(v);
            if (has_indenter) {
                const Eigen::Vector3d d = p - indenter_center;
                const double dist = d.norm();
                const double pen = indenter_radius - dist;
                if (pen > 0.0 && dist > 1e-12) {
                    energy += 0.5 * k * pen * pen;
                    const Eigen::Vector3d f = k * pen * (d / dist);
                    forces.col(v) += f;
                    reaction += (-f).dot(reaction_dir);
                    worst_pen = std::max(worst_pen, pen);
                }
            }
            if (has_seat) {
                const double rho = std::hypot(p.x(), p.y());
                if (rho > 1e-12) {
                    double ang = std::atan2(p.y(), p.x()) - seat_azimuth;
                    ang = std::remainder(ang, 2.0 * M_PI);
                    if (std::abs(ang) < seat_half_span) {
                        const double pen = rho - seat_radius;
                        if (pen > 0.0) {
                            energy += 0.5 * k * pen * pen;
                            const Eigen::Vector3d inward(-p.x() / rho, -p.y() / rho, 0.0);
                            forces.col(v) += k * pen * inward;
                            worst_pen = std::max(worst_pen, pen);
                        }
                    }
                }
            }
            for (const auto& c : peg_centers) {
                const Eigen::Vector3d d = p - c;
                const double dist = d.norm();
                const double pen = peg_radius - dist;
                if (pen > 0.0 && dist > 1e-12) {
                    energy += 0.5 * k * pen * pen;
                    forces.col(v) += k * pen * (d / dist);
                    worst_pen = std::max(worst_pen, pen);
                }
            }
        }
        return energy;
    }
};

double max_equatorial_radius(const Configuration& config) {
    double r = 0.0;
    for (int v = 0; v < config.positions.cols(); ++v)
        r = std::max(r, std::hypot(config.positions(0, v), config.positions(1, v)));
    return r;
}

ContactSet make_support(Support support, double direction, double outer_radius, double r1,
                        double stiffness, double thickness) {
    ContactSet contacts;
    contacts.k = stiffness;
    contacts.validity = thickness;
    switch (support) {
        case Support::ConcaveSeat:
            contacts.has_seat = true;
            contacts.seat_radius = outer_radius;
            contacts.seat_azimuth = direction + M_PI;
            break;
        case Support::TwoPoint:
        case Support::ThreePoint: {
            contacts.peg_radius = 0.5 * r1;
            std::vector<double> offsets = support == Support::TwoPoint
                                              ? std::vector<double>{-M_PI / 6, M_PI / 6}
                                              : std::vector<double>{-5 * M_PI / 18, 0.0,
                                                                    5 * M_PI / 18};
            for (double off : offsets) {
                const double a = direction + M_PI + off;
                const double rc = outer_radius + contacts.peg_radius;
                contacts.peg_centers.emplace_back(rc * std::cos(a), rc * std::sin(a), 0.0);
            }
            break;
        }
        case Support::Free:
            break;
    }
    return contacts;
}

// Lumped vertex masses in tonnes.
Eigen::VectorXd lumped_masses(const ShellMesh& mesh, const MaterialParams& mat) {
    return (mat.density * mesh.geom.h) * lumped_vertex_areas(mesh);
}

// Diagonal stiffness bound via one colored FD probe would be overkill here;
// probing the analytic forces along coordinate axes at a handful of vertices
// gives the same scale. Returns max diagonal stiffness (N/mm).
double hessian_diag_bound(const ShellMesh& mesh, const MaterialParams& mat,
                          const Configuration& config) {
    const double step = 1e-6 * mesh.geom.r1;
    Eigen::Matrix3Xd fp, fm;
    Configuration work = config;
    double bound = 0.0;
    const int nv = mesh.vertex_count();
    const int stride = std::max(1, nv / 97);
    for (int v = 0; v < nv; v += stride) {
        for (int a = 0; a < 3; ++a) {
            work.positions(a, v) += step;
            elastic_energy_and_forces(mesh, mat, work, fp);
            work.positions(a, v) -= 2.0 * step;
            elastic_energy_and_forces(mesh, mat, work, fm);
            work.positions(a, v) += step;
            bound = std::max(bound, -(fp(a, v) - fm(a, v)) / (2.0 * step));
        }
    }
    return bound;
}

struct RelaxResult {
    Configuration config;
    double reaction = 0.0;
    int settle_steps = 0;
};

// Quasi-static re-settling of one indentation increment: an L-BFGS descent
// on the total (elastic + penalty) energy seeds a damped dynamic settle that
// runs until KE < opts.settle_ke_ratio * elastic energy.
RelaxResult relax_increment(const ShellMesh& mesh, const MaterialParams& mat,
                            const Configuration& start, const ContactSet& contacts,
                            const Eigen::Vector3d& reaction_dir, const Eigen::VectorXd& mass,
                            double dt, const IndentOptions& opts) {
    const int nv = mesh.vertex_count();
    Eigen::Matrix3Xd forces(3, nv);

    auto total_energy = [&](const Configuration& c, Eigen::Matrix3Xd& f, double& reaction,
                            double& pen) {
        EnergyBreakdown e = elastic_energy_and_forces(mesh, mat, c, f);
        const double ec = contacts.accumulate(c.positions, f, reaction_dir, reaction, pen);
        return e.total + ec;
    };

    Configuration x = start;
    double reaction = 0.0, pen = 0.0;
    double energy = total_energy(x, forces, reaction, pen);

    // L-BFGS phase (memory 8) on the flattened coordinates.
    const int dim = 3 * nv;
    std::deque<Eigen::VectorXd> s_hist, y_hist;
    Eigen::Map<Eigen::VectorXd> grad_map(forces.data(), dim);
    Eigen::VectorXd grad = -grad_map;
    const double tol_force = 1e-7 * mat.young_modulus * mesh.geom.h * mesh.geom.r1;
    const double cap = 0.05 * mesh.geom.r1;
    for (int iter = 0; iter < 600; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < tol_force) break;
        Eigen::VectorXd q = grad;
        std::vector<double> alpha(s_hist.size());
        for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
            const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
            alpha[k] = rho * s_hist[k].dot(q);
            q -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty())
            q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        else
            q *= 0.002 * mesh.geom.r1 / std::max(grad.lpNorm<Eigen::Infinity>(), 1e-300);
        for (size_t k = 0; k < s_hist.size(); ++k) {
            const double rho = 1.0 / y_hist[k].dot(s_hist[k]);
            q += (alpha[k] - rho * y_hist[k].dot(q)) * s_hist[k];
        }
        Eigen::VectorXd dir = -q;
        if (dir.dot(grad) >= 0.0) {
            dir = -grad * (0.002 * mesh.geom.r1 / grad.lpNorm<Eigen::Infinity>());
            s_hist.clear();
            y_hist.clear();
        }
        if (dir.lpNorm<Eigen::Infinity>() > cap) dir *= cap / dir.lpNorm<Eigen::Infinity>();

        double step = 1.0;
        bool ok = false;
        Configuration x_new = x;
        double e_new = 0.0;
        const double slope = dir.dot(grad);
        for (int ls = 0; ls < 40; ++ls) {
            Eigen::Map<Eigen::VectorXd>(x_new.positions.data(), dim) =
                Eigen::Map<const Eigen::VectorXd>(x.positions.data(), dim) + step * dir;
            try {
                e_new = total_energy(x_new, forces, reaction, pen);
            } catch (const DegenerateElement&) {
                step *= 0.5;
                continue;
            }
            if (e_new <= energy + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) break;
        Eigen::VectorXd g_new = -Eigen::Map<Eigen::VectorXd>(forces.data(), dim);
        Eigen::VectorXd s_vec = step * dir;
        Eigen::VectorXd y_vec = g_new - grad;
        if (s_vec.dot(y_vec) > 0.0) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            if (s_hist.size() > 8) {
                s_hist.pop_front();
                y_hist.pop_front();
            }
        }
        x = x_new;
        grad = std::move(g_new);
        energy = e_new;
    }

    // Damped dynamic settling with kinetic-energy peak resets certifies the
    // quasi-static criterion.
    Eigen::Matrix3Xd vel = Eigen::Matrix3Xd::Zero(3, nv);
    double ke_prev = 0.0;
    const double e_floor = 1e-12 * mat.young_modulus * mesh.geom.h * mesh.geom.r1 * mesh.geom.r1;
    int step_count = 0;
    for (; step_count < opts.max_settle_steps; ++step_count) {
        EnergyBreakdown ee = elastic_energy_and_forces(mesh, mat, x, forces);
        double worst = 0.0;
        contacts.accumulate(x.positions, forces, reaction_dir, reaction, worst);
        if (worst > contacts.validity)
            throw ContactFailure("penetration " + std::to_string(worst) + " exceeds h");

        double ke = 0.0;
        for (int v = 0; v < nv; ++v) {
            const Eigen::Vector3d a = forces.col(v) / mass[v];
            vel.col(v) += dt * a;
            ke += 0.5 * mass[v] * vel.col(v).squaredNorm();
        }
        if (ke < opts.settle_ke_ratio * std::max(ee.total, e_floor) && step_count >= 32) break;
        if (ke < ke_prev) {
            vel.setZero();  // kinetic damping: passed an energy peak
            ke = 0.0;
        }
        ke_prev = ke;
        x.positions += dt * vel;
    }
    if (step_count >= opts.max_settle_steps)
        throw NonConvergence("indentation settle exceeded step budget");

    RelaxResult out;
    double worst = 0.0;
    Eigen::Matrix3Xd tmp = Eigen::Matrix3Xd::Zero(3, nv);
    contacts.accumulate(x.positions, tmp, reaction_dir, out.reaction, worst);
    out.config = std::move(x);
    out.settle_steps = step_count;
    return out;
}

}  // namespace

IndentationCurve indent_quasistatic(const ShellMesh& mesh, const MaterialParams& mat,
                                    const EquilibriumResult& eq, double direction,
                                    Support support, double max_depth, int n_steps,
                                    const IndentOptions& opts) {
    if (!eq.converged) throw NotConverged("equilibrium did not converge");
    if (max_depth <= 0.0) throw UndefinedCritical("max_depth must be positive");
    if (max_depth >= 2.0 * mesh.geom.r1)
        throw InvalidGuess("max_depth must stay below 2*r1");
    if (n_steps < 2) throw InvalidGuess("need at least 2 increments");
    if (opts.verdict.has_value()) {
        if (*opts.verdict != Verdict::Bistable)
            throw NotBistable("shell must be bistable for indentation");
    } else {
        if (classify_bistability(mesh, mat, eq) != Verdict::Bistable)
            throw NotBistable("shell must be bistable for indentation");
    }

    const double k_c = opts.contact_stiffness_scale * mat.young_modulus * mesh.geom.h;
    const double outer = max_equatorial_radius(eq.lifted_config);
    const double r_ind = 0.5 * mesh.geom.r1;
    const Eigen::Vector3d dir(std::cos(direction), std::sin(direction), 0.0);

    ContactSet contacts = make_support(support, direction, outer, mesh.geom.r1, k_c,
                                       mesh.geom.h);
    contacts.has_indenter = true;
    contacts.indenter_radius = r_ind;
    contacts.k = k_c;
    contacts.validity = mesh.geom.h;

    const Eigen::VectorXd mass = lumped_masses(mesh, mat);
    const double k_max = hessian_diag_bound(mesh, mat, eq.lifted_config) + k_c;
    const double dt = 0.2 * std::sqrt(mass.minCoeff() / k_max);

    IndentationCurve curve;
    curve.direction = direction;
    curve.support = support;
    curve.depths.push_back(0.0);
    curve.forces.push_back(0.0);

    Configuration state = eq.lifted_config;
    double running_max = 0.0;
    for (int step = 1; step <= n_steps; ++step) {
        const double depth = max_depth * step / n_steps;
        contacts.indenter_center = dir * (outer + r_ind - depth);
        RelaxResult relaxed = relax_increment(mesh, mat, state, contacts, dir, mass, dt, opts);
        state = std::move(relaxed.config);
        curve.depths.push_back(depth);
        curve.forces.push_back(relaxed.reaction);
        running_max = std::max(running_max, relaxed.reaction);
        if (relaxed.reaction < (1.0 - opts.drop_fraction) * running_max &&
            running_max > 0.0) {
            curve.critical_defined = true;
            break;
        }
    }

    if (curve.critical_defined) {
        const auto it = std::max_element(curve.forces.begin(), curve.forces.end());
        curve.critical_force = *it;
        curve.critical_depth = curve.depths[std::distance(curve.forces.begin(), it)];
    }
    return curve;
}

SnapTrace simulate_snap(const ShellMesh& mesh, const MaterialParams& mat,
                        const EquilibriumResult& eq, const TriggerSpec& trigger,
                        double duration, const SnapOptions& opts) {
    if (!eq.converged) throw NotConverged("equilibrium did not converge");
    if (duration <= 0.0) throw InvalidGuess("duration must be positive");

    const int nv = mesh.vertex_count();
    const Eigen::VectorXd mass = lumped_masses(mesh, mat);
    const double k_max = hessian_diag_bound(mesh, mat, eq.lifted_config);
    const double dt = 0.2 * std::sqrt(mass.minCoeff() / k_max);

    double omega = opts.fundamental_omega;
    if (omega <= 0.0) {
        // Flexural frequency scale of the shell.
        const double nu = mat.poisson_ratio;
        const double d_stiff = mat.young_modulus * std::pow(mesh.geom.h, 3) /
                               (12.0 * (1.0 - nu * nu));
        omega = std::pow(M_PI / mesh.geom.r2, 2) *
                std::sqrt(d_stiff / (mat.density * mesh.geom.h));
    }
    const double alpha = opts.undamped_check
                             ? 0.0
                             : std::max(mat.rayleigh_mass_damping, 2.0 * opts.damping_ratio * omega);

    Configuration x = eq.lifted_config;
    Eigen::Matrix3Xd vel = Eigen::Matrix3Xd::Zero(3, nv);

    // Trigger: an initial velocity field normalized to the requested energy.
    if (trigger.energy > 0.0) {
        Eigen::Matrix3Xd pattern = Eigen::Matrix3Xd::Zero(3, nv);
        if (trigger.kind == TriggerSpec::Kind::ModeVelocity) {
            if (trigger.mode.size() != 3 * nv) throw DimensionMismatch("trigger mode size");
            pattern = Eigen::Map<const Eigen::Matrix3Xd>(trigger.mode.data(), 3, nv);
        } else {
            // Gaussian radial patch at the equator, aimed inward.
            const double outer = max_equatorial_radius(x);
            const Eigen::Vector3d dir(std::cos(trigger.direction), std::sin(trigger.direction),
                                      0.0);
            const Eigen::Vector3d center = dir * outer;
            const double width = 0.75 * mesh.geom.r1;
            for (int v = 0; v < nv; ++v) {
                const double dist2 = (x.positions.col(v) - center).squaredNorm();
                pattern.col(v) = -dir * std::exp(-dist2 / (width * width));
            }
        }
        double ke_pattern = 0.0;
        for (int v = 0; v < nv; ++v)
            ke_pattern += 0.5 * mass[v] * pattern.col(v).squaredNorm();
        if (ke_pattern <= 0.0) throw InvalidGuess("trigger pattern has zero energy");
        vel = pattern * std::sqrt(trigger.energy / ke_pattern);
    }

    const int n_total_steps = std::max(opts.n_samples, static_cast<int>(duration / dt) + 1);
    const int sample_every = std::max(1, n_total_steps / opts.n_samples);
    const int snapshot_every = std::max(1, n_total_steps / std::max(1, opts.n_snapshots));

    SnapTrace trace;
    Eigen::Matrix3Xd forces(3, nv);
    EnergyBreakdown ee = elastic_energy_and_forces(mesh, mat, x, forces);
    double dissipated = 0.0;
    double ke = 0.0;
    for (int v = 0; v < nv; ++v) ke += 0.5 * mass[v] * vel.col(v).squaredNorm();
    const double e0 = ke + ee.total;
    double peak_energy = std::max(e0, 1e-300);

    auto sample = [&](double t) {
        trace.times.push_back(t);
        trace.kinetic_energy.push_back(ke);
        trace.elastic_energy.push_back(ee.total);
        trace.dissipated.push_back(dissipated);
        trace.volume.push_back(enclosed_volume(mesh, x));
        const double residual = std::abs(ke + ee.total + dissipated - e0) / peak_energy;
        trace.max_ledger_residual = std::max(trace.max_ledger_residual, residual);
    };
    sample(0.0);

    for (int step = 1; step <= n_total_steps; ++step) {
        // Kick-drift-kick with mass-proportional damping on the half-step
        // velocity; dissipation accumulates as alpha * m * |v_half|^2 * dt.
        for (int v = 0; v < nv; ++v)
            vel.col(v) = (vel.col(v) + (0.5 * dt / mass[v]) * forces.col(v)) /
                         (1.0 + 0.5 * alpha * dt);
        x.positions += dt * vel;
        double diss_step = 0.0;
        for (int v = 0; v < nv; ++v) diss_step += alpha * mass[v] * vel.col(v).squaredNorm();
        dissipated += diss_step * dt;
        ee = elastic_energy_and_forces(mesh, mat, x, forces);
        ke = 0.0;
        for (int v = 0; v < nv; ++v) {
            vel.col(v) += (0.5 * dt / mass[v]) * forces.col(v) -
                          (0.5 * alpha * dt) * vel.col(v);
            ke += 0.5 * mass[v] * vel.col(v).squaredNorm();
        }
        peak_energy = std::max(peak_energy, ke + ee.total);

        if (step % sample_every == 0 || step == n_total_steps) sample(step * dt);
        if (step % snapshot_every == 0 &&
            static_cast<int>(trace.snapshots.size()) < opts.n_snapshots)
            trace.snapshots.push_back(x);

        if (opts.undamped_check &&
            ke + ee.total > (1.0 + 0.01) * std::max(e0, 1e-300) && e0 > 0.0)
            throw Instability("energy grew by more than 1% in undamped mode");
    }
    trace.final_config = x;
    return trace;
}

SnapSummary snap_summary(const SnapTrace& trace, const ShellMesh& mesh) {
    (void)mesh;
    const size_t n = trace.volume.size();
    if (n < 16) throw IncompleteCollapse("trace too short");

    const double v0 = trace.volume.front();
    const double vf = trace.volume.back();
    // Completion: volume plateaued within 1% over the last 10% of samples.
    const size_t tail_start = n - std::max<size_t>(2, n / 10);
    double tail_min = trace.volume[tail_start], tail_max = tail_min;
    for (size_t i = tail_start; i < n; ++i) {
        tail_min = std::min(tail_min, trace.volume[i]);
        tail_max = std::max(tail_max, trace.volume[i]);
    }
    if (tail_max - tail_min > 0.01 * std::abs(v0))
        throw IncompleteCollapse("volume has not plateaued");
    const double total_change = v0 - vf;
    if (std::abs(total_change) < 1e-6 * std::abs(v0))
        throw IncompleteCollapse("no volume contraction event");

    SnapSummary out;
    out.peak_kinetic_energy =
        *std::max_element(trace.kinetic_energy.begin(), trace.kinetic_energy.end());
    out.volume_ratio_final = vf / v0;
    // Time to reach 95% of the final volume change.
    const double target = v0 - 0.95 * total_change;
    out.collapse_duration = trace.times.back();
    for (size_t i = 0; i < n; ++i) {
        const bool reached = total_change > 0.0 ? trace.volume[i] <= target
                                                : trace.volume[i] >= target;
        if (reached) {
            out.collapse_duration = trace.times[i];
            break;
        }
    }
    return out;
}

double silhouette_area(const ShellMesh& mesh, const Configuration& config, double half_width,
                       int resolution) {
    const double cell = 2.0 * half_width / resolution;
    std::vector<char> hit(static_cast<size_t>(resolution) * resolution, 0);
    for (const auto& tri : mesh.triangles) {
        Eigen::Vector2d a = config.positions.col(tri[0]).head<2>();
        Eigen::Vector2d b = config.positions.col(tri[1]).head<2>();
        Eigen::Vector2d c = config.positions.col(tri[2]).head<2>();
        const double min_x = std::min({a.x(), b.x(), c.x()});
        const double max_x = std::max({a.x(), b.x(), c.x()});
        const double min_y = std::min({a.y(), b.y(), c.y()});
        const double max_y = std::max({a.y(), b.y(), c.y()});
        const int i0 = std::max(0, static_cast<int>((min_x + half_width) / cell));
        const int i1 = std::min(resolution - 1, static_cast<int>((max_x + half_width) / cell));
        const int j0 = std::max(0, static_cast<int>((min_y + half_width) / cell));
        const int j1 = std::min(resolution - 1, static_cast<int>((max_y + half_width) / cell));
        const Eigen::Vector2d ab = b - a, ac = c - a;
        const double det = ab.x() * ac.y() - ab.y() * ac.x();
        if (std::abs(det) < 1e-14) continue;
        for (int i = i0; i <= i1; ++i) {
            for (int j = j0; j <= j1; ++j) {
                const Eigen::Vector2d p(-half_width + (i + 0.5) * cell,
                                        -half_width + (j + 0.5) * cell);
                const Eigen::Vector2d ap = p - a;
                const double u = (ap.x() * ac.y() - ap.y() * ac.x()) / det;
                const double w = (ab.x() * ap.y() - ab.y() * ap.x()) / det;
                if (u >= 0.0 && w >= 0.0 && u + w <= 1.0)
                    hit[static_cast<size_t>(j) * resolution + i] = 1;
            }
        }
    }
    size_t count = 0;
    for (char c : hit) count += c;
    return static_cast<double>(count) * cell * cell;
}

UnitModel calibrate_unit_model(const ShellMesh& mesh, const IndentationCurve& curve,
                               const SnapSummary& summary, const SnapTrace& trace,
                               const EquilibriumResult& eq, const ShellGeometry& geom,
                               const MaterialParams& mat, double depth) {
    if (!curve.critical_defined) throw UndefinedCritical("indentation curve has no snap drop");

    UnitModel unit;
    unit.intact_radius = geom.r2 + geom.r1;
    unit.critical_force = curve.critical_force;
    unit.collapse_time = summary.collapse_duration;

    // Secant stiffness at half the critical depth.
    const double d_half = 0.5 * curve.critical_depth;
    double f_half = 0.0;
    for (size_t i = 1; i < curve.depths.size(); ++i) {
        if (curve.depths[i] >= d_half) {
            const double t =
                (d_half - curve.depths[i - 1]) / (curve.depths[i] - curve.depths[i - 1]);
            f_half = curve.forces[i - 1] + t * (curve.forces[i] - curve.forces[i - 1]);
            break;
        }
    }
    unit.contact_stiffness_intact = f_half / d_half;
    unit.contact_stiffness_collapsed = 10.0 * unit.contact_stiffness_intact;

    // Equatorial-plane silhouette contraction between the pre-snap and
    // final snapshots.
    const double frame = 1.05 * unit.intact_radius;
    const double area0 = silhouette_area(mesh, eq.lifted_config, frame);
    const double area1 = silhouette_area(mesh, trace.final_config, frame);
    if (area0 <= 0.0) throw IncompleteCollapse("empty initial silhouette");
    unit.collapsed_radius =
        unit.intact_radius * std::sqrt(std::clamp(area1 / area0, 1e-6, 1.0));

    // Released eversion energy: elastic drop from pre- to post-snap states.
    unit.snap_energy =
        std::max(0.0, trace.elastic_energy.front() - trace.elastic_energy.back());

    const double nominal_extent = 2.0 * geom.r1;
    unit.depth = depth;
    unit.mass = mat.density * geom.h * mesh.total_rest_area() * (depth / nominal_extent);
    unit.validate();
    return unit;
}

}  // namespace evershell
