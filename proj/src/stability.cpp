#include "evershell/stability.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

namespace evershell {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::Bistable: return "Bistable";
        case Verdict::Monostable: return "Monostable";
        default: return "Marginal";
    }
}

double eigenvalue_tolerance(const ShellGeometry& geom, const MaterialParams& mat,
                            const StabilityOptions& opts) {
    return opts.tol_eig_scale * mat.young_modulus * geom.h * geom.h * geom.h /
           (geom.r1 * geom.r1);
}

namespace {

// Dominant azimuthal Fourier index of the critical mode's normal
// displacement on the ring of largest mean radius; ties toward lower n.
int dominant_wavenumber(const ShellMesh& mesh, const EquilibriumResult& eq,
                        const Eigen::VectorXd& mode) {
    int ring = 0;
    double best_r = -1.0;
    for (int i = 0; i < mesh.n_s; ++i) {
        if (eq.generator.r[i] > best_r) {
            best_r = eq.generator.r[i];
            ring = i;
        }
    }
    const int m = mesh.n_theta;
    // Surface normal from the lifted configuration's local tangents.
    std::vector<double> w(m, 0.0);
    for (int j = 0; j < m; ++j) {
        const int v = mesh.vid(ring, j);
        const int v_next = mesh.vid(ring, (j + 1) % m);
        const int v_prev = mesh.vid(ring, (j + m - 1) % m);
        const int v_up = mesh.vid(std::min(ring + 1, mesh.n_s - 1), j);
        const int v_dn = mesh.vid(std::max(ring - 1, 0), j);
        const Eigen::Vector3d t_hoop =
            eq.lifted_config.positions.col(v_next) - eq.lifted_config.positions.col(v_prev);
        const Eigen::Vector3d t_merid =
            eq.lifted_config.positions.col(v_up) - eq.lifted_config.positions.col(v_dn);
        Eigen::Vector3d normal = t_hoop.cross(t_merid);
        const double nn = normal.norm();
        if (nn > 0.0) normal /= nn;
        w[j] = normal.dot(mode.segment<3>(3 * v));
    }
    int best_n = 0;
    double best_mag = -1.0;
    for (int nidx = 0; nidx <= m / 2; ++nidx) {
        double re = 0.0, im = 0.0;
        for (int j = 0; j < m; ++j) {
            const double ang = 2.0 * M_PI * nidx * j / m;
            re += w[j] * std::cos(ang);
            im += w[j] * std::sin(ang);
        }
        const double mag = re * re + im * im;
        if (mag > best_mag * (1.0 + 1e-12)) {
            best_mag = mag;
            best_n = nidx;
        }
    }
    return best_n;
}

}  // namespace

StabilityReport hessian_spectrum(const ShellMesh& mesh, const MaterialParams& mat,
                                 const EquilibriumResult& eq, int k,
                                 const StabilityOptions& opts) {
    if (!eq.converged) throw NotConverged("equilibrium did not converge");
    if (k < 8) throw EigenSolverFailure("k must be at least 8");

    StabilityReport report;
    report.tol_eig = eigenvalue_tolerance(mesh.geom, mat, opts);

    const double fd_step = opts.fd_step_scale * mesh.geom.r1;
    Eigen::SparseMatrix<double> hessian =
        assemble_hessian(mesh, mat, eq.lifted_config, fd_step, &report.hessian_asymmetry);
    const Eigen::MatrixXd rigid = rigid_body_basis(eq.lifted_config);

    EigenOptions eig_opts = opts.eigen;
    if (eig_opts.shift_hint <= 0.0) eig_opts.shift_hint = 1e5 * report.tol_eig;
    EigenResult eig = lowest_eigenpairs(hessian, rigid, k, eig_opts);

    // Degeneracy grouping at 2% relative splitting.
    report.lowest_eigenvalues.resize(k);
    for (int i = 0; i < k; ++i) report.lowest_eigenvalues[i].value = eig.values[i];
    int i = 0;
    while (i < k) {
        int j = i + 1;
        const double scale = std::max(std::abs(eig.values[i]), report.tol_eig);
        while (j < k && std::abs(eig.values[j] - eig.values[i]) < 0.02 * scale) ++j;
        for (int t = i; t < j; ++t) report.lowest_eigenvalues[t].multiplicity = j - i;
        i = j;
    }

    report.critical_mode = eig.vectors.col(0);
    report.critical_mode.normalize();
    report.max_rigid_projection =
        (rigid.transpose() * report.critical_mode).cwiseAbs().maxCoeff();
    report.azimuthal_wavenumber = dominant_wavenumber(mesh, eq, report.critical_mode);

    const double lambda_min = eig.values[0];
    if (lambda_min > report.tol_eig) report.verdict = Verdict::Bistable;
    else if (lambda_min < -report.tol_eig) report.verdict = Verdict::Monostable;
    else report.verdict = Verdict::Marginal;
    return report;
}

Verdict classify_bistability(const ShellMesh& mesh, const MaterialParams& mat,
                             const EquilibriumResult& eq, const StabilityOptions& opts) {
    StabilityReport report = hessian_spectrum(mesh, mat, eq, 12, opts);
    if (report.verdict != Verdict::Marginal || !opts.marginal_refine) return report.verdict;

    // One automatic resolution doubling for marginal verdicts.
    ShellMesh fine = build_reference_shell(mesh.geom, mat, 2 * mesh.n_s, 2 * mesh.n_theta);
    if (mesh.eversion_applied) fine = evert(fine);
    EquilibriumResult eq_fine =
        solve_axisymmetric_equilibrium(fine, mat, mirrored_generator(fine));
    StabilityOptions no_refine = opts;
    no_refine.marginal_refine = false;
    return hessian_spectrum(fine, mat, eq_fine, 12, no_refine).verdict;
}

LandscapeSample energy_landscape(const ShellMesh& mesh, const MaterialParams& mat,
                                 const EquilibriumResult& eq, const StabilityReport& report,
                                 const std::vector<double>& amplitudes) {
    if (!eq.converged) throw NotConverged("equilibrium did not converge");
    // Amplitudes must be symmetric about zero.
    std::vector<double> sorted = amplitudes;
    std::sort(sorted.begin(), sorted.end());
    const double amax = std::max(std::abs(sorted.front()), std::abs(sorted.back()));
    for (double a : sorted) {
        const bool has_partner =
            std::any_of(sorted.begin(), sorted.end(),
                        [a, amax](double b) { return std::abs(a + b) < 1e-9 * (amax + 1.0); });
        if (!has_partner) throw InvalidGuess("amplitude list is not symmetric about 0");
    }

    const double base = eq.energy.total;
    LandscapeSample sample;
    sample.amplitudes = amplitudes;
    sample.energies.reserve(amplitudes.size());
    Configuration work = eq.lifted_config;
    const Eigen::Map<const Eigen::Matrix3Xd> mode(report.critical_mode.data(), 3,
                                                  mesh.vertex_count());
    for (double phi : amplitudes) {
        work.positions = eq.lifted_config.positions + phi * mode;
        sample.energies.push_back(elastic_energy(mesh, mat, work).total - base);
    }
    return sample;
}

PhasePoint classify_geometry(const ShellGeometry& geom, const MaterialParams& mat,
                             const MeshResolution& resolution, const SolverOptions& solver_opts,
                             const StabilityOptions& stab_opts) {
    ShellMesh mesh = evert(build_reference_shell(geom, mat, resolution.n_s, resolution.n_theta));
    EquilibriumResult eq =
        solve_axisymmetric_equilibrium(mesh, mat, mirrored_generator(mesh), solver_opts);
    StabilityReport report = hessian_spectrum(mesh, mat, eq, 12, stab_opts);

    PhasePoint point;
    point.geom = geom;
    point.eta = compute_eta(geom);
    point.lambda_min = report.lowest_eigenvalues.front().value;
    point.wavenumber = report.azimuthal_wavenumber;
    point.verdict = report.verdict;
    if (report.verdict == Verdict::Marginal && stab_opts.marginal_refine) {
        point.verdict = classify_bistability(mesh, mat, eq, stab_opts);
    }
    return point;
}

namespace {

// Threshold in log(eta) minimizing misclassifications (bistable below,
// monostable above); deterministic scan over interval midpoints.
double misclassification_threshold(std::vector<std::pair<double, bool>> pts, int& best_err) {
    // pair: (log eta, is_monostable)
    std::sort(pts.begin(), pts.end());
    const int n = static_cast<int>(pts.size());
    best_err = n + 1;
    double best_t = pts.front().first - 1.0;
    for (int cut = 0; cut <= n; ++cut) {
        // classify indices < cut as bistable, >= cut as monostable
        int err = 0;
        for (int i = 0; i < n; ++i) {
            const bool predicted_mono = i >= cut;
            if (predicted_mono != pts[i].second) ++err;
        }
        if (err < best_err) {
            best_err = err;
            if (cut == 0) best_t = pts.front().first - 0.1;
            else if (cut == n) best_t = pts.back().first + 0.1;
            else best_t = 0.5 * (pts[cut - 1].first + pts[cut].first);
        }
    }
    return best_t;
}

// Two-parameter logistic fit P(mono) = sigmoid(a (x - c)) by Newton steps
// with a small ridge; returns c (falls back to the scan threshold).
double logistic_center(const std::vector<std::pair<double, bool>>& pts, double scan_center) {
    double a = 4.0, c = scan_center;
    for (int it = 0; it < 60; ++it) {
        double g_a = 0.0, g_c = 0.0, h_aa = 1e-6, h_cc = 1e-6, h_ac = 0.0;
        for (const auto& [x, mono] : pts) {
            const double t = a * (x - c);
            const double p = 1.0 / (1.0 + std::exp(-t));
            const double y = mono ? 1.0 : 0.0;
            const double r = p - y;
            const double w = p * (1.0 - p);
            g_a += r * (x - c);
            g_c += r * (-a);
            h_aa += w * (x - c) * (x - c);
            h_cc += w * a * a;
            h_ac += w * (x - c) * (-a);
        }
        const double det = h_aa * h_cc - h_ac * h_ac;
        if (std::abs(det) < 1e-30) break;
        const double da = (-g_a * h_cc + g_c * h_ac) / det;
        const double dc = (-h_aa * g_c + h_ac * g_a) / det;
        a += da;
        c += dc;
        a = std::clamp(a, 0.1, 200.0);
        if (std::abs(da) + std::abs(dc) < 1e-10) break;
    }
    if (!std::isfinite(c)) return scan_center;
    return c;
}

}  // namespace

PhaseDiagram phase_diagram_sweep(const std::vector<ShellGeometry>& grid,
                                 const MaterialParams& mat, const MeshResolution& resolution,
                                 const SweepOptions& opts) {
    // Pre-validate the grid span: at least 3 slenderness ratios, 4 thicknesses.
    {
        std::vector<double> ratios, thicknesses;
        for (const auto& g : grid) {
            ratios.push_back(g.r2 / g.r1);
            thicknesses.push_back(g.h);
        }
        auto count_distinct = [](std::vector<double> v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                    v.end());
            return v.size();
        };
        if (count_distinct(ratios) < 3 || count_distinct(thicknesses) < 4)
            throw InvalidGuess("grid must span >= 3 slenderness ratios and >= 4 thicknesses");
    }

    auto classify_one = [&](const ShellGeometry& g) {
        return classify_geometry(g, mat, resolution, opts.solver, opts.stability);
    };

    PhaseDiagram diagram;
    diagram.points.resize(grid.size());
    if (opts.max_parallel > 1) {
        std::vector<std::future<PhasePoint>> jobs;
        jobs.reserve(grid.size());
        size_t next = 0;
        while (next < grid.size() || !jobs.empty()) {
            while (next < grid.size() &&
                   jobs.size() < static_cast<size_t>(opts.max_parallel)) {
                jobs.push_back(std::async(std::launch::async, classify_one, grid[next]));
                ++next;
            }
            const size_t idx = next - jobs.size();
            diagram.points[idx] = jobs.front().get();
            jobs.erase(jobs.begin());
        }
    } else {
        for (size_t i = 0; i < grid.size(); ++i) diagram.points[i] = classify_one(grid[i]);
    }

    std::vector<std::pair<double, bool>> labeled;
    bool any_bi = false, any_mono = false;
    for (const auto& p : diagram.points) {
        if (p.verdict == Verdict::Marginal) continue;
        const bool mono = p.verdict == Verdict::Monostable;
        any_bi |= !mono;
        any_mono |= mono;
        labeled.emplace_back(std::log(p.eta), mono);
    }
    if (!any_bi || !any_mono)
        throw FitFailure("grid contains a single stability class");

    int misclassified = 0;
    const double scan_center = misclassification_threshold(labeled, misclassified);
    const double center = logistic_center(labeled, scan_center);
    diagram.misclassified = misclassified;
    diagram.fitted_eta_c = std::exp(center);

    // Per-slenderness critical thickness by bracket + optional bisection.
    std::vector<double> ratios;
    for (const auto& p : diagram.points) ratios.push_back(p.geom.r2 / p.geom.r1);
    std::sort(ratios.begin(), ratios.end());
    ratios.erase(std::unique(ratios.begin(), ratios.end(),
                             [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                 ratios.end());

    for (double s : ratios) {
        double h_bi = 0.0, h_mono = 0.0;
        ShellGeometry proto;
        for (const auto& p : diagram.points) {
            if (std::abs(p.geom.r2 / p.geom.r1 - s) > 1e-9) continue;
            proto = p.geom;
            if (p.verdict == Verdict::Bistable) h_bi = std::max(h_bi, p.geom.h);
            if (p.verdict == Verdict::Monostable)
                h_mono = (h_mono == 0.0) ? p.geom.h : std::min(h_mono, p.geom.h);
        }
        if (h_bi == 0.0 || h_mono == 0.0 || h_mono < h_bi) continue;

        if (opts.refine) {
            for (int step = 0; step < opts.max_bisection; ++step) {
                ShellGeometry mid = proto;
                mid.h = std::sqrt(h_bi * h_mono);
                PhasePoint p = classify_one(mid);
                diagram.points.push_back(p);
                if (p.verdict == Verdict::Monostable) h_mono = mid.h;
                else h_bi = mid.h;
            }
        }
        diagram.slenderness.push_back(s);
        diagram.critical_thickness.push_back(std::sqrt(h_bi * h_mono));
        diagram.eta_c_per_slenderness.push_back(std::sqrt(h_bi * h_mono) / proto.r2 * s * s);
    }

    if (diagram.slenderness.size() >= 2) {
        // log(h_c / r2) = slope * log(r1/r2) + log(eta_c)
        const int m = static_cast<int>(diagram.slenderness.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
        for (int i = 0; i < m; ++i) {
            // Use the r2 of the first matching point for normalization.
            double r2 = 0.0;
            for (const auto& p : diagram.points)
                if (std::abs(p.geom.r2 / p.geom.r1 - diagram.slenderness[i]) < 1e-9) {
                    r2 = p.geom.r2;
                    break;
                }
            const double x = std::log(1.0 / diagram.slenderness[i]);  // log(r1/r2)
            const double y = std::log(diagram.critical_thickness[i] / r2);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
            syy += y * y;
        }
        const double denom = m * sxx - sx * sx;
        diagram.slope = (m * sxy - sx * sy) / denom;
        const double intercept = (sy - diagram.slope * sx) / m;
        (void)intercept;
        const double ss_tot = syy - sy * sy / m;
        const double ss_res = ss_tot - diagram.slope * (sxy - sx * sy / m);
        diagram.fit_quality = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    }
    return diagram;
}

}  // namespace evershell
