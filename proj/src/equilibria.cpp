#include "evershell/equilibria.hpp"

#include <cmath>
#include <deque>

namespace evershell {

namespace {

void require_torus_mesh(const ShellMesh& mesh) {
    if (mesh.n_s <= 0 || mesh.n_theta <= 0)
        throw InvalidGuess("mesh is not a structured shell-of-revolution mesh");
}

// Reduced gradient: chain rule of the full force field through the lift.
// Returns dE/d(r_i), dE/d(z_i) with the mean-z mode projected out.
void reduced_gradient(const ShellMesh& mesh, const Eigen::Matrix3Xd& forces,
                      Eigen::VectorXd& grad_r, Eigen::VectorXd& grad_z) {
    const int n_s = mesh.n_s, n_theta = mesh.n_theta;
    grad_r.setZero(n_s);
    grad_z.setZero(n_s);
    for (int i = 0; i < n_s; ++i) {
        double gr = 0.0, gz = 0.0;
        for (int j = 0; j < n_theta; ++j) {
            const int v = mesh.vid(i, j);
            const double phi = 2.0 * M_PI * j / n_theta;
            gr -= forces(0, v) * std::cos(phi) + forces(1, v) * std::sin(phi);
            gz -= forces(2, v);
        }
        grad_r[i] = gr;
        grad_z[i] = gz;
    }
    grad_z.array() -= grad_z.mean();
}

}  // namespace

GeneratorState reference_generator(const ShellMesh& mesh) {
    require_torus_mesh(mesh);
    GeneratorState gen;
    gen.r.resize(mesh.n_s);
    gen.z.resize(mesh.n_s);
    for (int i = 0; i < mesh.n_s; ++i) {
        gen.r[i] = mesh.geom.r2 + mesh.geom.r1 * std::cos(mesh.alpha[i]);
        gen.z[i] = mesh.geom.r1 * std::sin(mesh.alpha[i]);
    }
    return gen;
}

GeneratorState mirrored_generator(const ShellMesh& mesh) {
    GeneratorState gen = reference_generator(mesh);
    gen.r = (2.0 * mesh.geom.r2 - gen.r.array()).matrix();
    return gen;
}

Configuration lift_generator(const ShellMesh& mesh, const GeneratorState& gen) {
    require_torus_mesh(mesh);
    if (gen.size() != mesh.n_s) throw InvalidGuess("generator size != n_s");
    Configuration config;
    config.positions.resize(3, mesh.vertex_count());
    for (int i = 0; i < mesh.n_s; ++i) {
        for (int j = 0; j < mesh.n_theta; ++j) {
            const double phi = 2.0 * M_PI * j / mesh.n_theta;
            config.positions.col(mesh.vid(i, j)) =
                Eigen::Vector3d(gen.r[i] * std::cos(phi), gen.r[i] * std::sin(phi), gen.z[i]);
        }
    }
    return config;
}

double solver_force_tolerance(const ShellMesh& mesh, const MaterialParams& mat,
                              const SolverOptions& opts) {
    return opts.tol_force_scale * mat.young_modulus * mesh.geom.h * mesh.geom.r1;
}

EquilibriumResult solve_axisymmetric_equilibrium(const ShellMesh& mesh,
                                                 const MaterialParams& mat,
                                                 const GeneratorState& guess,
                                                 const SolverOptions& opts) {
    require_torus_mesh(mesh);
    guess.validate();
    if (guess.size() != mesh.n_s) throw InvalidGuess("guess size != n_s");

    const int n = mesh.n_s;
    const double tol = solver_force_tolerance(mesh, mat, opts);

    // Pack (r, z) into one vector; z is pinned to zero mean throughout.
    auto pack = [n](const GeneratorState& g) {
        Eigen::VectorXd x(2 * n);
        x.head(n) = g.r;
        x.tail(n) = g.z;
        x.tail(n).array() -= g.z.mean();
        return x;
    };
    auto unpack = [n](const Eigen::VectorXd& x) {
        GeneratorState g;
        g.r = x.head(n);
        g.z = x.tail(n);
        return g;
    };

    Eigen::Matrix3Xd forces;
    auto evaluate = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                        EnergyBreakdown& energy) -> bool {
        GeneratorState g = unpack(x);
        if ((g.r.array() <= 1e-9 * mesh.geom.r1).any()) return false;
        Configuration config = lift_generator(mesh, g);
        try {
            energy = elastic_energy_and_forces(mesh, mat, config, forces);
        } catch (const DegenerateElement&) {
            return false;
        }
        Eigen::VectorXd gr, gz;
        reduced_gradient(mesh, forces, gr, gz);
        grad.resize(2 * n);
        grad.head(n) = gr;
        grad.tail(n) = gz;
        return true;
    };

    Eigen::VectorXd x = pack(guess);
    Eigen::VectorXd grad;
    EnergyBreakdown energy;
    if (!evaluate(x, grad, energy)) throw InvalidGuess("initial guess is degenerate");

    // Dense BFGS on the inverse Hessian; the reduced problem is only
    // 2*n_s-dimensional, so full updates are cheap and handle the stiff
    // membrane/bending mix far better than limited memory.
    const int dim = 2 * n;
    Eigen::MatrixXd h_inv;
    bool h_fresh = true;
    auto reset_h = [&]() {
        h_inv = (0.01 * mesh.geom.r1 / std::max(grad.lpNorm<Eigen::Infinity>(), 1e-300)) *
                Eigen::MatrixXd::Identity(dim, dim);
        h_fresh = true;
    };
    reset_h();

    EquilibriumResult result;
    int iter = 0;
    bool restarted = false;
    for (; iter < opts.max_iterations; ++iter) {
        const double gnorm = grad.lpNorm<Eigen::Infinity>();
        if (gnorm < tol) {
            result.converged = true;
            break;
        }
        if (gnorm < 100.0 * tol) break;  // hand off to the Newton polish

        Eigen::VectorXd dir = -(h_inv * grad);
        if (dir.dot(grad) >= 0.0) {
            reset_h();
            dir = -(h_inv * grad);
        }
        const double max_step = opts.max_step_scale * mesh.geom.r1;
        const double dir_norm = dir.lpNorm<Eigen::Infinity>();
        if (dir_norm > max_step) dir *= max_step / dir_norm;

        // Backtracking Armijo line search.
        double step = 1.0;
        const double slope = dir.dot(grad);
        bool accepted = false;
        Eigen::VectorXd x_new, grad_new;
        EnergyBreakdown energy_new;
        for (int ls = 0; ls < opts.max_line_search; ++ls) {
            x_new = x + step * dir;
            x_new.tail(n).array() -= x_new.tail(n).mean();
            if (evaluate(x_new, grad_new, energy_new) &&
                energy_new.total <= energy.total + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!restarted && iter < 10) {
                // Fallback guess: reference generator nudged inward by 1%.
                GeneratorState fallback = reference_generator(mesh);
                fallback.r *= 0.99;
                x = pack(fallback);
                if (!evaluate(x, grad, energy)) throw InvalidGuess("fallback guess degenerate");
                reset_h();
                restarted = true;
                continue;
            }
            if (grad.lpNorm<Eigen::Infinity>() < 1e5 * tol) break;  // polish takes over
            throw LineSearchFailure("no acceptable step at iteration " + std::to_string(iter));
        }

        const Eigen::VectorXd s_vec = x_new - x;
        const Eigen::VectorXd y_vec = grad_new - grad;
        const double sy = s_vec.dot(y_vec);
        if (sy > 1e-12 * s_vec.norm() * y_vec.norm()) {
            if (h_fresh) {
                h_inv = (sy / y_vec.squaredNorm()) * Eigen::MatrixXd::Identity(dim, dim);
                h_fresh = false;
            }
            const double rho = 1.0 / sy;
            const Eigen::VectorXd hy = h_inv * y_vec;
            // H+ = (I - rho s y^T) H (I - rho y s^T) + rho s s^T
            h_inv.noalias() -= rho * (s_vec * hy.transpose() + hy * s_vec.transpose());
            h_inv.noalias() +=
                (rho * rho * y_vec.dot(hy) + rho) * (s_vec * s_vec.transpose());
        }
        x = x_new;
        grad = grad_new;
        energy = energy_new;
    }

    // Near the minimum the Armijo test runs out of energy resolution (the
    // tolerance corresponds to energy differences at machine precision), so
    // finish with damped Newton on a finite-difference reduced Hessian,
    // accepting steps by gradient decrease.
    if (!result.converged && grad.lpNorm<Eigen::Infinity>() < 1e5 * tol) {
        const double fd_step = 1e-6 * mesh.geom.r1;
        Eigen::VectorXd g_work;
        EnergyBreakdown e_work;
        for (int polish = 0; polish < 40 && !result.converged; ++polish) {
            Eigen::MatrixXd h_red(dim, dim);
            Eigen::VectorXd xp = x, gp, gm;
            for (int d = 0; d < dim; ++d) {
                xp[d] = x[d] + fd_step;
                if (!evaluate(xp, gp, e_work)) throw NonConvergence("degenerate FD state");
                xp[d] = x[d] - fd_step;
                if (!evaluate(xp, gm, e_work)) throw NonConvergence("degenerate FD state");
                xp[d] = x[d];
                h_red.col(d) = (gp - gm) / (2.0 * fd_step);
            }
            h_red = 0.5 * (h_red + h_red.transpose()).eval();

            const double gnorm = grad.lpNorm<Eigen::Infinity>();
            bool improved = false;
            double mu = 0.0;
            const double mu_scale = h_red.diagonal().cwiseAbs().maxCoeff();
            for (int attempt = 0; attempt < 12 && !improved; ++attempt) {
                Eigen::MatrixXd h_mu = h_red;
                h_mu.diagonal().array() += mu;
                Eigen::VectorXd delta = h_mu.ldlt().solve(-grad);
                Eigen::VectorXd x_try = x + delta;
                x_try.tail(n).array() -= x_try.tail(n).mean();
                if (evaluate(x_try, g_work, e_work) &&
                    g_work.lpNorm<Eigen::Infinity>() < gnorm) {
                    x = x_try;
                    grad = g_work;
                    energy = e_work;
                    improved = true;
                } else {
                    mu = (mu == 0.0) ? 1e-8 * mu_scale : 10.0 * mu;
                }
            }
            if (grad.lpNorm<Eigen::Infinity>() < tol) result.converged = true;
            if (!improved) break;
        }
    }

    if (!result.converged)
        throw NonConvergence("iterations=" + std::to_string(iter) +
                             " residual=" + std::to_string(grad.lpNorm<Eigen::Infinity>()));

    result.generator = unpack(x);
    result.lifted_config = lift_generator(mesh, result.generator);
    result.energy = energy;
    result.grad_norm = grad.lpNorm<Eigen::Infinity>();
    result.iterations = iter;
    return result;
}

ResultantProfile stress_resultants(const ShellMesh& mesh, const MaterialParams& mat,
                                   const EquilibriumResult& eq) {
    if (!eq.converged) throw NotConverged("equilibrium did not converge");
    require_torus_mesh(mesh);

    const int n_s = mesh.n_s;
    ResultantProfile out;
    out.alpha = Eigen::Map<const Eigen::VectorXd>(mesh.alpha.data(), n_s);
    out.r = eq.generator.r;
    out.z = eq.generator.z;
    out.n_s.setZero(n_s);
    out.n_theta.setZero(n_s);

    Eigen::VectorXd weight = Eigen::VectorXd::Zero(n_s);
    const int nt = static_cast<int>(mesh.triangles.size());
    for (int t = 0; t < nt; ++t) {
        const Eigen::Matrix2d pk2 = membrane_pk2(mesh, mat, eq.lifted_config, t);
        // Rest frame axis 0 is the hoop direction, axis 1 the meridian.
        const double n_hoop = mesh.geom.h * pk2(0, 0);
        const double n_merid = mesh.geom.h * pk2(1, 1);
        const double a = mesh.rest_area[t];
        for (int k = 0; k < 3; ++k) {
            const int ring = mesh.triangles[t][k] / mesh.n_theta;
            out.n_theta[ring] += a * n_hoop;
            out.n_s[ring] += a * n_merid;
            weight[ring] += a;
        }
    }
    for (int i = 0; i < n_s; ++i) {
        if (weight[i] > 0.0) {
            out.n_theta[i] /= weight[i];
            out.n_s[i] /= weight[i];
        }
    }
    return out;
}

double energy_ratio_eta(const EquilibriumResult& eq) {
    if (!eq.converged) throw NotConverged("equilibrium did not converge");
    if (eq.energy.bending <= 0.0) throw ZeroBending("bending energy is zero");
    return std::sqrt(eq.energy.membrane / eq.energy.bending);
}

}  // namespace evershell
