#include "vstates/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "vstates/errors.hpp"

namespace vstates {

namespace {

// Interleaved residual vector (B_{1,1}, B_{2,1}, B_{1,2}, ...).
Eigen::VectorXd residual_vec(const PatchState& s, const SpectralGrid& g, double* sup = nullptr) {
    const ResidualVector r = eval_G(s, g);
    const int N = g.modes;
    Eigen::VectorXd out(2 * N);
    for (int n = 0; n < N; ++n) {
        out(2 * n) = r.outer_modes[n];
        out(2 * n + 1) = r.inner_modes[n];
    }
    if (sup) *sup = r.sup_norm;
    return out;
}

PatchState state_from(const ContinuationContext& ctx, const Eigen::VectorXd& u) {
    const int N = ctx.grid.modes;
    PatchState s = trivial_state(ctx.m, ctx.b, u(2 * N), N);
    for (int n = 0; n < N; ++n) {
        s.outer.coeffs[n] = u(2 * n);
        s.inner.coeffs[n] = u(2 * n + 1);
    }
    return s;
}

Eigen::VectorXd pack(const PatchState& s) {
    const int N = static_cast<int>(s.outer.coeffs.size());
    Eigen::VectorXd u(2 * N + 1);
    for (int n = 0; n < N; ++n) {
        u(2 * n) = s.outer.coeffs[n];
        u(2 * n + 1) = s.inner.coeffs[n];
    }
    u(2 * N) = s.lambda;
    return u;
}

// Scaled metric used by the arclength constraint.
Eigen::VectorXd scale_u(const ContinuationContext& ctx, const Eigen::VectorXd& u) {
    Eigen::VectorXd y = u;
    y.head(u.size() - 1) /= ctx.kd.norm_v();
    return y;
}

// Bordered Newton solver with a cached finite-difference Jacobian of the
// residual. The constraint row is linear in u, so it is rebuilt per call and
// never differenced.
class Corrector {
  public:
    explicit Corrector(const ContinuationContext& ctx) : ctx_(ctx) {}

    void invalidate() { jac_valid_ = false; }
    int last_iters() const { return last_iters_; }
    bool last_used_fresh_jacobian() const { return last_fresh_; }

    // u = (coeffs, lambda); constraint c(u) = g . u - rhs. Chord Newton with a
    // cached Jacobian; a stalling or diverging iteration triggers one refresh
    // at the current iterate before giving up.
    BranchPoint correct(Eigen::VectorXd u, const Eigen::VectorXd& cgrad, double crhs) {
        const int N = ctx_.grid.modes;
        const int dim = 2 * N + 1;
        double sup = 0.0;
        last_iters_ = 0;
        last_fresh_ = false;
        for (int attempt = 0; attempt < 2; ++attempt) {
            if (!jac_valid_) {
                rebuild_jacobian(u); // geometry_error propagates: guess inadmissible
                last_fresh_ = true;
            }
            Eigen::MatrixXd A(dim, dim);
            A.topRows(2 * N) = jac_;
            A.row(2 * N) = cgrad.transpose();
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);

            // convergence is judged on the projected (Galerkin) residual the
            // Newton system actually controls; sup_norm additionally carries
            // the truncation tail and is reported, not enforced, here
            double best_rn = std::numeric_limits<double>::max();
            Eigen::VectorXd u_best = u;
            int no_progress = 0;
            for (int it = 0; it < ctx_.newton.max_iter; ++it, ++last_iters_) {
                Eigen::VectorXd r;
                try {
                    r = residual_vec(state_from(ctx_, u), ctx_.grid, &sup);
                } catch (const geometry_error&) {
                    break; // iterate left the admissible region: refresh or fail
                }
                const double rn = r.lpNorm<Eigen::Infinity>();
                const double c = cgrad.dot(u) - crhs;
                if (rn < ctx_.newton.tol && std::abs(c) < 1e-10) return finish(u, sup);
                if (!std::isfinite(rn) || rn > 10.0 * best_rn) break;
                no_progress = rn > 0.9 * best_rn ? no_progress + 1 : 0;
                if (no_progress >= 5) {
                    // stalled at the roundoff floor: accept if the best
                    // iterate is within a small factor of the tolerance
                    if (best_rn < 50.0 * ctx_.newton.tol) {
                        double bs;
                        residual_vec(state_from(ctx_, u_best), ctx_.grid, &bs);
                        return finish(u_best, bs);
                    }
                    break;
                }
                if (rn < best_rn) u_best = u;
                best_rn = std::min(best_rn, rn);
                Eigen::VectorXd rhs(dim);
                rhs.head(2 * N) = -r;
                rhs(2 * N) = -c;
                const Eigen::VectorXd du = lu.solve(rhs);
                if (!du.allFinite())
                    throw singularity_error("bordered Newton solve returned non-finite step");
                u += du;
            }
            u = u_best; // refresh the Jacobian at the best iterate seen
            jac_valid_ = false;
        }
        throw newton_failure("corrector did not reach tolerance");
    }

  private:
    void rebuild_jacobian(const Eigen::VectorXd& u) {
        const int N = ctx_.grid.modes;
        jac_.resize(2 * N, 2 * N + 1);
        const Eigen::VectorXd r0 = residual_vec(state_from(ctx_, u), ctx_.grid);
        const double h = ctx_.newton.fd_step;
        // exceptions must not escape the OpenMP region; capture and rethrow
        std::exception_ptr err;
#pragma omp parallel for schedule(static)
        for (int j = 0; j < 2 * N + 1; ++j) {
            try {
                Eigen::VectorXd up = u;
                up(j) += h;
                jac_.col(j) = (residual_vec(state_from(ctx_, up), ctx_.grid) - r0) / h;
            } catch (...) {
#pragma omp critical
                {
                    if (!err) err = std::current_exception();
                }
            }
        }
        if (err) std::rethrow_exception(err);
        jac_valid_ = true;
    }

    BranchPoint finish(const Eigen::VectorXd& u, double sup) {
        const int N = ctx_.grid.modes;
        BranchPoint p;
        p.lambda = u(2 * N);
        p.omega = 0.5 * (1.0 - p.lambda);
        p.coeffs.assign(u.data(), u.data() + 2 * N);
        p.t = kernel_amplitude(ctx_, p.coeffs);
        p.residual_sup = sup;
        return p;
    }

    const ContinuationContext& ctx_;
    Eigen::MatrixXd jac_;
    bool jac_valid_ = false;
    int last_iters_ = 0;
    bool last_fresh_ = false;
};

Eigen::VectorXd point_y(const ContinuationContext& ctx, const BranchPoint& p) {
    const int n = static_cast<int>(p.coeffs.size());
    Eigen::VectorXd y(n + 1);
    for (int i = 0; i < n; ++i) y(i) = p.coeffs[i] / ctx.kd.norm_v();
    y(n) = p.lambda;
    return y;
}

double fine_residual(const ContinuationContext& ctx, const BranchPoint& p) {
    SpectralGrid fine(ctx.grid.modes, ctx.m, 2 * ctx.grid.nodes);
    return eval_G(make_state(ctx, p.lambda, p.coeffs), fine).sup_norm;
}

} // namespace

ContinuationContext::ContinuationContext(int m_, double b_, BranchSign sign_, SpectralGrid grid_,
                                         NewtonOptions newton_)
    : m(m_), b(b_), sign(sign_), grid(grid_), newton(newton_),
      kd(kernel_data(m_, b_, sign_)), eig(eigenvalues(m_, b_)) {}

PatchState make_state(const ContinuationContext& ctx, double lambda,
                      std::span<const double> coeffs) {
    const int N = ctx.grid.modes;
    PatchState s = trivial_state(ctx.m, ctx.b, lambda, N);
    for (int n = 0; n < N; ++n) {
        s.outer.coeffs[n] = coeffs[2 * n];
        s.inner.coeffs[n] = coeffs[2 * n + 1];
    }
    return s;
}

double kernel_amplitude(const ContinuationContext& ctx, std::span<const double> coeffs) {
    const double nv2 = ctx.kd.v1 * ctx.kd.v1 + ctx.kd.v2 * ctx.kd.v2;
    return (coeffs[0] * ctx.kd.v1 + coeffs[1] * ctx.kd.v2) / nv2;
}

Eigen::MatrixXd jacobian_fd(const PatchState& state, const SpectralGrid& grid, double h) {
    if (h < 1e-8 || h > 1e-4)
        throw std::domain_error("jacobian_fd: step must lie in [1e-8, 1e-4]");
    const int N = grid.modes;
    Eigen::MatrixXd J(2 * N, 2 * N);
#pragma omp parallel for schedule(static)
    for (int j = 0; j < 2 * N; ++j) {
        PatchState sp = state, sm = state;
        auto& cp = (j % 2 == 0) ? sp.outer.coeffs : sp.inner.coeffs;
        auto& cm = (j % 2 == 0) ? sm.outer.coeffs : sm.inner.coeffs;
        cp[j / 2] += h;
        cm[j / 2] -= h;
        J.col(j) = (residual_vec(sp, grid) - residual_vec(sm, grid)) / (2.0 * h);
    }
    return J;
}

BranchPoint newton_correct(const ContinuationContext& ctx, const PatchState& guess,
                           const CorrectorMode& mode) {
    const int N = ctx.grid.modes;
    const Eigen::VectorXd u0 = pack(guess);

    if (std::holds_alternative<FixedLambdaMode>(mode)) {
        // Lambda is pinned; solve the square 2N system, refusing a singular
        // Jacobian (bifurcation point) outright.
        Eigen::VectorXd u = u0;
        double sup = 0.0;
        Eigen::VectorXd r = residual_vec(state_from(ctx, u), ctx.grid, &sup);
        Eigen::MatrixXd J = jacobian_fd(state_from(ctx, u), ctx.grid, 1e-7);
        Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        lu.setThreshold(1e-9);
        if (!lu.isInvertible())
            throw singularity_error("Jacobian singular at fixed lambda (near an eigenvalue)");
        for (int it = 0; it < ctx.newton.max_iter; ++it) {
            if (r.lpNorm<Eigen::Infinity>() < ctx.newton.tol) {
                BranchPoint p;
                p.lambda = u(2 * N);
                p.omega = 0.5 * (1.0 - p.lambda);
                p.coeffs.assign(u.data(), u.data() + 2 * N);
                p.t = kernel_amplitude(ctx, p.coeffs);
                p.residual_sup = sup;
                return p;
            }
            u.head(2 * N) -= lu.solve(r);
            r = residual_vec(state_from(ctx, u), ctx.grid, &sup);
            if (it > 2 && it % 3 == 0 && r.lpNorm<Eigen::Infinity>() > ctx.newton.tol) {
                J = jacobian_fd(state_from(ctx, u), ctx.grid, 1e-7);
                lu.compute(J);
                lu.setThreshold(1e-9);
                if (!lu.isInvertible())
                    throw singularity_error("Jacobian became singular during fixed-lambda Newton");
            }
        }
        throw newton_failure("fixed-lambda Newton did not converge");
    }

    Corrector corr(ctx);
    Eigen::VectorXd cgrad = Eigen::VectorXd::Zero(2 * N + 1);
    double crhs = 0.0;
    if (const auto* al = std::get_if<ArclengthMode>(&mode)) {
        cgrad.head(2 * N) = al->tangent.head(2 * N) / ctx.kd.norm_v();
        cgrad(2 * N) = al->tangent(2 * N);
        crhs = al->tangent.dot(al->y_base) + al->ds;
    } else {
        const auto& pin = std::get<PinnedAmplitudeMode>(mode);
        const double nv2 = ctx.kd.v1 * ctx.kd.v1 + ctx.kd.v2 * ctx.kd.v2;
        cgrad(0) = ctx.kd.v1 / nv2;
        cgrad(1) = ctx.kd.v2 / nv2;
        crhs = pin.t0;
    }
    return corr.correct(u0, cgrad, crhs);
}

BranchPoint branch_switch(const ContinuationContext& ctx, double dt0) {
    if (!(ctx.eig.delta > 1e-12))
        throw no_bifurcation_error("Delta_m <= 0: no simple eigenvalue to switch at");
    PatchState guess = trivial_state(ctx.m, ctx.b, ctx.kd.lambda_star, ctx.grid.modes);
    guess.outer.coeffs[0] = dt0 * ctx.kd.v1;
    guess.inner.coeffs[0] = dt0 * ctx.kd.v2;
    return newton_correct(ctx, guess, PinnedAmplitudeMode{dt0});
}

Branch trace_loop(const ContinuationContext& ctx, const TraceOptions& opts) {
    const int N = ctx.grid.modes;
    Branch br;
    br.m = ctx.m;
    br.b = ctx.b;
    br.origin_sign = ctx.sign;

    const double dt0 = opts.dt0 > 0.0 ? opts.dt0 : opts.ds0;
    const double ds_max = opts.ds_max > 0.0 ? opts.ds_max : 8.0 * opts.ds0;

    BranchPoint first = branch_switch(ctx, dt0);
    if (opts.fine_residual_check) first.residual_fine = fine_residual(ctx, first);
    first.arclength = 0.0;
    br.points.push_back(first);
    br.trivial_hits.push_back(ctx.kd.lambda_star); // the loop emanates from the annulus here

    Eigen::VectorXd y_first = point_y(ctx, first);
    Eigen::VectorXd y_trivial = Eigen::VectorXd::Zero(2 * N + 1);
    y_trivial(2 * N) = ctx.kd.lambda_star;
    Eigen::VectorXd tangent = (y_first - y_trivial).normalized();
    Eigen::VectorXd y_cur = y_first;

    Corrector corr(ctx);
    double ds = opts.ds0;
    double arclength = 0.0;
    int easy = 0;

    for (int step = 0; step < opts.max_steps; ++step) {
        Eigen::VectorXd y_pred = y_cur + ds * tangent;
        Eigen::VectorXd u_pred(2 * N + 1);
        u_pred.head(2 * N) = y_pred.head(2 * N) * ctx.kd.norm_v();
        u_pred(2 * N) = y_pred(2 * N);

        BranchPoint pt;
        try {
            Eigen::VectorXd cgrad(2 * N + 1);
            cgrad.head(2 * N) = tangent.head(2 * N) / ctx.kd.norm_v();
            cgrad(2 * N) = tangent(2 * N);
            pt = corr.correct(u_pred, cgrad, tangent.dot(y_cur) + ds);
        } catch (const newton_failure&) {
            corr.invalidate();
            ds *= 0.5;
            easy = 0;
            if (ds < opts.ds_min) {
                br.stop_reason = "stall";
                return br;
            }
            continue;
        } catch (const singularity_error&) {
            corr.invalidate();
            ds *= 0.5;
            easy = 0;
            if (ds < opts.ds_min) {
                br.stop_reason = "stall";
                return br;
            }
            continue;
        } catch (const geometry_error&) {
            // predictor (or an FD neighbour) violated the univalence guard:
            // retry with a shorter step before declaring the branch gone
            corr.invalidate();
            ds *= 0.5;
            easy = 0;
            if (ds < opts.ds_min) {
                br.stop_reason = "left perturbative regime";
                return br;
            }
            continue;
        }

        if (pt.residual_sup > opts.sup_tol) {
            // converged in the projected norm but carrying a large tail:
            // spurious near-fold solution, reject and shorten the step
            corr.invalidate();
            ds *= 0.5;
            easy = 0;
            if (ds < opts.ds_min) {
                br.stop_reason = "stall";
                return br;
            }
            continue;
        }

        if (opts.fine_residual_check) pt.residual_fine = fine_residual(ctx, pt);
        const Eigen::VectorXd y_new = point_y(ctx, pt);
        arclength += (y_new - y_cur).norm();
        pt.arclength = arclength;

        // Trivial-branch crossing: t changes sign between consecutive points.
        // The loop meets the trivial branch with a vertical tangent
        // (lambda ~ lambda_hit + kappa t^2), so interpolate lambda(t) through
        // the three nearest points and evaluate at t = 0.
        const BranchPoint& prev = br.points.back();
        if (prev.t * pt.t < 0.0 || std::abs(pt.t) < opts.t_tol) {
            double lam_hit;
            if (br.points.size() >= 2) {
                const BranchPoint& prev2 = br.points[br.points.size() - 2];
                const double t0 = prev2.t, t1 = prev.t, t2 = pt.t;
                lam_hit = prev2.lambda * (t1 * t2) / ((t0 - t1) * (t0 - t2)) +
                          prev.lambda * (t0 * t2) / ((t1 - t0) * (t1 - t2)) +
                          pt.lambda * (t0 * t1) / ((t2 - t0) * (t2 - t1));
            } else if (std::abs(pt.t - prev.t) > 0.0) {
                lam_hit = prev.lambda - prev.t * (pt.lambda - prev.lambda) / (pt.t - prev.t);
            } else {
                lam_hit = pt.lambda;
            }
            bool fresh = true;
            for (double h : br.trivial_hits) fresh = fresh && std::abs(h - lam_hit) > 1e-3;
            if (fresh) br.trivial_hits.push_back(lam_hit);
        }

        br.points.push_back(pt);

        if (arclength > 10.0 * opts.ds0 && (y_new - y_first).norm() < 3.0 * ds) {
            br.closed = true;
            br.stop_reason = "closed";
            return br;
        }

        tangent = (y_new - y_cur).normalized();
        y_cur = y_new;

        // a slow chord iteration means the cached Jacobian went stale; rebuild
        // it at the next step rather than shrinking ds
        if (corr.last_iters() > 12) corr.invalidate();
        if (corr.last_iters() <= 10) {
            if (++easy >= 2) {
                ds = std::min(ds * 1.3, ds_max);
                easy = 0;
            }
        } else {
            easy = 0;
        }
    }
    br.stop_reason = "max_steps";
    return br;
}

namespace {

// Inner Lyapunov-Schmidt solve: given (lambda, t), find k in the complement
// space (mode 1 pinned to the (1,0) direction, modes n >= 2 free) such that
// (Id - Q) G(lambda, t v_m + k) = 0. Returns the B_1 pair of the solution.
Eigen::Vector2d complement_solve(const ContinuationContext& ctx, double lambda, double t) {
    const int N = ctx.grid.modes;
    const int K = 2 * N - 1; // alpha + (N-1) coefficient pairs
    const double b2m = std::pow(ctx.b, 2 * ctx.m);
    const double nrm = std::sqrt(ctx.kd.p * ctx.kd.p + b2m);
    const double wp1 = std::pow(ctx.b, ctx.m) / nrm; // unit vector spanning the
    const double wp2 = ctx.kd.p / nrm;               // mode-1 range direction

    auto build_coeffs = [&](const Eigen::VectorXd& y) {
        std::vector<double> c(2 * N, 0.0);
        c[0] = t * ctx.kd.v1 + y(0);
        c[1] = t * ctx.kd.v2;
        for (int n = 2; n <= N; ++n) {
            c[2 * (n - 1)] = y(2 * n - 3);
            c[2 * (n - 1) + 1] = y(2 * n - 2);
        }
        return c;
    };
    Eigen::Vector2d b1;
    auto reduced_residual = [&](const Eigen::VectorXd& y) {
        const auto c = build_coeffs(y);
        const ResidualVector r = eval_G(make_state(ctx, lambda, c), ctx.grid);
        b1 = {r.outer_modes[0], r.inner_modes[0]};
        Eigen::VectorXd out(K);
        out(0) = b1(0) * wp1 + b1(1) * wp2;
        for (int n = 2; n <= N; ++n) {
            out(2 * n - 3) = r.outer_modes[n - 1];
            out(2 * n - 2) = r.inner_modes[n - 1];
        }
        return out;
    };

    Eigen::VectorXd y = Eigen::VectorXd::Zero(K);
    Eigen::VectorXd r = reduced_residual(y);
    Eigen::MatrixXd J(K, K);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    const double h = ctx.newton.fd_step;
    bool have_jac = false;
    for (int it = 0; it < ctx.newton.max_iter; ++it) {
        if (r.lpNorm<Eigen::Infinity>() < ctx.newton.tol) return b1;
        if (!have_jac || (it > 0 && it % 6 == 0)) {
            Eigen::Vector2d b1_save = b1;
            for (int j = 0; j < K; ++j) {
                Eigen::VectorXd yp = y;
                yp(j) += h;
                J.col(j) = (reduced_residual(yp) - r) / h;
            }
            b1 = b1_save;
            lu.compute(J);
            have_jac = true;
        }
        y -= lu.solve(r);
        r = reduced_residual(y);
    }
    throw newton_failure("reduction inner solve did not converge");
}

} // namespace

double reduced_function(const ContinuationContext& ctx, double lambda, double t) {
    const Eigen::Vector2d b1 = complement_solve(ctx, lambda, t);
    return b1(0) * ctx.kd.what1 + b1(1) * ctx.kd.what2;
}

double reduced_f2(const ContinuationContext& ctx, double lambda, double t) {
    if (t == 0.0) throw std::domain_error("reduced_f2: t must be nonzero (divided form)");
    return reduced_function(ctx, lambda, t) / t;
}

BranchPoint reflect_point(const BranchPoint& p) {
    BranchPoint q = p;
    for (std::size_t i = 0; i < p.coeffs.size(); ++i) {
        const int n = static_cast<int>(i / 2) + 1;
        if (n % 2 == 1) q.coeffs[i] = -q.coeffs[i];
    }
    q.t = -p.t;
    return q;
}

double reflection_hausdorff(const ContinuationContext& ctx, const Branch& br) {
    std::vector<Eigen::VectorXd> ys, yr;
    ys.reserve(br.points.size());
    yr.reserve(br.points.size());
    for (const auto& p : br.points) {
        ys.push_back(point_y(ctx, p));
        yr.push_back(point_y(ctx, reflect_point(p)));
    }
    double worst = 0.0;
    for (const auto& a : ys) {
        double best = std::numeric_limits<double>::max();
        for (const auto& r : yr) best = std::min(best, (a - r).norm());
        worst = std::max(worst, best);
    }
    return worst;
}

double estimate_bm(int m, BranchSign sign, double b_lo, double b_hi, int bisect_iters,
                   const TraceOptions& opts, int modes, const NewtonOptions& newton) {
    auto closes = [&](double b) {
        try {
            ContinuationContext ctx(m, b, sign, SpectralGrid(modes, m), newton);
            return trace_loop(ctx, opts).closed;
        } catch (const std::exception&) {
            return false;
        }
    };
    for (int i = 0; i < bisect_iters; ++i) {
        const double mid = 0.5 * (b_lo + b_hi);
        (closes(mid) ? b_hi : b_lo) = mid;
    }
    return 0.5 * (b_lo + b_hi);
}

} // namespace vstates
