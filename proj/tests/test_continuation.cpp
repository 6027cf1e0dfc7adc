#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "vstates/continuation.hpp"
#include "vstates/errors.hpp"
#include "vstates/reduction.hpp"

using namespace vstates;

namespace {
ContinuationContext make_ctx(int m, double b, int N = 16) {
    return ContinuationContext(m, b, BranchSign::plus, SpectralGrid(N, m));
}
} // namespace

TEST_CASE("fixed-lambda Newton at a generic lambda keeps the trivial solution") {
    const ContinuationContext ctx = make_ctx(4, 0.63);
    const PatchState guess = trivial_state(4, 0.63, 0.5, ctx.grid.modes); // away from spectrum
    const BranchPoint p = newton_correct(ctx, guess, FixedLambdaMode{});
    CHECK(p.residual_sup < 1e-12);
    CHECK(std::abs(p.t) < 1e-12);
    for (double c : p.coeffs) CHECK(std::abs(c) < 1e-12);
}

TEST_CASE("fixed-lambda Newton reports a singular Jacobian at lambda_m^+") {
    const ContinuationContext ctx = make_ctx(4, 0.63);
    const PatchState guess = trivial_state(4, 0.63, ctx.eig.lambda_plus, ctx.grid.modes);
    CHECK_THROWS_AS(newton_correct(ctx, guess, FixedLambdaMode{}), singularity_error);
}

TEST_CASE("jacobian_fd: step domain, trivial blocks, and O(h^2) refinement") {
    const int m = 3, N = 8;
    const double b = 0.4, lam = 0.6;
    const PatchState s = trivial_state(m, b, lam, N);
    const SpectralGrid g(N, m);
    CHECK_THROWS_AS(jacobian_fd(s, g, 1e-9), std::domain_error);
    CHECK_THROWS_AS(jacobian_fd(s, g, 1e-3), std::domain_error);

    const Eigen::MatrixXd exact = trivial_jacobian(lam, b, m, N);
    const double e1 = (jacobian_fd(s, g, 1e-4) - exact).cwiseAbs().maxCoeff();
    const double e2 = (jacobian_fd(s, g, 5e-5) - exact).cwiseAbs().maxCoeff();
    CHECK(e1 < 1e-4);
    CHECK(e2 < 0.3 * e1); // ~4x drop for central differences
    CHECK((jacobian_fd(s, g, 1e-6) - exact).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("branch_switch leaves the trivial branch") {
    const ContinuationContext ctx = make_ctx(4, 0.63);
    const BranchPoint p = branch_switch(ctx, 1e-3);
    CHECK(p.residual_sup < 1e-12);
    CHECK(p.t == doctest::Approx(1e-3).epsilon(1e-10));
    CHECK(std::abs(p.lambda - ctx.eig.lambda_plus) < 1e-3);

    // quadratic model bound on the lambda shift: a dl ~ -d t^2
    const QuadraticForm q = quadratic_coeffs(4, 0.63, BranchSign::plus);
    CHECK(std::abs(p.lambda - ctx.eig.lambda_plus) < 10.0 * q.d_m / q.a_m * p.t * p.t);

    // minus sign mirrors near lambda_m^-
    const ContinuationContext ctxm(4, 0.63, BranchSign::minus, SpectralGrid(16, 4));
    const BranchPoint pm = branch_switch(ctxm, 1e-3);
    CHECK(std::abs(pm.lambda - ctxm.eig.lambda_minus) < 1e-3);
}

TEST_CASE("branch_switch refuses the degenerate b = b_m^*") {
    const double bstar = find_bstar(4);
    const ContinuationContext ctx = make_ctx(4, bstar);
    CHECK_THROWS_AS(branch_switch(ctx, 1e-3), no_bifurcation_error);
}

TEST_CASE("fixed-lambda correction of a nontrivial state stays nontrivial") {
    const ContinuationContext ctx = make_ctx(4, 0.63);
    const BranchPoint p = branch_switch(ctx, 5e-2);
    PatchState s = make_state(ctx, p.lambda, p.coeffs);
    s.outer.coeffs[0] *= 1.0 + 1e-3; // nudge off the solution, then re-correct
    const BranchPoint q = newton_correct(ctx, s, FixedLambdaMode{});
    CHECK(q.residual_sup < 1e-12);
    CHECK(std::abs(q.t) > 1e-2);
}

TEST_CASE("trace_loop closes the m = 4 loop near b_4^*") {
    const double b = find_bstar(4) - 0.005;
    const ContinuationContext ctx = make_ctx(4, b, 32);
    TraceOptions opts;
    opts.ds0 = 1e-3;
    opts.max_steps = 3000;
    const Branch br = trace_loop(ctx, opts);
    REQUIRE(br.closed);
    CHECK(br.stop_reason == "closed");
    REQUIRE(br.trivial_hits.size() >= 2);
    CHECK(std::abs(br.trivial_hits[0] - ctx.eig.lambda_plus) < 1e-6);
    CHECK(std::abs(br.trivial_hits[1] - ctx.eig.lambda_minus) < 1e-4);

    // arclength strictly increases
    for (std::size_t i = 1; i < br.points.size(); ++i)
        CHECK(br.points[i].arclength > br.points[i - 1].arclength);

    // every accepted point re-checks on the doubled grid
    for (const auto& p : br.points) CHECK(p.residual_fine < 1e-10);

    // t-reflection symmetry of the closed loop
    double max_ds = 0.0;
    for (std::size_t i = 1; i < br.points.size(); ++i)
        max_ds = std::max(max_ds, br.points[i].arclength - br.points[i - 1].arclength);
    CHECK(reflection_hausdorff(ctx, br) < 2.0 * max_ds);

    // a reflected point is again a solution (re-converges immediately)
    const BranchPoint mid = br.points[br.points.size() / 2];
    const BranchPoint refl = reflect_point(mid);
    CHECK(refl.t == doctest::Approx(-mid.t).epsilon(1e-15));
    const PatchState rs = make_state(ctx, refl.lambda, refl.coeffs);
    const BranchPoint rq = newton_correct(ctx, rs, FixedLambdaMode{});
    CHECK(rq.residual_sup < 1e-12);
    CHECK(rq.t == doctest::Approx(refl.t).epsilon(1e-8));
}

TEST_CASE("trace_loop does not close far from b_m^*") {
    const ContinuationContext ctx = make_ctx(4, 0.40);
    TraceOptions opts;
    opts.ds0 = 2e-3;
    opts.max_steps = 250;
    opts.fine_residual_check = false;
    const Branch br = trace_loop(ctx, opts);
    CHECK(!br.closed);
    CHECK(br.trivial_hits.size() < 2);
}

TEST_CASE("estimate_bm brackets the loop-merge threshold") {
    // at N = 24 the b = b_4^* - 0.005 loop closes while b = b_4^* - 0.01 hits
    // the resolution/limiting wall; the threshold estimate must stay inside
    TraceOptions opts;
    opts.ds0 = 1e-3;
    opts.max_steps = 2500;
    opts.fine_residual_check = false;
    const double bm = estimate_bm(4, BranchSign::plus, 0.6336, 0.6386, 2, opts, 24);
    CHECK(bm > 0.6336);
    CHECK(bm < 0.6386);
    CHECK(bm < find_bstar(4));
}

TEST_CASE("loop half-extents approach the ellipse prediction as b -> b_4^*") {
    const double bstar = find_bstar(4);
    double prev = std::numeric_limits<double>::max();
    for (double delta : {0.004, 0.002, 0.001}) {
        const double b = bstar - delta;
        const ContinuationContext ctx(4, b, BranchSign::plus, SpectralGrid(16, 4));
        const EllipsePrediction pred = ellipse_prediction(quadratic_coeffs(4, b, BranchSign::plus));
        TraceOptions opts;
        opts.ds0 = pred.semi_t / 40.0;
        opts.max_steps = 2500;
        opts.fine_residual_check = false;
        const Branch br = trace_loop(ctx, opts);
        REQUIRE(br.closed);
        double lam_lo = 1e9, lam_hi = -1e9, t_hi = 0.0;
        for (const auto& p : br.points) {
            lam_lo = std::min(lam_lo, p.lambda);
            lam_hi = std::max(lam_hi, p.lambda);
            t_hi = std::max(t_hi, std::abs(p.t));
        }
        const double gap = std::max(std::abs(0.5 * (lam_hi - lam_lo) / pred.semi_lambda - 1.0),
                                    std::abs(t_hi / pred.semi_t - 1.0));
        CHECK(gap < prev); // monotone approach toward the asymptotic ellipse
        prev = gap;
    }
    CHECK(prev < 0.25); // within 25% by delta = 0.001 (convergence is O(sqrt(delta)))
}

TEST_CASE("reduced function vanishes on the trivial branch and at the eigenpair") {
    const ContinuationContext ctx = make_ctx(4, 0.63, 12);
    for (double lam : {ctx.eig.lambda_plus, ctx.eig.lambda_plus + 5e-3})
        CHECK(std::abs(reduced_function(ctx, lam, 0.0)) < 1e-12);
    // divided form at tiny t stays small at the eigenpair (F2(lambda*, 0) = 0)
    CHECK(std::abs(reduced_f2(ctx, ctx.eig.lambda_plus, 1e-5)) < 1e-6);
    CHECK_THROWS_AS(reduced_f2(ctx, ctx.eig.lambda_plus, 0.0), std::domain_error);
}

TEST_CASE("velocity oracle discriminates solutions from non-solutions") {
    // circles are streamlines: the annulus has no normal flow at any Omega
    const PatchState annulus = trivial_state(4, 0.63, 0.42, 8);
    CHECK(velocity_check(annulus, 128) < 1e-10);

    // converged V-state: normal flow at quadrature-error level
    const ContinuationContext ctx = make_ctx(4, 0.63);
    const BranchPoint p = branch_switch(ctx, 5e-2);
    const PatchState vs = make_state(ctx, p.lambda, p.coeffs);
    const double v_state = velocity_check(vs, 200);
    CHECK(v_state < 5e-4);

    // deliberate non-solution: the same shape spun at the wrong rate
    PatchState fake = make_state(ctx, 0.3, p.coeffs);
    CHECK(velocity_check(fake, 200) > 1e-2);
}
