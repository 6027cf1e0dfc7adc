#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vstates/linear_theory.hpp"
#include "vstates/residual.hpp"

namespace vstates {

struct NewtonOptions {
    double tol = 1e-12;   // sup norm of the collocation residual
    int max_iter = 40;
    double fd_step = 1e-7;
};

/// Everything a branch computation needs: problem parameters, kernel data of
/// the chosen eigenvalue, discretization, and Newton settings.
struct ContinuationContext {
    int m;
    double b;
    BranchSign sign;
    SpectralGrid grid;
    NewtonOptions newton;
    KernelData kd;
    EigenPair eig;

    ContinuationContext(int m_, double b_, BranchSign sign_, SpectralGrid grid_,
                        NewtonOptions newton_ = {});
};

struct BranchPoint {
    double lambda = 0.0;
    double omega = 0.0;          // (1 - lambda)/2
    double t = 0.0;              // signed kernel amplitude along v_m
    double residual_sup = 0.0;   // collocation sup norm at the working grid
    double residual_fine = -1.0; // re-evaluated on the 2x finer grid, -1 if unchecked
    double arclength = 0.0;      // cumulative, in the scaled metric
    std::vector<double> coeffs;  // interleaved (a_{1,n}, a_{2,n}), n = 1..N
};

struct Branch {
    int m = 0;
    double b = 0.0;
    BranchSign origin_sign = BranchSign::plus;
    std::vector<BranchPoint> points;
    bool closed = false;
    std::vector<double> trivial_hits; // lambda values where |t| crosses 0
    std::string stop_reason;          // "closed", "max_steps", "stall", ...
};

// Corrector modes. The scaled metric used by the arclength constraint is
// y = (coeffs / ||v_m||, lambda).
struct FixedLambdaMode {};
struct ArclengthMode {
    Eigen::VectorXd y_base; // previous accepted point, scaled
    Eigen::VectorXd tangent; // unit secant tangent, scaled
    double ds;
};
struct PinnedAmplitudeMode {
    double t0; // kernel amplitude held fixed while lambda is free
};
using CorrectorMode = std::variant<FixedLambdaMode, ArclengthMode, PinnedAmplitudeMode>;

PatchState make_state(const ContinuationContext& ctx, double lambda,
                      std::span<const double> coeffs);
double kernel_amplitude(const ContinuationContext& ctx, std::span<const double> coeffs);

/// One-shot Newton corrector. Fixed-lambda mode checks Jacobian invertibility
/// and throws singularity_error at bifurcation points; the augmented modes
/// solve the bordered (2N+1) system with lambda free.
BranchPoint newton_correct(const ContinuationContext& ctx, const PatchState& guess,
                           const CorrectorMode& mode);

/// Central finite-difference Jacobian of the projected residual in the 2N
/// coefficients (interleaved layout), at fixed lambda.
Eigen::MatrixXd jacobian_fd(const PatchState& state, const SpectralGrid& grid, double h);

/// First point off the trivial branch at lambda_m^sign: predictor
/// trivial + dt0 * v_m, corrected with lambda free and amplitude pinned.
/// Requires Delta_m > 0 strictly.
BranchPoint branch_switch(const ContinuationContext& ctx, double dt0);

struct TraceOptions {
    double ds0 = 1e-3;
    double ds_min = 1e-9;
    double ds_max = 0.0;  // 0 -> 8 * ds0
    int max_steps = 5000;
    double t_tol = 1e-7;  // trivial-branch hit threshold
    double dt0 = 0.0;     // branch-switch amplitude, 0 -> ds0
    // reject corrected points whose full collocation sup residual exceeds
    // this; near folds the projected system can admit spurious solutions
    // with large unresolved tails, which must not enter the branch
    double sup_tol = 1e-6;
    bool fine_residual_check = true;
};

/// Pseudo-arclength predictor-corrector around the bifurcation loop, with
/// adaptive steps, closure detection, and trivial-branch hit refinement.
Branch trace_loop(const ContinuationContext& ctx, const TraceOptions& opts);

/// W_hat-component of QG(lambda, t v_m + k) after solving the complement
/// equations (Id - Q) G = 0 for k in X_m. Vanishes identically at t = 0.
double reduced_function(const ContinuationContext& ctx, double lambda, double t);

/// Divided form QG/t (t != 0): the numerical reduced bifurcation function
/// F2 whose Taylor data at (lambda_m^sign, 0) is -(a_m, 2c_m, 2d_m, 0, 0).
double reduced_f2(const ContinuationContext& ctx, double lambda, double t);

/// Independent physical oracle: max normal boundary velocity in the rotating
/// frame, from direct area quadrature of the Biot-Savart law over the patch.
double velocity_check(const PatchState& state, int density);

/// Reflection t -> -t: coefficients of mode n pick up (-1)^n.
BranchPoint reflect_point(const BranchPoint& p);

/// Hausdorff distance, in the scaled (coeffs/||v||, lambda) metric, between
/// the branch and its reflection.
double reflection_hausdorff(const ContinuationContext& ctx, const Branch& br);

/// Empirical loop-threshold estimate: bisect on b between closure failure at
/// b_lo and closure success at b_hi under a fixed trace budget.
double estimate_bm(int m, BranchSign sign, double b_lo, double b_hi, int bisect_iters,
                   const TraceOptions& opts, int modes, const NewtonOptions& newton = {});

} // namespace vstates
