#pragma once

#include <vector>

#include "vstates/fourier.hpp"

namespace vstates {

/// Pair of conformal maps describing a doubly connected patch D1 \ D2 plus
/// the rotation parameter lambda = 1 - 2 Omega.
struct PatchState {
    FourierConformalMap outer; // lead 1
    FourierConformalMap inner; // lead b in (0,1)
    double lambda = 0.0;
    double b = 0.5;

    double omega() const { return 0.5 * (1.0 - lambda); }

    /// Structural invariants: matching folds, leads, 0<b<1, univalence guard,
    /// and a sampled non-intersection check of the two boundary images.
    /// Throws invalid_state_error / geometry_error.
    void validate(int check_nodes = 256) const;
};

PatchState trivial_state(int m, double b, double lambda, int modes);

/// Residual of the V-state equations projected on the sine modes e_{nm}.
struct ResidualVector {
    std::vector<double> outer_modes; // B_{1,n}, n = 1..N
    std::vector<double> inner_modes; // B_{2,n}
    double sup_norm = 0.0;           // max |G| over collocation nodes, both components
};

/// Mean-value Cauchy-type integral I(z) of the V-state functional, evaluated
/// by the shifted trapezoid rule. z is expected on one of the boundary images.
complex_t eval_I(const PatchState& state, complex_t z, const SpectralGrid& grid);

/// Full residual: G_j = Im{ ((1-lambda) conj(Phi_j) + I(Phi_j)) w Phi_j' } at
/// the collocation nodes, projected onto e_{nm}. Zero (to quadrature accuracy)
/// characterizes a rotating V-state. OpenMP-parallel over collocation nodes;
/// deterministic for any thread count (no cross-thread reductions).
ResidualVector eval_G(const PatchState& state, const SpectralGrid& grid);

/// Raw collocation samples of (G_1, G_2), for callers that project themselves.
void eval_G_samples(const PatchState& state, const SpectralGrid& grid,
                    std::vector<double>& g_outer, std::vector<double>& g_inner);

namespace reference {
/// Serial reference implementation of eval_G: straight summation, no kernel
/// rearrangement, no OpenMP. Kept as the comparison baseline for the parallel
/// kernel and for the benchmark target.
ResidualVector eval_G(const PatchState& state, const SpectralGrid& grid);
} // namespace reference

} // namespace vstates
