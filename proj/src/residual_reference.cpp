#include <cmath>

#include "vstates/errors.hpp"
#include "vstates/residual.hpp"

namespace vstates::reference {

namespace {

// Mean-value integral by the shifted trapezoid rule, summed in the obvious
// order with std::complex arithmetic throughout.
complex_t mean_integral(const FourierConformalMap& map, complex_t z, const SpectralGrid& g) {
    complex_t acc = 0.0;
    for (int l = 0; l < g.nodes; ++l) {
        const complex_t tau = g.quadrature_node(l);
        const complex_t p = map.eval(tau);
        acc += (std::conj(z) - std::conj(p)) / (z - p) * map.deriv(tau) * tau;
    }
    return acc / static_cast<double>(g.nodes);
}

} // namespace

ResidualVector eval_G(const PatchState& state, const SpectralGrid& grid) {
    state.validate(128);
    const int M = grid.nodes;
    std::vector<double> g1(M), g2(M);
    const double oml = 1.0 - state.lambda;
    for (int k = 0; k < M; ++k) {
        const complex_t w = grid.collocation_node(k);
        const complex_t z1 = state.outer.eval(w);
        const complex_t z2 = state.inner.eval(w);
        const complex_t i1 = mean_integral(state.outer, z1, grid) - mean_integral(state.inner, z1, grid);
        const complex_t i2 = mean_integral(state.outer, z2, grid) - mean_integral(state.inner, z2, grid);
        g1[k] = std::imag((oml * std::conj(z1) + i1) * w * state.outer.deriv(w));
        g2[k] = std::imag((oml * std::conj(z2) + i2) * w * state.inner.deriv(w));
    }
    ResidualVector r;
    r.outer_modes = project_modes(g1, state.outer.fold, grid.modes);
    r.inner_modes = project_modes(g2, state.inner.fold, grid.modes);
    double sup = 0.0;
    for (double v : g1) sup = std::max(sup, std::abs(v));
    for (double v : g2) sup = std::max(sup, std::abs(v));
    r.sup_norm = sup;
    return r;
}

} // namespace vstates::reference
