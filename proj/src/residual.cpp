#include "vstates/residual.hpp"

#include <algorithm>
#include <cmath>

#include "vstates/errors.hpp"

namespace vstates {

namespace {

struct QuadTables {
    // Boundary images and weighted derivatives at the quadrature nodes.
    // qw = Phi'(tau) * tau / M, so I(z) is a plain sum of kernel * qw.
    std::vector<complex_t> p1, p2, qw1, qw2;
};

QuadTables make_tables(const PatchState& s, const SpectralGrid& g) {
    QuadTables t;
    const int M = g.nodes;
    t.p1.resize(M); t.p2.resize(M); t.qw1.resize(M); t.qw2.resize(M);
    const double invM = 1.0 / M;
    for (int l = 0; l < M; ++l) {
        const complex_t tau = g.quadrature_node(l);
        t.p1[l] = s.outer.eval(tau);
        t.p2[l] = s.inner.eval(tau);
        t.qw1[l] = s.outer.deriv(tau) * tau * invM;
        t.qw2[l] = s.inner.deriv(tau) * tau * invM;
    }
    return t;
}

// sum_l conj(z - p_l)/(z - p_l) * qw_l, written in real arithmetic so the
// compiler can vectorize the division.
complex_t kernel_sum(complex_t z, const std::vector<complex_t>& p,
                     const std::vector<complex_t>& qw) {
    const double zr = z.real(), zi = z.imag();
    double accr = 0.0, acci = 0.0;
    const int M = static_cast<int>(p.size());
    for (int l = 0; l < M; ++l) {
        const double dr = zr - p[l].real();
        const double di = zi - p[l].imag();
        const double den = dr * dr + di * di;
        if (den < 1e-26)
            throw node_collision_error("collocation image hit a quadrature image");
        // conj(d)/d = ((dr^2 - di^2) - 2 dr di i) / |d|^2
        const double kr = (dr * dr - di * di) / den;
        const double ki = -2.0 * dr * di / den;
        const double qr = qw[l].real(), qi = qw[l].imag();
        accr += kr * qr - ki * qi;
        acci += kr * qi + ki * qr;
    }
    return {accr, acci};
}

} // namespace

void PatchState::validate(int check_nodes) const {
    if (outer.fold != inner.fold)
        throw invalid_state_error("outer and inner folds differ");
    if (outer.fold < 3) throw invalid_state_error("fold must be >= 3");
    if (outer.lead != 1.0) throw invalid_state_error("outer lead must be 1");
    if (!(b > 0.0 && b < 1.0)) throw invalid_state_error("b must lie in (0,1)");
    if (inner.lead != b) throw invalid_state_error("inner lead must equal b");
    if (!outer.univalent_safe() || !inner.univalent_safe())
        throw geometry_error("univalence guard violated: lead <= sum (nm-1)|a_n|");
    double rmin_outer = 1e300, rmax_inner = 0.0;
    for (int k = 0; k < check_nodes; ++k) {
        const complex_t w = std::polar(1.0, 2.0 * std::numbers::pi * (k + 0.25) / check_nodes);
        rmin_outer = std::min(rmin_outer, std::abs(outer.eval(w)));
        rmax_inner = std::max(rmax_inner, std::abs(inner.eval(w)));
    }
    if (rmin_outer <= rmax_inner)
        throw geometry_error("boundaries intersect (sampled radius test)");
}

PatchState trivial_state(int m, double b, double lambda, int modes) {
    PatchState s;
    s.outer = {1.0, m, std::vector<double>(modes, 0.0)};
    s.inner = {b, m, std::vector<double>(modes, 0.0)};
    s.lambda = lambda;
    s.b = b;
    return s;
}

complex_t eval_I(const PatchState& state, complex_t z, const SpectralGrid& grid) {
    const QuadTables t = make_tables(state, grid);
    return kernel_sum(z, t.p1, t.qw1) - kernel_sum(z, t.p2, t.qw2);
}

void eval_G_samples(const PatchState& state, const SpectralGrid& grid,
                    std::vector<double>& g_outer, std::vector<double>& g_inner) {
    state.validate(128);
    const int M = grid.nodes;
    const QuadTables t = make_tables(state, grid);
    g_outer.resize(M);
    g_inner.resize(M);
    const double oml = 1.0 - state.lambda;

#pragma omp parallel for schedule(static)
    for (int k = 0; k < M; ++k) {
        const complex_t w = grid.collocation_node(k);
        const complex_t z1 = state.outer.eval(w);
        const complex_t z2 = state.inner.eval(w);
        const complex_t i1 = kernel_sum(z1, t.p1, t.qw1) - kernel_sum(z1, t.p2, t.qw2);
        const complex_t i2 = kernel_sum(z2, t.p1, t.qw1) - kernel_sum(z2, t.p2, t.qw2);
        g_outer[k] = std::imag((oml * std::conj(z1) + i1) * w * state.outer.deriv(w));
        g_inner[k] = std::imag((oml * std::conj(z2) + i2) * w * state.inner.deriv(w));
    }
}

ResidualVector eval_G(const PatchState& state, const SpectralGrid& grid) {
    std::vector<double> g1, g2;
    eval_G_samples(state, grid, g1, g2);
    ResidualVector r;
    r.outer_modes = project_modes(g1, state.outer.fold, grid.modes);
    r.inner_modes = project_modes(g2, state.inner.fold, grid.modes);
    double sup = 0.0;
    for (double v : g1) sup = std::max(sup, std::abs(v));
    for (double v : g2) sup = std::max(sup, std::abs(v));
    r.sup_norm = sup;
    return r;
}

} // namespace vstates
