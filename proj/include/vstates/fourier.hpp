#pragma once

#include <complex>
#include <span>
#include <vector>

namespace vstates {

using complex_t = std::complex<double>;

/// Truncated m-fold symmetric exterior conformal map
///   Phi(w) = lead * w + sum_{n=1}^{N} coeffs[n-1] * w^{-(n*fold - 1)},
/// with real coefficients (boundary symmetric about the real axis).
struct FourierConformalMap {
    double lead = 1.0;              // 1 for the outer boundary, b for the inner
    int fold = 3;                   // m-fold symmetry, m >= 3
    std::vector<double> coeffs;     // a_n, coefficient of w^{-(n m - 1)}

    complex_t eval(complex_t w) const;
    complex_t deriv(complex_t w) const;   // Phi'(w) = lead - sum (nm-1) a_n w^{-nm}

    /// sum_n (nm-1)|a_n|; the map is univalent-safe while lead exceeds this.
    double coeff_weight_sum() const;
    bool univalent_safe() const { return lead > coeff_weight_sum(); }
};

/// Equispaced collocation nodes with half-step shifted quadrature nodes, so a
/// collocation image never coincides with a quadrature image.
struct SpectralGrid {
    int modes;          // N retained sine modes e_{nm}
    int nodes;          // M collocation = quadrature node count
    double shift = 0.5; // quadrature offset in units of the node spacing

    SpectralGrid(int modes_, int fold, int nodes_ = 0)
        : modes(modes_), nodes(nodes_ > 0 ? nodes_ : 4 * modes_ * fold) {}

    double collocation_angle(int k) const;
    double quadrature_angle(int k) const;
    complex_t collocation_node(int k) const;
    complex_t quadrature_node(int k) const;
};

/// Sine-mode analysis: given samples of a function sum_n beta_n e_{nm} at the
/// M collocation angles (e_n(w) = Im(conj(w)^n) = -sin(n theta)), recover
/// beta_1..beta_N. Exact to roundoff for band-limited input when M >= 4Nm.
std::vector<double> project_modes(std::span<const double> samples, int fold, int modes);

/// Synthesis inverse of project_modes, mostly for round-trip checks.
std::vector<double> sample_sine_modes(std::span<const double> beta, int fold, int nodes);

} // namespace vstates
