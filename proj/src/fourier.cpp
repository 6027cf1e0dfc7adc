#include "vstates/fourier.hpp"

#include <cmath>
#include <numbers>

#include "vstates/errors.hpp"

namespace vstates {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_unit_modulus(complex_t w) {
    if (std::abs(std::abs(w) - 1.0) > 1e-14)
        throw std::domain_error("conformal map evaluated off the unit circle");
}

} // namespace

complex_t FourierConformalMap::eval(complex_t w) const {
    require_unit_modulus(w);
    // Phi(w) = w * (lead + sum a_n u^n) with u = w^{-m}; Horner in u.
    const complex_t u = std::pow(w, -fold);
    complex_t acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = (acc + *it) * u;
    return w * (lead + acc);
}

complex_t FourierConformalMap::deriv(complex_t w) const {
    require_unit_modulus(w);
    const complex_t u = std::pow(w, -fold);
    complex_t acc = 0.0;
    for (int n = static_cast<int>(coeffs.size()); n >= 1; --n)
        acc = (acc + static_cast<double>(n * fold - 1) * coeffs[n - 1]) * u;
    return lead - acc;
}

double FourierConformalMap::coeff_weight_sum() const {
    double s = 0.0;
    for (std::size_t n = 1; n <= coeffs.size(); ++n)
        s += static_cast<double>(n * fold - 1) * std::abs(coeffs[n - 1]);
    return s;
}

double SpectralGrid::collocation_angle(int k) const { return kTwoPi * k / nodes; }
double SpectralGrid::quadrature_angle(int k) const { return kTwoPi * (k + shift) / nodes; }
complex_t SpectralGrid::collocation_node(int k) const { return std::polar(1.0, collocation_angle(k)); }
complex_t SpectralGrid::quadrature_node(int k) const { return std::polar(1.0, quadrature_angle(k)); }

std::vector<double> project_modes(std::span<const double> samples, int fold, int modes) {
    const int M = static_cast<int>(samples.size());
    if (M < 4 * modes * fold)
        throw std::domain_error("project_modes: node count below the 4Nm anti-aliasing floor");
    std::vector<double> beta(modes, 0.0);
    for (int n = 1; n <= modes; ++n) {
        double s = 0.0;
        for (int k = 0; k < M; ++k) s += samples[k] * std::sin(n * fold * kTwoPi * k / M);
        beta[n - 1] = -2.0 * s / M;
    }
    return beta;
}

std::vector<double> sample_sine_modes(std::span<const double> beta, int fold, int nodes) {
    std::vector<double> out(nodes, 0.0);
    for (int k = 0; k < nodes; ++k) {
        double s = 0.0;
        for (std::size_t n = 1; n <= beta.size(); ++n)
            s -= beta[n - 1] * std::sin(static_cast<double>(n * fold) * kTwoPi * k / nodes);
        out[k] = s;
    }
    return out;
}

} // namespace vstates
