#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "vstates/continuation.hpp"
#include "vstates/errors.hpp"

namespace vstates {

namespace {
constexpr double kGauss = 0.5 / 1.7320508075688772; // 2-point Gauss offset
}

// Direct area quadrature of the Biot-Savart law over the doubly connected
// patch. Cells are a polar-type grid between the two boundaries,
// zeta(rho, theta) = (1 - rho) Phi_2(e^{i theta}) + rho Phi_1(e^{i theta}),
// sampled with 2x2 Gauss points per cell. Targets sit on cell-edge angles so
// the near-singular kernel error cancels by symmetry in the normal component.
double velocity_check(const PatchState& state, int density) {
    if (density < 16) throw std::domain_error("velocity_check: density must be >= 16");
    state.validate();
    using cd = std::complex<double>;
    const double pi = std::numbers::pi;

    const int nt = ((density + 15) / 16) * 16;
    const int nr = density;
    const double dth = 2.0 * pi / nt;
    const double drho = 1.0 / nr;

    // Precompute quadrature points: position and weighted area element.
    const double offs[2] = {0.5 - kGauss, 0.5 + kGauss};
    std::vector<cd> zeta(static_cast<std::size_t>(nt) * nr * 4);
    std::vector<double> wgt(zeta.size());
#pragma omp parallel for schedule(static)
    for (int it = 0; it < nt; ++it) {
        for (int gt = 0; gt < 2; ++gt) {
            const double th = (it + offs[gt]) * dth;
            const cd w = std::polar(1.0, th);
            const cd p1 = state.outer.eval(w);
            const cd p2 = state.inner.eval(w);
            const cd dp1 = state.outer.deriv(w);
            const cd dp2 = state.inner.deriv(w);
            const cd zr = p1 - p2;
            for (int ir = 0; ir < nr; ++ir) {
                for (int gr = 0; gr < 2; ++gr) {
                    const double rho = (ir + offs[gr]) * drho;
                    const cd zth = ((1.0 - rho) * dp2 + rho * dp1) * cd(0.0, 1.0) * w;
                    const double jac = std::imag(std::conj(zr) * zth);
                    const std::size_t idx =
                        ((static_cast<std::size_t>(it) * nr + ir) * 2 + gt) * 2 + gr;
                    zeta[idx] = (1.0 - rho) * p2 + rho * p1;
                    wgt[idx] = 0.25 * jac * dth * drho;
                }
            }
        }
    }

    const double omega = state.omega();
    const int ntar = 16;
    double worst = 0.0;
#pragma omp parallel for schedule(static) reduction(max : worst)
    for (int j = 0; j < 2 * ntar; ++j) {
        const double ang = 2.0 * pi * (j % ntar) / ntar; // aligned with cell edges
        const cd w = std::polar(1.0, ang);
        const bool outer = j < ntar;
        const cd z = outer ? state.outer.eval(w) : state.inner.eval(w);
        const cd dz = outer ? state.outer.deriv(w) : state.inner.deriv(w);
        double sr = 0.0, si = 0.0;
        for (std::size_t k = 0; k < zeta.size(); ++k) {
            const double dr = z.real() - zeta[k].real();
            const double di = z.imag() - zeta[k].imag();
            const double inv = wgt[k] / (dr * dr + di * di);
            sr += dr * inv; // 1/conj(z - zeta) = (z - zeta)/|z - zeta|^2
            si += di * inv;
        }
        const cd u = cd(0.0, 1.0) / (2.0 * pi) * cd(sr, si);
        const cd v = u - cd(0.0, 1.0) * omega * z;
        const cd tan = cd(0.0, 1.0) * w * dz;
        const double nc = -std::imag(v * std::conj(tan)) / std::abs(tan);
        worst = std::max(worst, std::abs(nc));
    }
    return worst;
}

} // namespace vstates
