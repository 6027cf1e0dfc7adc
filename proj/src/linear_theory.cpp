#include "vstates/linear_theory.hpp"

#include <cmath>

#include "vstates/errors.hpp"

namespace vstates {

LinearBlock matrix_Mn(int n, double lambda, double b) {
    if (n < 1) throw std::domain_error("matrix_Mn: n must be >= 1");
    if (!(b > 0.0 && b < 1.0)) throw std::domain_error("matrix_Mn: b must lie in (0,1)");
    LinearBlock blk;
    blk.n = n;
    blk.m11 = n * lambda - 1.0 - n * b * b;
    blk.m12 = std::pow(b, n + 1);
    blk.m21 = -std::pow(b, n);
    blk.m22 = b * (n * lambda - n + 1.0);
    blk.det = blk.m11 * blk.m22 - blk.m12 * blk.m21;
    return blk;
}

double discriminant(int n, double b) {
    if (n < 3) throw std::domain_error("discriminant: n must be >= 3");
    const double half = 0.5 * (1.0 - b * b) * n - 1.0;
    return half * half - std::pow(b, 2 * n);
}

bool bifurcation_condition(int n, double b) {
    if (n < 3) throw std::domain_error("bifurcation_condition: n must be >= 3");
    return 0.5 * (1.0 - b * b) * n - 1.0 >= std::pow(b, n);
}

EigenPair eigenvalues(int m, double b) {
    double delta = discriminant(m, b);
    if (delta < 0.0 && delta > -1e-13) delta = 0.0; // roundoff at b = b_m^*
    if (delta < 0.0)
        throw no_bifurcation_error("Delta_m < 0: eigenvalues are complex, no m-fold bifurcation");
    EigenPair e;
    e.delta = delta;
    const double mid = 0.5 * (1.0 + b * b);
    const double half = std::sqrt(delta) / m;
    e.lambda_minus = mid - half;
    e.lambda_plus = mid + half;
    e.omega_minus = 0.5 * (1.0 - e.lambda_plus); // Omega_m^- pairs with lambda_m^+
    e.omega_plus = 0.5 * (1.0 - e.lambda_minus);
    return e;
}

double find_bstar(int m) {
    if (m < 3) throw std::domain_error("find_bstar: m must be >= 3");
    // g(b) = 1 + b^m - m(1-b^2)/2 is strictly increasing; g(0) < 0 <= g(1).
    auto g = [m](double b) { return 1.0 + std::pow(b, m) - 0.5 * m * (1.0 - b * b); };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

KernelData kernel_data(int m, double b, BranchSign sign) {
    const EigenPair e = eigenvalues(m, b);
    KernelData kd;
    kd.sign = sign;
    kd.lambda_star = lambda_star(e, sign);
    const double sd = std::sqrt(e.delta);
    const double root = std::sqrt(std::pow(b, 2 * m) + e.delta);
    kd.p = sign == BranchSign::plus ? -root + sd : -root - sd;
    kd.v1 = kd.p / std::pow(b, m - 1);
    kd.v2 = 1.0;
    const double nrm = std::sqrt(kd.p * kd.p + std::pow(b, 2 * m));
    kd.what1 = kd.p / nrm;
    kd.what2 = -std::pow(b, m) / nrm;
    return kd;
}

double KernelData::norm_v() const { return std::sqrt(v1 * v1 + v2 * v2); }

Eigen::MatrixXd trivial_jacobian(double lambda, double b, int m, int N) {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * N, 2 * N);
    for (int n = 1; n <= N; ++n) {
        const LinearBlock blk = matrix_Mn(n * m, lambda, b);
        const int i = 2 * (n - 1);
        J(i, i) = blk.m11;
        J(i, i + 1) = blk.m12;
        J(i + 1, i) = blk.m21;
        J(i + 1, i + 1) = blk.m22;
    }
    return J;
}

} // namespace vstates
