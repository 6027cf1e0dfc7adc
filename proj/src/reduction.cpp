#include "vstates/reduction.hpp"

#include <cmath>
#include <limits>

#include "vstates/errors.hpp"

namespace vstates {

QuadraticForm quadratic_coeffs(int m, double b, BranchSign sign) {
    const KernelData kd = kernel_data(m, b, sign);
    const double lam = kd.lambda_star;
    const double p = kd.p;
    const double b2m = std::pow(b, 2 * m);
    const double root = std::sqrt(p * p + b2m);

    const LinearBlock blk2m = matrix_Mn(2 * m, lam, b);
    if (std::abs(blk2m.det) < 1e-12)
        throw resonance_error("det M_{2m}(lambda*) = 0: second mode resonant");

    QuadraticForm q;
    q.m = m;
    q.b = b;
    q.sign = sign;
    q.lambda_star = lam;
    q.p = p;

    q.a_m = -m * (p * p - b2m) / (std::pow(b, m - 1) * root);
    q.c_m = -2.0 * m * m * std::pow(b, 1 - m) * p * p * p / (root * root * root);
    q.alpha_hat = 2.0 * m * std::pow(kd.v2 * std::pow(b, m) - b * kd.v1, 2);
    q.beta_tilde = -b * q.alpha_hat / blk2m.det;
    q.K_m = (2.0 * lam * m - 2.0 * m + 1.0) *
            (std::pow(b, 1 - m) * (m * lam - 1.0) * p * p +
             (1.0 - 2.0 * m) * p * std::pow(b, m + 1) + m * std::pow(b, 3 * m - 1)) /
            root;
    q.d_m = 0.5 * m * (m - 1) * std::pow(b, 3 - 3 * m) *
                std::pow(std::pow(b, 2 * m - 2) - p * p, 2) / root -
            0.5 * q.beta_tilde * q.K_m;
    q.vhat1 = -b * q.alpha_hat * (2.0 * m * lam - 2.0 * m + 1.0) / blk2m.det;
    q.vhat2 = -b2m * q.alpha_hat / blk2m.det;

    q.x0 = q.a_m / (2.0 * q.c_m);
    q.lambda_center = lam - q.x0;
    q.semi_lambda = q.x0;
    q.semi_t = q.d_m * q.c_m > 0.0 ? q.a_m / (2.0 * std::sqrt(q.d_m * q.c_m))
                                   : std::numeric_limits<double>::quiet_NaN();
    return q;
}

std::array<double, 2> second_derivative_G(int m, double b, BranchSign sign) {
    const KernelData kd = kernel_data(m, b, sign);
    return {2.0 * m * std::pow(kd.v2 * std::pow(b, m) - b * kd.v1, 2), 0.0};
}

EllipsePrediction ellipse_prediction(const QuadraticForm& q) {
    if (!(q.a_m > 0.0))
        throw no_loop_predicted_error("a_m <= 0: the quadratic model predicts no loop");
    return {q.lambda_center, q.semi_lambda, q.semi_t};
}

} // namespace vstates
