#pragma once

#include <array>

#include "vstates/linear_theory.hpp"

namespace vstates {

/// Closed-form second-order Taylor data of the reduced bifurcation equation
/// at (lambda_m^sign, 0), plus the predicted loop geometry. With
/// s = lambda - lambda_m^sign the quadratic model of the loop is
///   a_m s + c_m s^2 + d_m t^2 = 0.
struct QuadraticForm {
    int m;
    double b;
    BranchSign sign;
    double lambda_star;
    double p; // m lambda* - m + 1

    double a_m, c_m, d_m;
    double K_m, beta_tilde, alpha_hat;
    double vhat1, vhat2;

    // Ellipse data, meaningful when a_m > 0.
    double x0;            // a_m / (2 c_m)
    double lambda_center; // lambda* - x0
    double semi_lambda;   // a_m / (2 c_m)
    double semi_t;        // a_m / (2 sqrt(d_m c_m))
};

/// Throws resonance_error if det M_{2m}(lambda*) = 0, no_bifurcation_error if
/// Delta_m < 0.
QuadraticForm quadratic_coeffs(int m, double b, BranchSign sign);

/// e_{2m} coefficient of d^2/dt^2 G(lambda*, t v_m) at t = 0: (alpha_hat, 0).
std::array<double, 2> second_derivative_G(int m, double b, BranchSign sign);

struct EllipsePrediction {
    double lambda_center;
    double semi_lambda;
    double semi_t;
    double lambda_low() const { return lambda_center - semi_lambda; }
    double lambda_high() const { return lambda_center + semi_lambda; }
};

/// Throws no_loop_predicted_error when a_m <= 0.
EllipsePrediction ellipse_prediction(const QuadraticForm& q);

} // namespace vstates
