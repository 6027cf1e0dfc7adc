#pragma once

#include <Eigen/Dense>
#include <vector>

namespace vstates {

enum class BranchSign { plus, minus };

/// 2x2 Fourier multiplier block of the linearization at the annulus:
///   M_n(lambda) = [ n lambda - 1 - n b^2 ,  b^{n+1}
///                   -b^n                 ,  b (n lambda - n + 1) ].
struct LinearBlock {
    int n;
    double m11, m12, m21, m22;
    double det;
};

LinearBlock matrix_Mn(int n, double lambda, double b);

/// Delta_n(b) = ((1-b^2) n / 2 - 1)^2 - b^{2n}.
double discriminant(int n, double b);

/// Equivalent transversality condition for n >= 3: n(1-b^2)/2 - 1 >= b^n.
bool bifurcation_condition(int n, double b);

struct EigenPair {
    double delta;
    double lambda_minus, lambda_plus;
    double omega_minus, omega_plus; // Omega = (1 - lambda)/2; note the sign swap
};

/// Roots of det M_m(lambda) = 0. Throws no_bifurcation_error when Delta_m < 0.
EigenPair eigenvalues(int m, double b);

/// Unique root in (0,1) of 1 + b^m - m(1-b^2)/2 = 0, by bisection to 1e-13.
double find_bstar(int m);

/// Kernel vector v_m and unit cokernel direction W_hat of M_m(lambda_m^sign).
struct KernelData {
    BranchSign sign;
    double lambda_star;
    double p;            // m lambda* - m + 1, from the stable identity
                         // p = -sqrt(b^{2m} + Delta) +/- sqrt(Delta)
    double v1, v2;       // v = (p / b^{m-1}, 1)
    double what1, what2; // W_hat = (p, -b^m) / sqrt(p^2 + b^{2m})
    double norm_v() const;
};

KernelData kernel_data(int m, double b, BranchSign sign);

/// Exact Jacobian of the discretized problem at f = 0: N independent 2x2
/// blocks M_{nm}(lambda) on the interleaved layout (a_{1,1}, a_{2,1}, ...).
Eigen::MatrixXd trivial_jacobian(double lambda, double b, int m, int N);

inline double lambda_star(const EigenPair& e, BranchSign s) {
    return s == BranchSign::plus ? e.lambda_plus : e.lambda_minus;
}

} // namespace vstates
