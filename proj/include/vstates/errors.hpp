#pragma once

#include <stdexcept>
#include <string>

namespace vstates {

/// Geometry became invalid: intersecting boundaries or a non-univalent map.
struct geometry_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A collocation target coincides with a quadrature image.
struct node_collision_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Discriminant is negative: no real eigenvalue pair, no bifurcation.
struct no_bifurcation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// det M_{2m}(lambda*) = 0; the second-order reduction divides by it.
struct resonance_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// No loop predicted by the quadratic model (a_m <= 0).
struct no_loop_predicted_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Newton corrector failed to converge within the iteration budget.
struct newton_failure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear solve hit a (numerically) singular Jacobian.
struct singularity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed input file.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A loaded state violates a structural invariant.
struct invalid_state_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace vstates
