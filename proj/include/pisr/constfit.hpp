#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace pisr {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FitConfig {
    enum class Method { LevenbergMarquardt, QuasiNewton };

    Method method = Method::LevenbergMarquardt;
    int max_iterations = 50;
    double gradient_tolerance = 1e-10;
    double step_tolerance = 1e-12;
    // Per-slot [lo, hi]; entries beyond the vector (or nullopt) are unbounded.
    std::vector<std::optional<std::pair<double, double>>> constant_bounds;

    void validate() const;
};

struct FitResult {
    Eigen::VectorXd constants;
    double sse = 0.0;
    bool converged = false;
    bool rejected = false;  // residual non-finite at the initial constants
    int iterations = 0;
};

// Forward-difference Jacobian of the residual with step 1e-7*(1+|c_j|).
// Entries may be non-finite; callers decide how to react.
Eigen::MatrixXd jacobian(const ResidualFn& residual, const Eigen::VectorXd& constants);

// Refines constants against the residual. Levenberg-Marquardt runs the
// classical damping schedule (lambda starts at 1e-3, x10 on reject, /10 on
// accept) on the normal equations; the quasi-Newton path is BFGS with a
// backtracking line search on the scalar SSE and is also the fallback when
// the Jacobian goes non-finite. Accepted steps never increase the SSE and the
// best finite iterate is returned. Bounds are enforced by projection.
FitResult fit_constants(const Eigen::VectorXd& initial, const ResidualFn& residual,
                        const FitConfig& config);

}  // namespace pisr
