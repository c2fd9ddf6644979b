#pragma once

#include <span>
#include <vector>

#include "pisr/expr.hpp"

namespace pisr {

// Ordered sample points. `symmetric` asserts points[i] == -points[N-1-i]
// exactly, which the mirrored constructor guarantees bitwise.
struct Grid {
    std::vector<double> points;
    bool symmetric = false;

    std::size_t size() const { return points.size(); }

    // Uniform grid on [x_min, x_max]. When the interval is centered on zero
    // the upper half is built by negating the lower half so the mirror
    // identity holds exactly.
    static Grid uniform(double x_min, double x_max, int n_points);
    // Validating constructor for externally supplied points.
    static Grid from_points(std::vector<double> points);
};

// Scalar operator semantics shared by the evaluator and the constant folder.
// Domain violations produce NaN/inf which propagate as data.
double apply_unary(UnaryOp op, double a);
double apply_binary(BinaryOp op, double a, double b);

// Stack-machine evaluation. Non-finite intermediate values propagate; the
// evaluator never traps. Constants must cover every fit slot.
double eval_scalar(const PostfixExpr& expr, double x, std::span<const double> constants);
std::vector<double> eval_batch(const PostfixExpr& expr, const Grid& grid,
                               std::span<const double> constants);

// Population variance; non-finite if any element is. Throws on empty input.
double variance(std::span<const double> values);

}  // namespace pisr
