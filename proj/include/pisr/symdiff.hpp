#pragma once

#include "pisr/expr.hpp"

namespace pisr {

// Whether derivative templates are pruned while they are spliced together or
// only by the simplification pass that always runs on the final array.
enum class SimplifyMode { PostPass, DuringSplice };

// Partial derivative with respect to variable `var`, built by rewriting the
// token array directly (no tree is ever constructed). The result is
// simplified before return; the input is untouched.
PostfixExpr differentiate(const PostfixExpr& expr, int var,
                          SimplifyMode mode = SimplifyMode::PostPass);

// differentiate applied twice, simplifying between passes.
PostfixExpr second_derivative(const PostfixExpr& expr, int var,
                              SimplifyMode mode = SimplifyMode::PostPass);

// Node-count-reducing rewrite: constant folding plus the cheap algebraic
// identities (u+0, u*1, u*0, u-0, u/1, u^1, u^0, 0/u, neg neg, and the
// token-identical u-u -> 0, u/u -> 1). Token count never increases; the
// result evaluates equal to the input wherever the input is finite.
// Idempotent: runs passes to a fixpoint.
PostfixExpr simplify(const PostfixExpr& expr);

}  // namespace pisr
