#pragma once

#include <functional>
#include <random>
#include <vector>

#include "pisr/expr.hpp"

namespace pisr {

using Rng = std::mt19937_64;

// Fixed-depth production grammar: expr := leaf | (expr unary) | (expr expr binary),
// with tree height bounded by max_depth (or pinned to it when exact_depth).
struct Grammar {
    int max_depth = 3;
    std::vector<UnaryOp> unary;
    std::vector<BinaryOp> binary;
    int num_variables = 1;
    bool variable_leaves = true;
    bool fit_const_leaves = false;
    bool exact_depth = false;
    // Relative sampling weights of the operator productions (leaves are
    // forced by exact-height sampling).
    double unary_weight = 1.0;
    double binary_weight = 1.0;

    int num_leaf_kinds() const {
        return (variable_leaves ? num_variables : 0) + (fit_const_leaves ? 1 : 0);
    }
    void validate() const;  // throws std::invalid_argument on a malformed grammar
};

// Yields every structurally distinct expression of height <= depth (or
// exactly == depth when grammar.exact_depth), each exactly once, in layered
// order: all of height 0, then height 1, and so on. Fit-constant leaves carry
// fresh slot indices assigned left to right. The visitor returns false to
// stop; the function returns false iff stopped early.
bool enumerate_expressions(const Grammar& grammar, int depth,
                           const std::function<bool(const PostfixExpr&)>& visit);

// Random expression of height exactly `depth` (deterministic given the rng
// state). At depth > 0 at least one subtree is forced to maximal height.
PostfixExpr sample_expression(const Grammar& grammar, Rng& rng, int depth);

// Structure-preserving move: replaces exactly one token by a same-arity
// alternative from the grammar, or jitters one literal value by a
// multiplicative log-normal step. Token count and depth are preserved; fit
// slots are renumbered canonically afterwards.
PostfixExpr perturb(const PostfixExpr& expr, const Grammar& grammar, Rng& rng);

}  // namespace pisr
