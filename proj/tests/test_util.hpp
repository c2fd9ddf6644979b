#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "pisr/eval.hpp"
#include "pisr/expr.hpp"
#include "pisr/grammar.hpp"

namespace pisr::test {

inline Token X(int i = 0) { return Token::variable(i); }
inline Token L(double v) { return Token::literal(v); }
inline Token C(int slot) { return Token::fit_const(slot); }
inline Token U(UnaryOp op) { return Token::unary(op); }
inline Token B(BinaryOp op) { return Token::binary(op); }

inline PostfixExpr make_expr(std::vector<Token> toks) { return PostfixExpr(std::move(toks)); }

// Independent central finite-difference oracle.
template <typename F>
double central_diff(F&& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Grammar over the full operator table, used to generate random test inputs.
inline Grammar full_grammar(int max_depth, bool fit_consts = false) {
    Grammar g;
    g.max_depth = max_depth;
    g.unary = {UnaryOp::Neg,  UnaryOp::Log,  UnaryOp::Exp,  UnaryOp::Cos,
               UnaryOp::Sin,  UnaryOp::Sqrt, UnaryOp::Asin, UnaryOp::Acos,
               UnaryOp::Tanh, UnaryOp::Sech, UnaryOp::Sinh, UnaryOp::Cosh};
    g.binary = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow};
    g.fit_const_leaves = fit_consts;
    return g;
}

}  // namespace pisr::test
