#include "pisr/symdiff.hpp"

#include <cmath>

#include "pisr/eval.hpp"

namespace pisr {

namespace {

using Toks = std::vector<Token>;

bool is_literal(const Toks& t, double v) {
    return t.size() == 1 && t[0].kind == Token::Kind::Literal && t[0].value == v;
}

// Splice-time combinators. In DuringSplice mode the trivial zero/one cases
// collapse immediately, which keeps intermediate derivative arrays small; in
// PostPass mode templates are emitted verbatim and the final simplify pass
// does all the pruning.
struct Splicer {
    bool prune;

    Toks lit(double v) const { return {Token::literal(v)}; }

    Toks un(UnaryOp op, Toks a) const {
        a.push_back(Token::unary(op));
        return a;
    }

    Toks bin(BinaryOp op, Toks a, Toks b) const {
        a.insert(a.end(), b.begin(), b.end());
        a.push_back(Token::binary(op));
        return a;
    }

    Toks neg(Toks a) const {
        if (prune && is_literal(a, 0.0)) return a;
        return un(UnaryOp::Neg, std::move(a));
    }

    Toks add(Toks a, Toks b) const {
        if (prune) {
            if (is_literal(a, 0.0)) return b;
            if (is_literal(b, 0.0)) return a;
        }
        return bin(BinaryOp::Add, std::move(a), std::move(b));
    }

    Toks sub(Toks a, Toks b) const {
        if (prune) {
            if (is_literal(b, 0.0)) return a;
            if (is_literal(a, 0.0)) return neg(std::move(b));
        }
        return bin(BinaryOp::Sub, std::move(a), std::move(b));
    }

    Toks mul(Toks a, Toks b) const {
        if (prune) {
            if (is_literal(a, 0.0) || is_literal(b, 1.0)) return a;
            if (is_literal(b, 0.0) || is_literal(a, 1.0)) return b;
        }
        return bin(BinaryOp::Mul, std::move(a), std::move(b));
    }

    Toks div(Toks a, Toks b) const {
        if (prune) {
            if (is_literal(a, 0.0)) return a;
            if (is_literal(b, 1.0)) return a;
        }
        return bin(BinaryOp::Div, std::move(a), std::move(b));
    }
};

Toks copy_span(std::span<const Token> s) { return Toks(s.begin(), s.end()); }

// Derivative of one operator application given the operand value slice(s)
// (views into the input array) and already-built derivative slices.
Toks unary_rule(UnaryOp op, std::span<const Token> v, Toks dv, const Splicer& sp) {
    switch (op) {
        case UnaryOp::Neg:
            return sp.neg(std::move(dv));
        case UnaryOp::Log:  // u'/u
            return sp.div(std::move(dv), copy_span(v));
        case UnaryOp::Exp:  // exp(u)*u'
            return sp.mul(sp.un(UnaryOp::Exp, copy_span(v)), std::move(dv));
        case UnaryOp::Cos:  // -(sin(u)*u')
            return sp.neg(sp.mul(sp.un(UnaryOp::Sin, copy_span(v)), std::move(dv)));
        case UnaryOp::Sin:  // cos(u)*u'
            return sp.mul(sp.un(UnaryOp::Cos, copy_span(v)), std::move(dv));
        case UnaryOp::Sqrt:  // u'/(2*sqrt(u))
            return sp.div(std::move(dv), sp.mul(sp.lit(2.0), sp.un(UnaryOp::Sqrt, copy_span(v))));
        case UnaryOp::Asin:  // u'/sqrt(1-u^2)
            return sp.div(std::move(dv),
                          sp.un(UnaryOp::Sqrt,
                                sp.sub(sp.lit(1.0), sp.mul(copy_span(v), copy_span(v)))));
        case UnaryOp::Acos:
            return sp.neg(sp.div(std::move(dv),
                                 sp.un(UnaryOp::Sqrt,
                                       sp.sub(sp.lit(1.0), sp.mul(copy_span(v), copy_span(v))))));
        case UnaryOp::Tanh:  // sech(u)^2*u'
            return sp.mul(sp.mul(sp.un(UnaryOp::Sech, copy_span(v)), sp.un(UnaryOp::Sech, copy_span(v))),
                          std::move(dv));
        case UnaryOp::Sech:  // -(sech(u)*tanh(u)*u')
            return sp.neg(sp.mul(
                sp.mul(sp.un(UnaryOp::Sech, copy_span(v)), sp.un(UnaryOp::Tanh, copy_span(v))),
                std::move(dv)));
        case UnaryOp::Sinh:  // cosh(u)*u'
            return sp.mul(sp.un(UnaryOp::Cosh, copy_span(v)), std::move(dv));
        case UnaryOp::Cosh:  // sinh(u)*u'
            return sp.mul(sp.un(UnaryOp::Sinh, copy_span(v)), std::move(dv));
    }
    return {};
}

Toks binary_rule(BinaryOp op, std::span<const Token> va, std::span<const Token> vb, Toks da,
                 Toks db, const Splicer& sp) {
    switch (op) {
        case BinaryOp::Add:
            return sp.add(std::move(da), std::move(db));
        case BinaryOp::Sub:
            return sp.sub(std::move(da), std::move(db));
        case BinaryOp::Mul:  // u'*v + u*v'
            return sp.add(sp.mul(std::move(da), copy_span(vb)),
                          sp.mul(copy_span(va), std::move(db)));
        case BinaryOp::Div:  // (u'*v - u*v')/(v*v)
            return sp.div(sp.sub(sp.mul(std::move(da), copy_span(vb)),
                                 sp.mul(copy_span(va), std::move(db))),
                          sp.mul(copy_span(vb), copy_span(vb)));
        case BinaryOp::Pow:  // u^v*(v'*log(u) + v*u'/u)
            return sp.mul(
                sp.bin(BinaryOp::Pow, copy_span(va), copy_span(vb)),
                sp.add(sp.mul(std::move(db), sp.un(UnaryOp::Log, copy_span(va))),
                       sp.div(sp.mul(copy_span(vb), std::move(da)), copy_span(va))));
    }
    return {};
}

}  // namespace

PostfixExpr differentiate(const PostfixExpr& expr, int var, SimplifyMode mode) {
    const Splicer sp{mode == SimplifyMode::DuringSplice};
    std::span<const Token> in = expr.span();

    // Left-to-right pass over the array. Each stack entry pairs the operand's
    // value slice (a view into the input) with its derivative tokens.
    struct Entry {
        std::size_t lo;  // value slice is in[lo..i] at the time of reduction
        Toks deriv;
    };
    std::vector<Entry> stack;
    stack.reserve(in.size());

    for (std::size_t i = 0; i < in.size(); ++i) {
        const Token& tok = in[i];
        switch (tok.kind) {
            case Token::Kind::Variable:
                stack.push_back({i, sp.lit(tok.index == var ? 1.0 : 0.0)});
                break;
            case Token::Kind::Literal:
            case Token::Kind::FitConst:
                stack.push_back({i, sp.lit(0.0)});
                break;
            case Token::Kind::Unary: {
                Entry a = std::move(stack.back());
                stack.pop_back();
                Toks d = unary_rule(tok.unary_op(), in.subspan(a.lo, i - a.lo), std::move(a.deriv), sp);
                stack.push_back({a.lo, std::move(d)});
                break;
            }
            case Token::Kind::Binary: {
                Entry b = std::move(stack.back());
                stack.pop_back();
                Entry a = std::move(stack.back());
                stack.pop_back();
                Toks d = binary_rule(tok.binary_op(), in.subspan(a.lo, b.lo - a.lo),
                                     in.subspan(b.lo, i - b.lo), std::move(a.deriv),
                                     std::move(b.deriv), sp);
                stack.push_back({a.lo, std::move(d)});
                break;
            }
        }
    }
    return simplify(PostfixExpr(std::move(stack.back().deriv)));
}

PostfixExpr second_derivative(const PostfixExpr& expr, int var, SimplifyMode mode) {
    return differentiate(differentiate(expr, var, mode), var, mode);
}

namespace {

// One bottom-up rewriting pass. Entries describe the already-emitted operand
// slices so operator tokens can fold or elide their arguments in place.
Toks simplify_pass(const Toks& in) {
    struct Entry {
        std::size_t start;  // first output index of this operand slice
        bool lit;
        double value;
    };
    Toks out;
    out.reserve(in.size());
    std::vector<Entry> stack;

    auto collapse = [&](std::size_t start, double v) {
        out.resize(start);
        out.push_back(Token::literal(v));
        stack.push_back({start, true, v});
    };
    auto slices_equal = [&](const Entry& a, const Entry& b) {
        const std::size_t la = b.start - a.start, lb = out.size() - b.start;
        if (la != lb) return false;
        for (std::size_t k = 0; k < la; ++k)
            if (!(out[a.start + k] == out[b.start + k])) return false;
        return true;
    };

    for (const Token& tok : in) {
        switch (tok.kind) {
            case Token::Kind::Variable:
            case Token::Kind::FitConst:
                out.push_back(tok);
                stack.push_back({out.size() - 1, false, 0.0});
                break;
            case Token::Kind::Literal:
                out.push_back(tok);
                stack.push_back({out.size() - 1, true, tok.value});
                break;
            case Token::Kind::Unary: {
                Entry a = stack.back();
                stack.pop_back();
                if (a.lit) {
                    const double v = apply_unary(tok.unary_op(), a.value);
                    if (std::isfinite(v)) {
                        collapse(a.start, v);
                        break;
                    }
                }
                if (tok.unary_op() == UnaryOp::Neg && !out.empty() &&
                    out.back() == Token::unary(UnaryOp::Neg)) {
                    out.pop_back();  // neg(neg u) -> u
                    stack.push_back({a.start, false, 0.0});
                    break;
                }
                out.push_back(tok);
                stack.push_back({a.start, false, 0.0});
                break;
            }
            case Token::Kind::Binary: {
                Entry b = stack.back();
                stack.pop_back();
                Entry a = stack.back();
                stack.pop_back();
                const BinaryOp op = tok.binary_op();

                if (a.lit && b.lit) {
                    const double v = op == BinaryOp::Pow && a.value == 0.0 && b.value == 0.0
                                         ? 1.0  // 0^0 folds to 1
                                         : apply_binary(op, a.value, b.value);
                    if (std::isfinite(v)) {
                        collapse(a.start, v);
                        break;
                    }
                }

                auto drop_rhs_keep_lhs = [&] {
                    out.resize(b.start);
                    stack.push_back({a.start, a.lit, a.value});
                };
                auto drop_lhs_keep_rhs = [&] {
                    out.erase(out.begin() + a.start, out.begin() + b.start);
                    stack.push_back({a.start, b.lit, b.value});
                };

                if (b.lit) {
                    if ((op == BinaryOp::Add || op == BinaryOp::Sub) && b.value == 0.0) {
                        drop_rhs_keep_lhs();
                        break;
                    }
                    if ((op == BinaryOp::Mul || op == BinaryOp::Div || op == BinaryOp::Pow) &&
                        b.value == 1.0) {
                        drop_rhs_keep_lhs();
                        break;
                    }
                    if (op == BinaryOp::Mul && b.value == 0.0) {
                        collapse(a.start, 0.0);
                        break;
                    }
                    if (op == BinaryOp::Pow && b.value == 0.0) {
                        collapse(a.start, 1.0);
                        break;
                    }
                }
                if (a.lit) {
                    if (op == BinaryOp::Add && a.value == 0.0) {
                        drop_lhs_keep_rhs();
                        break;
                    }
                    if (op == BinaryOp::Mul && a.value == 1.0) {
                        drop_lhs_keep_rhs();
                        break;
                    }
                    if ((op == BinaryOp::Mul || op == BinaryOp::Div) && a.value == 0.0) {
                        collapse(a.start, 0.0);
                        break;
                    }
                    if (op == BinaryOp::Sub && a.value == 0.0) {
                        drop_lhs_keep_rhs();
                        out.push_back(Token::unary(UnaryOp::Neg));  // 0-u -> neg u
                        break;
                    }
                }
                // Syntactic x-x -> 0 and x/x -> 1 on token-identical slices.
                if ((op == BinaryOp::Sub || op == BinaryOp::Div) && slices_equal(a, b)) {
                    collapse(a.start, op == BinaryOp::Sub ? 0.0 : 1.0);
                    break;
                }
                out.push_back(tok);
                stack.push_back({a.start, false, 0.0});
                break;
            }
        }
    }
    return out;
}

}  // namespace

PostfixExpr simplify(const PostfixExpr& expr) {
    Toks cur = expr.tokens();
    for (;;) {
        Toks next = simplify_pass(cur);
        if (next == cur) break;
        cur = std::move(next);
    }
    return PostfixExpr(std::move(cur));
}

}  // namespace pisr
