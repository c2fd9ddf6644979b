#include "pisr/expr.hpp"

#include <stdexcept>

namespace pisr {

bool validate_postfix(std::span<const Token> tokens) {
    if (tokens.empty()) return false;
    int stack = 0;
    for (const Token& tok : tokens) {
        if (stack < tok.arity()) return false;
        stack += 1 - tok.arity();
    }
    return stack == 1;
}

int depth_of_tokens(std::span<const Token> tokens) {
    if (!validate_postfix(tokens)) throw std::invalid_argument("depth_of: invalid postfix program");
    std::vector<int> heights;
    heights.reserve(tokens.size());
    for (const Token& tok : tokens) {
        switch (tok.arity()) {
            case 0:
                heights.push_back(0);
                break;
            case 1:
                heights.back() += 1;
                break;
            default: {
                int rhs = heights.back();
                heights.pop_back();
                heights.back() = 1 + std::max(heights.back(), rhs);
            }
        }
    }
    return heights.back();
}

std::vector<int> subtree_sizes(std::span<const Token> tokens) {
    std::vector<int> sizes(tokens.size());
    std::vector<int> stack;
    stack.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        int sz = 1;
        for (int k = 0; k < tokens[i].arity(); ++k) {
            sz += sizes[stack.back()];
            stack.pop_back();
        }
        sizes[i] = sz;
        stack.push_back(static_cast<int>(i));
    }
    return sizes;
}

PostfixExpr::PostfixExpr(std::vector<Token> tokens) : tokens_(std::move(tokens)) {
    if (!validate_postfix(tokens_)) throw std::invalid_argument("PostfixExpr: invalid postfix program");
    depth_ = depth_of_tokens(tokens_);
}

bool PostfixExpr::references_variable(int var) const {
    for (const Token& tok : tokens_)
        if (tok.kind == Token::Kind::Variable && tok.index == var) return true;
    return false;
}

int PostfixExpr::num_fit_slots() const {
    int n = 0;
    for (const Token& tok : tokens_)
        if (tok.kind == Token::Kind::FitConst) n = std::max(n, tok.index + 1);
    return n;
}

std::vector<std::string> PostfixExpr::token_strings() const {
    std::vector<std::string> out;
    out.reserve(tokens_.size());
    for (const Token& tok : tokens_) out.push_back(token_to_string(tok));
    return out;
}

PostfixExpr PostfixExpr::from_token_strings(const std::vector<std::string>& strs) {
    std::vector<Token> tokens;
    tokens.reserve(strs.size());
    for (const std::string& s : strs) {
        auto tok = token_from_string(s);
        if (!tok) throw std::invalid_argument("unknown token: '" + s + "'");
        tokens.push_back(*tok);
    }
    return PostfixExpr(std::move(tokens));
}

namespace {

std::string render_leaf(const Token& tok, std::span<const double> constants, bool substitute) {
    switch (tok.kind) {
        case Token::Kind::Variable:
            return tok.index == 0 ? "x" : "x" + std::to_string(tok.index);
        case Token::Kind::Literal:
            return format_real(tok.value);
        case Token::Kind::FitConst:
            if (!substitute) return "c" + std::to_string(tok.index);
            if (tok.index >= constants.size())
                throw std::out_of_range("to_infix: no constant for slot c" + std::to_string(tok.index));
            return format_real(constants[tok.index]);
        default:
            return {};
    }
}

std::string infix_impl(const PostfixExpr& expr, std::span<const double> constants, bool substitute) {
    static constexpr const char* kBinarySymbols[] = {" + ", " - ", " * ", " / ", " ^ "};
    std::vector<std::string> stack;
    for (const Token& tok : expr.tokens()) {
        switch (tok.kind) {
            case Token::Kind::Unary: {
                std::string arg = std::move(stack.back());
                stack.pop_back();
                if (tok.unary_op() == UnaryOp::Neg)
                    stack.push_back("(-" + arg + ")");
                else
                    stack.push_back(std::string(name_of(tok.unary_op())) + "(" + arg + ")");
                break;
            }
            case Token::Kind::Binary: {
                std::string rhs = std::move(stack.back());
                stack.pop_back();
                std::string lhs = std::move(stack.back());
                stack.pop_back();
                stack.push_back("(" + lhs + kBinarySymbols[tok.op] + rhs + ")");
                break;
            }
            default:
                stack.push_back(render_leaf(tok, constants, substitute));
        }
    }
    return stack.back();
}

}  // namespace

std::string to_infix(const PostfixExpr& expr, std::span<const double> constants) {
    return infix_impl(expr, constants, true);
}

std::string to_infix(const PostfixExpr& expr) { return infix_impl(expr, {}, false); }

int renumber_fit_slots(std::vector<Token>& tokens) {
    int next = 0;
    for (Token& tok : tokens)
        if (tok.kind == Token::Kind::FitConst) tok.index = static_cast<std::uint16_t>(next++);
    return next;
}

}  // namespace pisr
