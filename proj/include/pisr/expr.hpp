#pragma once

#include <span>
#include <string>
#include <vector>

#include "pisr/token.hpp"

namespace pisr {

// Returns true iff the token sequence is a well-formed postfix program:
// scanning left to right, the operand stack never underflows and ends at
// exactly one entry.
bool validate_postfix(std::span<const Token> tokens);

// Tree height of a valid postfix program; a lone leaf has height 0.
int depth_of_tokens(std::span<const Token> tokens);

// Subtree sizes: sub[i] = number of tokens in the subexpression whose root is
// token i. Requires a valid program.
std::vector<int> subtree_sizes(std::span<const Token> tokens);

// Immutable postfix expression with cached depth. Construction validates.
class PostfixExpr {
public:
    PostfixExpr() : tokens_{Token::literal(0.0)}, depth_(0) {}
    explicit PostfixExpr(std::vector<Token> tokens);

    const std::vector<Token>& tokens() const { return tokens_; }
    std::span<const Token> span() const { return tokens_; }
    std::size_t size() const { return tokens_.size(); }
    int depth() const { return depth_; }

    bool references_variable(int var) const;
    // 1 + highest fit-constant slot index, 0 if none.
    int num_fit_slots() const;

    std::vector<std::string> token_strings() const;
    static PostfixExpr from_token_strings(const std::vector<std::string>& strs);

    bool operator==(const PostfixExpr&) const = default;

private:
    std::vector<Token> tokens_;
    int depth_;
};

inline int depth_of(const PostfixExpr& e) { return e.depth(); }

// Fully parenthesized display form; fit constants are substituted from
// `constants`. Throws std::out_of_range when a slot is missing.
std::string to_infix(const PostfixExpr& expr, std::span<const double> constants);
// Symbolic variant: fit constants render as c0, c1, ...
std::string to_infix(const PostfixExpr& expr);

// Renumbers fit-constant slots left to right starting at 0; returns the slot
// count. Used wherever fresh canonical numbering is required.
int renumber_fit_slots(std::vector<Token>& tokens);

}  // namespace pisr
