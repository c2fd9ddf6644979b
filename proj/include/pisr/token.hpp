#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace pisr {

// Operator table. Search grammars whitelist subsets of these; sinh/cosh are
// present because the physics compositions need them even though the default
// search set excludes them.
enum class UnaryOp : std::uint8_t {
    Neg,
    Log,
    Exp,
    Cos,
    Sin,
    Sqrt,
    Asin,
    Acos,
    Tanh,
    Sech,
    Sinh,
    Cosh,
};

enum class BinaryOp : std::uint8_t {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
};

inline constexpr int kNumUnaryOps = 12;
inline constexpr int kNumBinaryOps = 5;

const char* name_of(UnaryOp op);
const char* name_of(BinaryOp op);
std::optional<UnaryOp> parse_unary(const std::string& name);
std::optional<BinaryOp> parse_binary(const std::string& name);

// One postfix token. Leaves are variables, literals, or fit-constant
// placeholders whose values live in a candidate's constants vector.
struct Token {
    enum class Kind : std::uint8_t { Unary, Binary, Variable, Literal, FitConst };

    Kind kind = Kind::Literal;
    std::uint8_t op = 0;   // UnaryOp / BinaryOp when kind is an operator
    std::uint16_t index = 0;  // variable index or constant slot
    double value = 0.0;       // literal payload

    static Token unary(UnaryOp o) { return {Kind::Unary, static_cast<std::uint8_t>(o), 0, 0.0}; }
    static Token binary(BinaryOp o) { return {Kind::Binary, static_cast<std::uint8_t>(o), 0, 0.0}; }
    static Token variable(int i) { return {Kind::Variable, 0, static_cast<std::uint16_t>(i), 0.0}; }
    static Token literal(double v) { return {Kind::Literal, 0, 0, v}; }
    static Token fit_const(int slot) { return {Kind::FitConst, 0, static_cast<std::uint16_t>(slot), 0.0}; }

    bool is_operator() const { return kind == Kind::Unary || kind == Kind::Binary; }
    bool is_leaf() const { return !is_operator(); }
    int arity() const { return kind == Kind::Unary ? 1 : kind == Kind::Binary ? 2 : 0; }
    UnaryOp unary_op() const { return static_cast<UnaryOp>(op); }
    BinaryOp binary_op() const { return static_cast<BinaryOp>(op); }

    bool operator==(const Token&) const = default;
};

// Shortest decimal string that parses back to the same double.
std::string format_real(double v);
// 17 significant digits, for report/serialization output.
std::string format_real17(double v);

// Token <-> string form used by the JSON wire format: "x"/"x{i}", "c{i}",
// operator names, or a numeric literal.
std::string token_to_string(const Token& tok);
std::optional<Token> token_from_string(const std::string& s);

}  // namespace pisr
