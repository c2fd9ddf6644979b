#include "pisr/token.hpp"

#include <array>
#include <cstdio>
#include <cstdlib>

namespace pisr {

namespace {

constexpr std::array<const char*, kNumUnaryOps> kUnaryNames = {
    "neg", "log", "exp", "cos", "sin", "sqrt", "asin", "acos", "tanh", "sech", "sinh", "cosh",
};

constexpr std::array<const char*, kNumBinaryOps> kBinaryNames = {
    "add", "sub", "mul", "div", "pow",
};

}  // namespace

const char* name_of(UnaryOp op) { return kUnaryNames[static_cast<int>(op)]; }
const char* name_of(BinaryOp op) { return kBinaryNames[static_cast<int>(op)]; }

std::optional<UnaryOp> parse_unary(const std::string& name) {
    for (int i = 0; i < kNumUnaryOps; ++i)
        if (name == kUnaryNames[i]) return static_cast<UnaryOp>(i);
    return std::nullopt;
}

std::optional<BinaryOp> parse_binary(const std::string& name) {
    for (int i = 0; i < kNumBinaryOps; ++i)
        if (name == kBinaryNames[i]) return static_cast<BinaryOp>(i);
    return std::nullopt;
}

std::string format_real(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    return buf;
}

std::string format_real17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string token_to_string(const Token& tok) {
    switch (tok.kind) {
        case Token::Kind::Unary: return name_of(tok.unary_op());
        case Token::Kind::Binary: return name_of(tok.binary_op());
        case Token::Kind::Variable: return tok.index == 0 ? "x" : "x" + std::to_string(tok.index);
        case Token::Kind::FitConst: return "c" + std::to_string(tok.index);
        case Token::Kind::Literal: return format_real17(tok.value);
    }
    return {};
}

std::optional<Token> token_from_string(const std::string& s) {
    if (s.empty()) return std::nullopt;
    if (auto u = parse_unary(s)) return Token::unary(*u);
    if (auto b = parse_binary(s)) return Token::binary(*b);
    if (s == "x") return Token::variable(0);
    if (s[0] == 'x' && s.size() > 1) {
        char* end = nullptr;
        long idx = std::strtol(s.c_str() + 1, &end, 10);
        if (end && *end == '\0' && idx >= 0) return Token::variable(static_cast<int>(idx));
    }
    if (s[0] == 'c' && s.size() > 1) {
        char* end = nullptr;
        long slot = std::strtol(s.c_str() + 1, &end, 10);
        if (end && *end == '\0' && slot >= 0) return Token::fit_const(static_cast<int>(slot));
    }
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end && *end == '\0') return Token::literal(v);
    return std::nullopt;
}

}  // namespace pisr
