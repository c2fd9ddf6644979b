#include "pisr/eval.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pisr {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Grid Grid::uniform(double x_min, double x_max, int n_points) {
    if (n_points < 2) throw std::invalid_argument("grid: need at least 2 points");
    if (!(x_min < x_max)) throw std::invalid_argument("grid: x_min must be < x_max");
    Grid g;
    g.points.resize(n_points);
    const double h = (x_max - x_min) / (n_points - 1);
    if (x_min == -x_max) {
        for (int i = 0; i < n_points / 2; ++i) {
            const double t = x_min + i * h;
            g.points[i] = t;
            g.points[n_points - 1 - i] = -t;
        }
        if (n_points % 2 == 1) g.points[n_points / 2] = 0.0;
        g.symmetric = true;
    } else {
        for (int i = 0; i < n_points; ++i) g.points[i] = x_min + i * h;
        g.points[n_points - 1] = x_max;
    }
    return g;
}

Grid Grid::from_points(std::vector<double> points) {
    if (points.size() < 2) throw std::invalid_argument("grid: need at least 2 points");
    for (std::size_t i = 1; i < points.size(); ++i)
        if (!(points[i - 1] < points[i]))
            throw std::invalid_argument("grid: points must be strictly increasing");
    Grid g;
    g.points = std::move(points);
    g.symmetric = true;
    const std::size_t n = g.points.size();
    for (std::size_t i = 0; i < n; ++i)
        if (g.points[i] != -g.points[n - 1 - i]) {
            g.symmetric = false;
            break;
        }
    return g;
}

double apply_unary(UnaryOp op, double a) {
    switch (op) {
        case UnaryOp::Neg: return -a;
        case UnaryOp::Log: return std::log(a);
        case UnaryOp::Exp: return std::exp(a);
        case UnaryOp::Cos: return std::cos(a);
        case UnaryOp::Sin: return std::sin(a);
        case UnaryOp::Sqrt: return std::sqrt(a);
        case UnaryOp::Asin: return std::asin(a);
        case UnaryOp::Acos: return std::acos(a);
        case UnaryOp::Tanh: return std::tanh(a);
        case UnaryOp::Sech: return 1.0 / std::cosh(a);
        case UnaryOp::Sinh: return std::sinh(a);
        case UnaryOp::Cosh: return std::cosh(a);
    }
    return kNaN;
}

double apply_binary(BinaryOp op, double a, double b) {
    switch (op) {
        case BinaryOp::Add: return a + b;
        case BinaryOp::Sub: return a - b;
        case BinaryOp::Mul: return a * b;
        case BinaryOp::Div: return a / b;
        case BinaryOp::Pow:
            // pow(NaN, 0) and pow(1, NaN) are 1 per IEEE; force NaN operands
            // to poison the result so domain violations stay visible.
            if (std::isnan(a) || std::isnan(b)) return kNaN;
            return std::pow(a, b);
    }
    return kNaN;
}

namespace {

double eval_on_stack(std::span<const Token> tokens, double x, std::span<const double> constants,
                     std::vector<double>& stack) {
    stack.clear();
    for (const Token& tok : tokens) {
        switch (tok.kind) {
            case Token::Kind::Variable:
                if (tok.index != 0) throw std::invalid_argument("eval: variable index out of range");
                stack.push_back(x);
                break;
            case Token::Kind::Literal:
                stack.push_back(tok.value);
                break;
            case Token::Kind::FitConst:
                if (tok.index >= constants.size())
                    throw std::invalid_argument("eval: missing constant slot c" + std::to_string(tok.index));
                stack.push_back(constants[tok.index]);
                break;
            case Token::Kind::Unary:
                stack.back() = apply_unary(tok.unary_op(), stack.back());
                break;
            case Token::Kind::Binary: {
                const double rhs = stack.back();
                stack.pop_back();
                stack.back() = apply_binary(tok.binary_op(), stack.back(), rhs);
            }
        }
    }
    return stack.back();
}

}  // namespace

double eval_scalar(const PostfixExpr& expr, double x, std::span<const double> constants) {
    std::vector<double> stack;
    stack.reserve((expr.size() + 1) / 2);
    return eval_on_stack(expr.span(), x, constants, stack);
}

std::vector<double> eval_batch(const PostfixExpr& expr, const Grid& grid,
                               std::span<const double> constants) {
    std::vector<double> out(grid.size());
    std::vector<double> stack;
    stack.reserve((expr.size() + 1) / 2);
    for (std::size_t i = 0; i < grid.size(); ++i)
        out[i] = eval_on_stack(expr.span(), grid.points[i], constants, stack);
    return out;
}

double variance(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("variance: empty input");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double acc = 0.0;
    for (double v : values) acc += (v - mean) * (v - mean);
    return acc / static_cast<double>(values.size());
}

}  // namespace pisr
