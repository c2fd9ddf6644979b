#include "pisr/grammar.hpp"

#include <cmath>
#include <stdexcept>

namespace pisr {

void Grammar::validate() const {
    if (max_depth < 1) throw std::invalid_argument("grammar: max_depth must be >= 1");
    if (num_leaf_kinds() == 0) throw std::invalid_argument("grammar: no leaf kinds available");
    if (num_variables < 0 || num_variables > 1 + 0xffff)
        throw std::invalid_argument("grammar: bad num_variables");
}

namespace {

std::vector<std::vector<Token>> leaf_layer(const Grammar& g) {
    std::vector<std::vector<Token>> layer;
    if (g.variable_leaves)
        for (int v = 0; v < g.num_variables; ++v) layer.push_back({Token::variable(v)});
    if (g.fit_const_leaves) layer.push_back({Token::fit_const(0)});
    return layer;
}

}  // namespace

bool enumerate_expressions(const Grammar& grammar, int depth,
                           const std::function<bool(const PostfixExpr&)>& visit) {
    grammar.validate();
    if (depth > grammar.max_depth)
        throw std::invalid_argument("enumerate_expressions: depth exceeds grammar.max_depth");

    // layers[h] holds every expression of exact height h; earlier layers are
    // needed to build binary combinations, so they stay materialized.
    std::vector<std::vector<std::vector<Token>>> layers;
    layers.push_back(leaf_layer(grammar));

    auto emit = [&](std::vector<Token> tokens) {
        renumber_fit_slots(tokens);
        return visit(PostfixExpr(std::move(tokens)));
    };

    if (!grammar.exact_depth || depth == 0)
        for (const auto& e : layers[0])
            if (!emit(e)) return false;

    for (int h = 1; h <= depth; ++h) {
        std::vector<std::vector<Token>> layer;
        for (UnaryOp op : grammar.unary) {
            for (const auto& child : layers[h - 1]) {
                std::vector<Token> tokens = child;
                tokens.push_back(Token::unary(op));
                layer.push_back(std::move(tokens));
            }
        }
        for (BinaryOp op : grammar.binary) {
            for (int ha = 0; ha <= h - 1; ++ha) {
                for (const auto& lhs : layers[ha]) {
                    for (int hb = 0; hb <= h - 1; ++hb) {
                        if (ha != h - 1 && hb != h - 1) continue;
                        for (const auto& rhs : layers[hb]) {
                            std::vector<Token> tokens = lhs;
                            tokens.insert(tokens.end(), rhs.begin(), rhs.end());
                            tokens.push_back(Token::binary(op));
                            layer.push_back(std::move(tokens));
                        }
                    }
                }
            }
        }
        if (!grammar.exact_depth || h == depth)
            for (const auto& e : layer)
                if (!emit(e)) return false;
        layers.push_back(std::move(layer));
    }
    return true;
}

namespace {

Token sample_leaf(const Grammar& g, Rng& rng) {
    int kinds = g.num_leaf_kinds();
    std::uniform_int_distribution<int> pick(0, kinds - 1);
    int k = pick(rng);
    if (g.variable_leaves && k < g.num_variables) return Token::variable(k);
    return Token::fit_const(0);
}

void sample_rec(const Grammar& g, Rng& rng, int depth, std::vector<Token>& out) {
    if (depth == 0) {
        out.push_back(sample_leaf(g, rng));
        return;
    }
    double wu = g.unary.empty() ? 0.0 : g.unary_weight;
    double wb = g.binary.empty() ? 0.0 : g.binary_weight;
    if (wu + wb <= 0.0)
        throw std::invalid_argument("sample_expression: no operator production can reach requested depth");
    std::uniform_real_distribution<double> uni(0.0, wu + wb);
    if (uni(rng) < wu) {
        sample_rec(g, rng, depth - 1, out);
        std::uniform_int_distribution<std::size_t> pick(0, g.unary.size() - 1);
        out.push_back(Token::unary(g.unary[pick(rng)]));
    } else {
        // One side carries the full height; the other gets a uniformly chosen
        // shallower height so every shape stays reachable.
        std::uniform_int_distribution<int> side(0, 1);
        std::uniform_int_distribution<int> shallow(0, depth - 1);
        bool deep_left = side(rng) == 0;
        int other = shallow(rng);
        sample_rec(g, rng, deep_left ? depth - 1 : other, out);
        sample_rec(g, rng, deep_left ? other : depth - 1, out);
        std::uniform_int_distribution<std::size_t> pick(0, g.binary.size() - 1);
        out.push_back(Token::binary(g.binary[pick(rng)]));
    }
}

// All same-arity replacements for one token under the grammar.
std::vector<Token> swap_alternatives(const Token& tok, const Grammar& g) {
    std::vector<Token> alts;
    switch (tok.kind) {
        case Token::Kind::Unary:
            for (UnaryOp op : g.unary)
                if (op != tok.unary_op()) alts.push_back(Token::unary(op));
            break;
        case Token::Kind::Binary:
            for (BinaryOp op : g.binary)
                if (op != tok.binary_op()) alts.push_back(Token::binary(op));
            break;
        default:
            if (g.variable_leaves)
                for (int v = 0; v < g.num_variables; ++v)
                    if (!(tok.kind == Token::Kind::Variable && tok.index == v))
                        alts.push_back(Token::variable(v));
            if (g.fit_const_leaves && tok.kind != Token::Kind::FitConst)
                alts.push_back(Token::fit_const(0));
    }
    return alts;
}

}  // namespace

PostfixExpr sample_expression(const Grammar& grammar, Rng& rng, int depth) {
    grammar.validate();
    if (depth > grammar.max_depth)
        throw std::invalid_argument("sample_expression: depth exceeds grammar.max_depth");
    std::vector<Token> tokens;
    tokens.reserve((std::size_t{2} << depth) - 1);
    sample_rec(grammar, rng, depth, tokens);
    renumber_fit_slots(tokens);
    return PostfixExpr(std::move(tokens));
}

PostfixExpr perturb(const PostfixExpr& expr, const Grammar& grammar, Rng& rng) {
    std::vector<Token> tokens = expr.tokens();
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    std::vector<std::size_t> literal_positions;
    for (std::size_t i = 0; i < tokens.size(); ++i)
        if (tokens[i].kind == Token::Kind::Literal && tokens[i].value != 0.0)
            literal_positions.push_back(i);

    bool jitter = uni(rng) < 0.2 && !literal_positions.empty();
    if (jitter) {
        std::uniform_int_distribution<std::size_t> pick(0, literal_positions.size() - 1);
        std::normal_distribution<double> step(0.0, 0.25);
        tokens[literal_positions[pick(rng)]].value *= std::exp(step(rng));
    } else {
        std::vector<std::size_t> swappable;
        for (std::size_t i = 0; i < tokens.size(); ++i)
            if (!swap_alternatives(tokens[i], grammar).empty()) swappable.push_back(i);
        if (swappable.empty()) return expr;  // degenerate grammar, nothing to move
        std::uniform_int_distribution<std::size_t> pick(0, swappable.size() - 1);
        std::size_t pos = swappable[pick(rng)];
        auto alts = swap_alternatives(tokens[pos], grammar);
        std::uniform_int_distribution<std::size_t> alt(0, alts.size() - 1);
        tokens[pos] = alts[alt(rng)];
    }
    renumber_fit_slots(tokens);
    return PostfixExpr(std::move(tokens));
}

}  // namespace pisr
