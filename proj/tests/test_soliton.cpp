#include <doctest.h>

#include <cmath>

#include "pisr/json_io.hpp"
#include "pisr/soliton.hpp"
#include "pisr/symdiff.hpp"
#include "test_util.hpp"

using namespace pisr;
using namespace pisr::test;

namespace {

CandidateSolution golden() {
    return CandidateSolution::from_json(load_json_file(PISR_GOLDEN_JSON));
}

SolitonProblem default_problem() {
    SolitonProblem p;
    p.grid = Grid::uniform(-10.0, 10.0, 127);
    return p;
}

CandidateSolution make_candidate(PostfixExpr u, PostfixExpr n, double gamma0 = 2.0) {
    CandidateSolution c;
    c.u_expr = std::move(u);
    c.n_expr = std::move(n);
    c.gamma0_slot = 0;
    c.constants = {gamma0};
    return c;
}

}  // namespace

TEST_CASE("compose_g") {
    // sinh(0) - alpha*tanh(0) collapses to the zero literal
    CHECK(compose_g(make_expr({L(0.0)}), 0.4) == make_expr({L(0.0)}));

    const PostfixExpr g = compose_g(make_expr({X()}), 0.4);
    CHECK(g.size() <= 2 * 1 + 5);
    const double got = eval_scalar(g, 0.1, {});
    const double oracle = std::sinh(0.1) - 0.4 * std::tanh(0.1);  // libm calculator oracle
    CHECK(std::abs(got - oracle) < 1e-15);
    CHECK(std::abs(got - 0.06029) < 1e-5);

    const PostfixExpr gu = compose_g(golden().u_expr, 0.4);
    CHECK(gu.size() <= 2 * golden().u_expr.size() + 5);
}

TEST_CASE("compose_a") {
    const std::vector<double> consts{5.22145};

    // small-angle limit: a(u)/u -> 1 - alpha*gamma0 as u -> 0
    const PostfixExpr a_of_x = compose_a(make_expr({X()}), 0.4, 0);
    const double ratio = eval_scalar(a_of_x, 1e-6, consts) / 1e-6;
    CHECK(std::abs(ratio - (1.0 - 0.4 * 5.22145)) < 1e-6);
    CHECK(std::abs(ratio - (-1.0886)) < 1e-3);

    // published solution at the origin
    const CandidateSolution gold = golden();
    const PostfixExpr a_gold = compose_a(gold.u_expr, 0.4, gold.gamma0_slot);
    CHECK(std::abs(eval_scalar(a_gold, 0.0, gold.constants) - 0.1078) < 1e-3);

    // gamma0 = 1 makes a coincide with g pointwise
    const PostfixExpr u = make_expr({X(), U(UnaryOp::Tanh)});
    const PostfixExpr a1 = compose_a(u, 0.4, 0);
    const PostfixExpr g = compose_g(u, 0.4);
    const Grid grid = Grid::uniform(-10.0, 10.0, 127);
    const std::vector<double> one{1.0};
    const auto va = eval_batch(a1, grid, one);
    const auto vg = eval_batch(g, grid, one);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(va[i] == vg[i]);
}

TEST_CASE("field equation loss") {
    const SolitonProblem prob = default_problem();

    // u == 0, n == n0: every term vanishes identically
    const CandidateSolution flat = make_candidate(make_expr({L(0.0)}), make_expr({L(1.0)}));
    CHECK(loss_eq1(flat, prob.params, prob.grid) == 0.0);

    const CandidateSolution gold = golden();
    const double sne = loss_eq1(gold, prob.params, prob.grid);
    CHECK(sne >= 0.001);
    CHECK(sne <= 0.1);
    // cross-check against an independent CAS evaluation of the same residual
    CHECK(std::abs(sne - 0.0147636604857693) < 1e-9);

    // halving the grid keeps a subset of the squared terms
    std::vector<double> half_pts;
    for (std::size_t i = 0; i < prob.grid.size(); i += 2) half_pts.push_back(prob.grid.points[i]);
    const Grid half = Grid::from_points(std::move(half_pts));
    REQUIRE(half.symmetric);
    CHECK(loss_eq1(gold, prob.params, half) <= sne);
}

TEST_CASE("pressure balance loss") {
    const SolitonProblem prob = default_problem();
    const CandidateSolution flat = make_candidate(make_expr({L(0.0)}), make_expr({L(1.0)}));
    CHECK(loss_eq2(flat, prob.params, prob.grid) == 0.0);

    const double sne = loss_eq2(golden(), prob.params, prob.grid);
    CHECK(sne < 1e-6);
    CHECK(sne < 1e-9);  // measured around 4e-11

    // n with a zero crossing hits the log domain
    const CandidateSolution bad = make_candidate(make_expr({L(0.0)}), make_expr({X()}));
    CHECK_FALSE(std::isfinite(loss_eq2(bad, prob.params, prob.grid)));
}

TEST_CASE("boundary losses") {
    const SolitonProblem prob = default_problem();
    const CandidateSolution flat = make_candidate(make_expr({L(0.0)}), make_expr({L(1.0)}));
    for (double t : loss_boundary(flat, prob.params, prob.grid)) CHECK(t == 0.0);

    for (double t : loss_boundary(golden(), prob.params, prob.grid)) {
        CHECK(t < 1e-6);
        CHECK(t < 1e-8);  // measured around 2e-10
    }

    // unbounded u blows up at the edges
    const CandidateSolution linear = make_candidate(make_expr({X()}), make_expr({L(1.0)}));
    const auto terms = loss_boundary(linear, prob.params, prob.grid);
    CHECK(terms[0] > 1.0);
    CHECK(terms[1] > 1.0);
}

TEST_CASE("symmetry loss") {
    const Grid grid = Grid::uniform(-10.0, 10.0, 127);
    const CandidateSolution even = make_candidate(make_expr({L(0.0)}), make_expr({X(), U(UnaryOp::Sech)}));
    CHECK(loss_symmetry(even, grid) == 0.0);

    const CandidateSolution odd = make_candidate(make_expr({L(0.0)}), make_expr({X()}));
    double oracle = 0.0;
    for (double x : grid.points) oracle += (2.0 * x) * (2.0 * x);
    CHECK(loss_symmetry(odd, grid) == oracle);
    CHECK(loss_symmetry(odd, grid) > 0.0);

    CHECK(loss_symmetry(golden(), grid) == 0.0);
    CHECK(loss_symmetry(golden(), grid) <= 1e-20);

    const Grid asym = Grid::uniform(0.0, 5.0, 11);
    CHECK_THROWS_AS(loss_symmetry(even, asym), std::invalid_argument);
}

TEST_CASE("data losses") {
    const SolitonProblem prob = default_problem();
    const CandidateSolution gold = golden();

    // dataset generated from the candidate itself: exact zeros
    Dataset self;
    self.grid = prob.grid;
    const auto n = eval_batch(gold.n_expr, prob.grid, gold.constants);
    const PostfixExpr a_expr = compose_a(gold.u_expr, prob.params.alpha, gold.gamma0_slot);
    const auto a = eval_batch(a_expr, prob.grid, gold.constants);
    self.density.resize(prob.grid.size());
    self.a_profile = a;
    for (std::size_t i = 0; i < prob.grid.size(); ++i)
        self.density[i] = n[i] / prob.params.n0 - 1.0;

    auto [d1, d2] = loss_data(gold, prob.params, self);
    CHECK(d1 == 0.0);
    CHECK(d2 == 0.0);

    // uniform +0.1 offset on the amplitude column: 127 * (10*0.1)^2
    Dataset shifted = self;
    for (double& v : shifted.a_profile) v += 0.1;
    auto [s1, s2] = loss_data(gold, prob.params, shifted);
    CHECK(s1 == 0.0);
    CHECK(std::abs(s2 - 127.0) < 1e-9);

    // CSV round trip is bitwise
    const std::string csv = self.to_csv();
    write_text_file("self_data_tmp.csv", csv);
    const Dataset reread = Dataset::load_csv("self_data_tmp.csv");
    std::remove("self_data_tmp.csv");
    CHECK(reread.grid.points == self.grid.points);
    CHECK(reread.density == self.density);
    CHECK(reread.a_profile == self.a_profile);
}

TEST_CASE("total loss report") {
    SolitonProblem prob = default_problem();
    prob.triviality_threshold = 1e-4;  // below the published solution's variances

    const LossReport r = prob.total_loss(golden());
    CHECK_FALSE(r.rejected);
    double sum = 0.0;
    for (int k = 0; k < LossReport::kNumTerms; ++k) {
        CHECK(r.sne[k] >= 0.0);
        sum += r.sne[k];
    }
    CHECK(r.total == sum);
    CHECK(r.no_data);
    CHECK(r.sne[7] == 0.0);
    CHECK(r.sne[8] == 0.0);
    CHECK(r.count == 127);
    for (int k = 0; k < LossReport::kNumTerms; ++k) CHECK(r.mse(k) * 127.0 == r.sne[k]);

    // JSON round trip preserves every number bitwise
    const LossReport back = LossReport::from_json(nlohmann::json::parse(dump_json(r.to_json())));
    CHECK(back.sne == r.sne);
    CHECK(back.total == r.total);
    CHECK(back.rejected == r.rejected);
    CHECK(back.no_data == r.no_data);

    // the trivial pair is rejected, not scored as zero
    const LossReport flat =
        prob.total_loss(make_candidate(make_expr({L(0.0)}), make_expr({L(1.0)})));
    CHECK(flat.rejected);
    CHECK(flat.trivial);
}

TEST_CASE("triviality filter") {
    SolitonProblem prob = default_problem();
    const PostfixExpr good_n = make_expr({X(), U(UnaryOp::Sech), L(2.0), B(BinaryOp::Mul)});

    CHECK_FALSE(prob.triviality_check(make_candidate(make_expr({L(5.0)}), good_n)));

    // direct-evaluation variance oracle for the accepted example
    const PostfixExpr good_u = make_expr({X(), U(UnaryOp::Tanh)});
    for (auto f : {+[](double x) { return std::tanh(x); },
                   +[](double x) { return 2.0 / std::cosh(x); },
                   +[](double x) { return 1.0 / (std::cosh(x) * std::cosh(x)); },
                   +[](double x) { return -2.0 * std::tanh(x) / std::cosh(x); }}) {
        std::vector<double> vals;
        for (double x : prob.grid.points) vals.push_back(f(x));
        CHECK(variance(vals) >= 1e-3);
    }
    CHECK(prob.triviality_check(make_candidate(good_u, good_n)));

    // u = 1e-6 * x: variance scales with the square of the coefficient
    const PostfixExpr tiny = make_expr({X(), L(1e-6), B(BinaryOp::Mul)});
    std::vector<double> tiny_vals;
    for (double x : prob.grid.points) tiny_vals.push_back(1e-6 * x);
    CHECK(std::abs(variance(tiny_vals) - 3.386e-11) < 1e-13);
    CHECK_FALSE(prob.triviality_check(make_candidate(tiny, good_n)));

    // expressions must reference x
    CHECK_FALSE(prob.triviality_check(make_candidate(make_expr({C(0), U(UnaryOp::Sin)}), good_n)));
}

TEST_CASE("published solution vs the default variance threshold") {
    // Measured on the default grid: Var(u) ~ 9.5e-4 and Var(du/dx) ~ 2.9e-4,
    // both below the default 1e-3 threshold, so the published solution is
    // flagged trivial there; a 1e-4 threshold admits it.
    SolitonProblem prob = default_problem();
    const CandidateSolution gold = golden();

    const auto uvals = eval_batch(gold.u_expr, prob.grid, gold.constants);
    const auto duvals = eval_batch(differentiate(gold.u_expr, 0), prob.grid, gold.constants);
    CHECK(variance(uvals) == doctest::Approx(9.4706e-4).epsilon(1e-3));
    CHECK(variance(duvals) == doctest::Approx(2.9022e-4).epsilon(1e-3));

    CHECK(variance(uvals) < 1e-3);
    CHECK_FALSE(prob.triviality_check(gold));

    prob.triviality_threshold = 1e-4;
    CHECK(prob.triviality_check(gold));
}

TEST_CASE("expression JSON round trip") {
    const PostfixExpr e = make_expr({C(0), X(), U(UnaryOp::Sech), B(BinaryOp::Mul)});
    const std::vector<double> consts{3.235};
    const nlohmann::json j = nlohmann::json::parse(dump_json(expr_to_json(e, consts)));
    auto [back, back_consts] = expr_from_json(j);
    CHECK(back == e);
    CHECK(back_consts == consts);
    CHECK_THROWS(expr_from_json(nlohmann::json{{"postfix", {"c0", "sin"}}}));
}

TEST_CASE("candidate JSON round trip") {
    const CandidateSolution gold = golden();
    const nlohmann::json j = gold.to_json(true);
    const CandidateSolution back = CandidateSolution::from_json(j);
    CHECK(back.u_expr == gold.u_expr);
    CHECK(back.n_expr == gold.n_expr);
    CHECK(back.constants == gold.constants);
    CHECK(back.gamma0_slot == gold.gamma0_slot);
    CHECK(j.at("u").at("infix").get<std::string>().find("tanh") != std::string::npos);

    nlohmann::json bad = j;
    bad["u"]["postfix"] = {"x", "frob"};
    CHECK_THROWS(CandidateSolution::from_json(bad));
}
