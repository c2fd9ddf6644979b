#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "pisr/json_io.hpp"
#include "pisr/search.hpp"
#include "test_util.hpp"

using namespace pisr;
using namespace pisr::test;

namespace {

Grammar planted_grammar() {
    Grammar g;
    g.max_depth = 2;
    g.unary = {UnaryOp::Sech, UnaryOp::Tanh};
    g.binary = {BinaryOp::Add, BinaryOp::Mul};
    return g;
}

long planted_count_oracle(int depth) {
    long c = 1;  // single leaf kind {x}
    for (int d = 1; d <= depth; ++d) c = 1 + 2 * c + 2 * c * c;
    return c;
}

PlantedSechProblem planted_problem() {
    return PlantedSechProblem(Grid::uniform(-10.0, 10.0, 127));
}

}  // namespace

TEST_CASE("brute force recovers the planted expression") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();
    SearchBudget budget;
    budget.max_evaluations = 100000;

    const SearchOutcome out = brute_force(problem, g, g, FitConfig{}, budget);
    REQUIRE(out.best.has_value());
    CHECK(out.best_report.total == 0.0);
    CHECK(out.best_report.total < 1e-20);
    CHECK(out.best->n_expr == make_expr({X(), U(UnaryOp::Sech)}));
    CHECK_FALSE(out.exhausted);

    CHECK(planted_count_oracle(2) == 61);
    CHECK(out.visited == 61);
    CHECK(out.scored <= out.visited);
    CHECK(out.scored >= 1);
}

TEST_CASE("brute force: everything trivial gives a diagnostic") {
    const PlantedSechProblem problem = planted_problem();
    Grammar g;
    g.max_depth = 1;  // only [x]; its derivative variance is zero
    SearchBudget budget;
    const SearchOutcome out = brute_force(problem, g, g, FitConfig{}, budget);
    CHECK_FALSE(out.best.has_value());
    CHECK_FALSE(out.diagnostic.empty());
    CHECK(out.visited == 1);
    CHECK(out.scored == 0);
}

TEST_CASE("brute force: evaluation budget sets the exhausted flag") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();
    SearchBudget budget;
    budget.max_evaluations = 5;
    const SearchOutcome out = brute_force(problem, g, g, FitConfig{}, budget);
    CHECK(out.exhausted);
    CHECK(out.evaluations <= 5);
    CHECK(out.visited < 61);
}

TEST_CASE("brute force: ties break toward fewer tokens") {
    // sech(x) and sech(-(-x)) both hit zero loss; the 2-token form must win
    const PlantedSechProblem problem = planted_problem();
    Grammar g;
    g.max_depth = 3;
    g.unary = {UnaryOp::Neg, UnaryOp::Sech};
    SearchBudget budget;
    const SearchOutcome out = brute_force(problem, g, g, FitConfig{}, budget);
    REQUIRE(out.best.has_value());
    CHECK(out.best_report.total == 0.0);
    CHECK(out.best->n_expr.size() == 2);
}

TEST_CASE("annealing on the planted problem") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();

    AnnealOptions opts;
    opts.schedule = {1.0, 0.9, 50, 1e-3};
    opts.budget.max_evaluations = 4000;

    Rng rng(17);
    auto init = sample_initial_candidate(problem, g, g, rng, 32);
    REQUIRE(init.has_value());

    std::vector<TraceRow> trace;
    const SearchOutcome out = simulated_annealing(problem, *init, g, g, opts, 17, &trace);
    REQUIRE(out.best.has_value());
    CHECK_FALSE(trace.empty());

    // best-so-far is monotone nonincreasing along the trace
    double prev = trace.front().best_total;
    for (const TraceRow& row : trace) {
        CHECK(row.best_total <= prev);
        CHECK(row.best_total <= row.current_total + 1e-30);
        prev = row.best_total;
    }
    CHECK(out.best_report.total == trace.back().best_total);
}

TEST_CASE("annealing at near-zero temperature only accepts improvements") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();

    AnnealOptions opts;
    opts.schedule = {1e-10, 0.5, 300, 1e-11};
    opts.budget.max_evaluations = 300;

    Rng rng(3);
    auto init = sample_initial_candidate(problem, g, g, rng, 16);
    REQUIRE(init.has_value());
    std::vector<TraceRow> trace;
    simulated_annealing(problem, *init, g, g, opts, 3, &trace);
    double prev = trace.front().current_total;
    for (const TraceRow& row : trace) {
        CHECK(row.current_total <= prev + 1e-30);
        prev = row.current_total;
    }
}

TEST_CASE("annealing is deterministic given the seed") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();
    AnnealOptions opts;
    opts.schedule = {1.0, 0.9, 40, 1e-2};
    opts.budget.max_evaluations = 1500;

    Rng rng1(77), rng2(77);
    auto i1 = sample_initial_candidate(problem, g, g, rng1, 16);
    auto i2 = sample_initial_candidate(problem, g, g, rng2, 16);
    REQUIRE(i1.has_value());
    CHECK(i1->n_expr == i2->n_expr);

    std::vector<TraceRow> t1, t2;
    const SearchOutcome a = simulated_annealing(problem, *i1, g, g, opts, 99, &t1);
    const SearchOutcome b = simulated_annealing(problem, *i2, g, g, opts, 99, &t2);
    CHECK(trace_to_csv(t1) == trace_to_csv(t2));
    REQUIRE(a.best.has_value());
    REQUIRE(b.best.has_value());
    CHECK(dump_json(a.best->to_json()) == dump_json(b.best->to_json()));
    CHECK(a.best_report.total == b.best_report.total);
}

TEST_CASE("trivial initial candidate is refused") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();
    CandidateSolution init = assemble_candidate(problem, nullptr, make_expr({X()}), Provenance::Sampled);
    AnnealOptions opts;
    opts.budget.max_evaluations = 10;
    CHECK_THROWS_AS(simulated_annealing(problem, init, g, g, opts, 1), std::invalid_argument);
}

TEST_CASE("checkpoint round trip and split-run equivalence") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();
    const std::string ckpt = "test_ckpt_tmp.json";

    AnnealOptions full;
    full.schedule = {1.0, 0.9, 25, 1e-2};
    full.budget.max_evaluations = 800;

    Rng rng(2025);
    auto init = sample_initial_candidate(problem, g, g, rng, 16);
    REQUIRE(init.has_value());

    const SearchOutcome whole = simulated_annealing(problem, *init, g, g, full, 5);

    // same run split at 300 evaluations
    AnnealOptions first = full;
    first.budget.max_evaluations = 300;
    first.checkpoint_path = ckpt;
    const SearchOutcome part1 = simulated_annealing(problem, *init, g, g, first, 5);
    CHECK(part1.exhausted);

    const AnnealState saved = load_checkpoint(ckpt);
    CHECK(dump_json(saved.to_json()) == dump_json(load_checkpoint(ckpt).to_json()));

    AnnealOptions rest = full;
    const SearchOutcome part2 = resume_annealing(problem, saved, g, g, rest);
    REQUIRE(whole.best.has_value());
    REQUIRE(part2.best.has_value());
    CHECK(dump_json(part2.best->to_json()) == dump_json(whole.best->to_json()));
    CHECK(part2.best_report.total == whole.best_report.total);
    CHECK(part2.evaluations == whole.evaluations);

    // resuming a finished run performs no further evaluations
    AnnealState done = saved;
    done.finished = true;
    const SearchOutcome noop = resume_annealing(problem, done, g, g, rest);
    CHECK(noop.evaluations == saved.evaluations);

    CHECK_THROWS_AS(load_checkpoint("does_not_exist_ckpt.json"), std::runtime_error);
    std::remove(ckpt.c_str());
}

TEST_CASE("parallel annealing returns an accepted candidate") {
    const PlantedSechProblem problem = planted_problem();
    const Grammar g = planted_grammar();
    AnnealOptions opts;
    opts.schedule = {1.0, 0.9, 30, 1e-2};
    opts.budget.max_evaluations = 600;  // per worker

    Rng rng(8);
    auto init = sample_initial_candidate(problem, g, g, rng, 16);
    REQUIRE(init.has_value());
    const SearchOutcome out = parallel_annealing(problem, *init, g, g, opts, 8, 3);
    REQUIRE(out.best.has_value());
    CHECK(std::isfinite(out.best_report.total));
    auto prepared = problem.prepare(*out.best);
    CHECK(prepared->nontrivial(out.best->constants));
}

TEST_CASE("soliton search smoke: fitted gamma0 respects its bound") {
    SolitonProblem sp;
    sp.grid = Grid::uniform(-10.0, 10.0, 127);
    sp.triviality_threshold = 1e-4;
    SolitonSearchProblem problem(sp);

    Grammar g;
    g.max_depth = 2;
    g.unary = {UnaryOp::Sech, UnaryOp::Tanh};
    g.binary = {BinaryOp::Mul};
    g.fit_const_leaves = true;

    SearchBudget budget;
    budget.max_evaluations = 200;
    FitConfig fit;
    fit.max_iterations = 15;

    const SearchOutcome out = brute_force(problem, g, g, fit, budget);
    REQUIRE(out.best.has_value());
    CHECK(out.best->gamma0_slot >= 0);
    const double gamma0 = out.best->gamma0();
    CHECK(gamma0 >= 1.0);
    CHECK(gamma0 <= 100.0);
    CHECK_FALSE(out.best_report.rejected);
}
