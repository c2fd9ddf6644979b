// Acceptance checklist for the engine: one criterion per block, one PASS/FAIL
// line each, nonzero exit when anything fails. Tolerances are pinned in code.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "pisr/config.hpp"
#include "pisr/json_io.hpp"
#include "pisr/search.hpp"
#include "pisr/symdiff.hpp"

using namespace pisr;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Criterion {
    std::string title;
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("FAILED: " + what);
        }
    }
    void note(const std::string& s) { notes.push_back(s); }
};

Grammar full_table_grammar(int max_depth) {
    Grammar g;
    g.max_depth = max_depth;
    g.unary = {UnaryOp::Neg,  UnaryOp::Log,  UnaryOp::Exp,  UnaryOp::Cos,
               UnaryOp::Sin,  UnaryOp::Sqrt, UnaryOp::Asin, UnaryOp::Acos,
               UnaryOp::Tanh, UnaryOp::Sech, UnaryOp::Sinh, UnaryOp::Cosh};
    g.binary = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow};
    return g;
}

CandidateSolution golden() { return CandidateSolution::from_json(load_json_file(PISR_GOLDEN_JSON)); }

int run_cli(const std::string& args, const std::string& log) {
    const std::string cmd = std::string(PISR_CLI_BIN) + " " + args + " > " + log + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------------------

Criterion criterion1_derivatives() {
    Criterion c{"1. symbolic derivatives match central finite differences"};
    const auto t0 = Clock::now();

    Grammar g = full_table_grammar(4);
    Rng rng(20250810);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    std::uniform_int_distribution<int> depth(1, 4);

    long compared = 0, violations = 0, truncation_artifacts = 0;
    for (int k = 0; k < 1000; ++k) {
        const PostfixExpr e = sample_expression(g, rng, depth(rng));
        const PostfixExpr de = differentiate(e, 0);
        for (int j = 0; j < 10; ++j) {
            const double x = point(rng);
            const auto f = [&](double t) { return eval_scalar(e, t, {}); };
            if (!std::isfinite(f(x))) continue;
            const double sym = eval_scalar(de, x, {});
            const double fd = (f(x + 1e-5) - f(x - 1e-5)) / 2e-5;
            if (!std::isfinite(sym) || !std::isfinite(fd)) continue;
            ++compared;
            const double tol = 1e-5 * (1.0 + std::abs(sym));
            if (std::abs(sym - fd) <= tol) continue;
            // The h=1e-5 stencil is truncation-dominated near poles and
            // high-frequency regions. The symbolic value must then agree with
            // a converged stencil at the same tolerance, which is a stronger
            // confirmation than the one that just failed.
            bool confirmed = false;
            for (double h : {1e-6, 1e-7}) {
                const double refined = (f(x + h) - f(x - h)) / (2.0 * h);
                if (std::isfinite(refined) && std::abs(sym - refined) <= tol) confirmed = true;
            }
            if (confirmed)
                ++truncation_artifacts;
            else
                ++violations;
        }
    }
    const double secs = seconds_since(t0);
    c.note("compared " + std::to_string(compared) + " points in " + format_real(secs) + " s; " +
           std::to_string(truncation_artifacts) +
           " h=1e-5 stencil failures were confirmed against converged stencils");
    c.require(compared > 2000, "too few finite comparison points");
    c.require(violations == 0, std::to_string(violations) + " unexplained tolerance violations");
    c.require(truncation_artifacts < compared / 500, "oracle artifacts are suspiciously frequent");
    c.require(secs < 60.0, "runtime exceeded 60 s");
    return c;
}

Criterion criterion2_simplify() {
    Criterion c{"2. simplification is sound, shrinking, and idempotent"};
    Grammar g = full_table_grammar(4);
    g.fit_const_leaves = true;
    Rng rng(8675309);
    std::uniform_real_distribution<double> point(-2.0, 2.0);
    std::uniform_int_distribution<int> depth(1, 4);

    long checked = 0, value_violations = 0, growths = 0, non_idempotent = 0;
    for (int k = 0; k < 1000; ++k) {
        const PostfixExpr e = sample_expression(g, rng, depth(rng));
        std::vector<double> consts(e.num_fit_slots());
        for (std::size_t j = 0; j < consts.size(); ++j)
            consts[j] = 0.5 + 0.75 * static_cast<double>(j % 4);
        const PostfixExpr s = simplify(e);
        if (s.size() > e.size()) ++growths;
        if (!(simplify(s) == s)) ++non_idempotent;
        for (int j = 0; j < 10; ++j) {
            const double x = point(rng);
            const double v = eval_scalar(e, x, consts);
            if (!std::isfinite(v)) continue;
            ++checked;
            const double w = eval_scalar(s, x, consts);
            if (!(std::abs(w - v) <= 1e-12 * (1.0 + std::abs(v)))) ++value_violations;
        }
    }
    c.note("checked " + std::to_string(checked) + " finite points over 1000 expressions");
    c.require(checked > 2000, "too few finite comparison points");
    c.require(value_violations == 0, std::to_string(value_violations) + " value mismatches");
    c.require(growths == 0, std::to_string(growths) + " token-count increases");
    c.require(non_idempotent == 0, std::to_string(non_idempotent) + " non-idempotent results");
    return c;
}

Criterion criterion3_golden_residuals() {
    Criterion c{"3. published solution reproduces the physics residual table"};
    const CandidateSolution gold = golden();
    PlasmaParams params;
    const Grid grid = Grid::uniform(-10.0, 10.0, 127);

    const double eq7 = loss_eq1(gold, params, grid);
    const double eq8 = loss_eq2(gold, params, grid);
    const auto boundary = loss_boundary(gold, params, grid);
    const double eq13 = loss_symmetry(gold, grid);

    c.note("eq7 = " + format_real(eq7) + " (window [0.001, 0.1])");
    c.note("eq8 = " + format_real(eq8) + ", boundary = {" + format_real(boundary[0]) + ", " +
           format_real(boundary[1]) + ", " + format_real(boundary[2]) + ", " +
           format_real(boundary[3]) + "}, eq13 = " + format_real(eq13));
    c.require(eq8 < 1e-6, "eq8 SNE >= 1e-6");
    for (int k = 0; k < 4; ++k)
        c.require(boundary[k] < 1e-6, "boundary term " + std::to_string(k) + " >= 1e-6");
    c.require(eq13 <= 1e-20, "symmetry SNE > 1e-20");
    c.require(eq7 >= 0.001 && eq7 <= 0.1, "eq7 SNE outside [0.001, 0.1]");
    return c;
}

Criterion criterion4_data_round_trip() {
    Criterion c{"4. synthetic data round trip zeroes the data terms"};
    const fs::path dir = "acc_tmp/crit4";
    fs::remove_all(dir);
    fs::create_directories(dir);

    int code = run_cli("gen-data --candidate " PISR_GOLDEN_JSON " --out " + dir.string(),
                       (dir / "gen.log").string());
    c.require(code == 0, "gen-data exited with " + std::to_string(code));
    code = run_cli("eval --candidate " PISR_GOLDEN_JSON " --dataset " +
                       (dir / "dataset.csv").string() + " --out " + dir.string(),
                   (dir / "eval.log").string());
    c.require(code == 0 || code == 2, "eval exited with " + std::to_string(code));

    const nlohmann::json loss = load_json_file((dir / "loss.json").string());
    const double eq14 = loss.at("eq14").get<double>();
    const double eq15 = loss.at("eq15").get<double>();
    c.note("eq14 = " + format_real(eq14) + ", eq15 = " + format_real(eq15));
    c.require(eq14 == 0.0, "eq14 not exactly zero");
    c.require(eq15 == 0.0, "eq15 not exactly zero");

    double physics = 0.0;
    for (const char* key : {"eq7", "eq8", "eq9", "eq10", "eq11", "eq12", "eq13"})
        physics += loss.at(key).get<double>();
    physics += eq14;
    physics += eq15;
    c.require(loss.at("total").get<double>() == physics, "total != sum of physics terms");
    return c;
}

Criterion criterion5_constant_fitting() {
    Criterion c{"5. constant fitting recovers planted coefficients"};
    const Grid grid = Grid::uniform(-10.0, 10.0, 127);

    {
        std::vector<double> s(grid.size()), target(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
            s[i] = 1.0 / std::cosh(grid.points[i]);
            target[i] = 2.0 * s[i];
        }
        ResidualFn fn = [&](const Eigen::VectorXd& cv) {
            Eigen::VectorXd r(static_cast<Eigen::Index>(grid.size()));
            for (std::size_t i = 0; i < grid.size(); ++i) r[i] = cv[0] * s[i] - target[i];
            return r;
        };
        Eigen::VectorXd init(1);
        init << 1.0;
        const auto t0 = Clock::now();
        const FitResult res = fit_constants(init, fn, FitConfig{});
        const double secs = seconds_since(t0);
        c.note("one-constant fit: c = " + format_real(res.constants[0]) + " in " + format_real(secs) + " s");
        c.require(!res.rejected, "one-constant fit rejected");
        c.require(std::abs(res.constants[0] - 2.0) <= 1e-6, "|c - 2| > 1e-6");
        c.require(secs < 1.0, "one-constant fit took >= 1 s");
    }
    {
        std::vector<double> target(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) target[i] = 3.0 / std::cosh(0.5 * grid.points[i]);
        ResidualFn fn = [&](const Eigen::VectorXd& cv) {
            Eigen::VectorXd r(static_cast<Eigen::Index>(grid.size()));
            for (std::size_t i = 0; i < grid.size(); ++i)
                r[i] = cv[0] / std::cosh(cv[1] * grid.points[i]) - target[i];
            return r;
        };
        Eigen::VectorXd init(2);
        init << 1.0, 1.0;
        const FitResult res = fit_constants(init, fn, FitConfig{});
        c.note("two-constant fit: (" + format_real(res.constants[0]) + ", " +
               format_real(res.constants[1]) + ")");
        c.require(!res.rejected, "two-constant fit rejected");
        c.require(std::abs(res.constants[0] - 3.0) <= 1e-4, "|c0 - 3| > 1e-4");
        c.require(std::abs(res.constants[1] - 0.5) <= 1e-4, "|c1 - 0.5| > 1e-4");
    }
    return c;
}

Criterion criterion6_planted_search() {
    Criterion c{"6. planted-expression recovery by brute force and annealing"};
    const auto t0 = Clock::now();

    const PlantedSechProblem problem(Grid::uniform(-10.0, 10.0, 127));
    Grammar g;
    g.max_depth = 2;
    g.unary = {UnaryOp::Sech, UnaryOp::Tanh};
    g.binary = {BinaryOp::Add, BinaryOp::Mul};

    long oracle = 1;  // c(d) = 1 + 2 c + 2 c^2 over leaves {x}
    for (int d = 1; d <= 2; ++d) oracle = 1 + 2 * oracle + 2 * oracle * oracle;

    SearchBudget budget;
    budget.max_evaluations = 1000000;
    const SearchOutcome bf = brute_force(problem, g, g, FitConfig{}, budget);
    c.require(bf.best.has_value(), "brute force found nothing");
    if (bf.best) {
        c.note("brute force: loss = " + format_real(bf.best_report.total) + ", visited " +
               std::to_string(bf.visited) + " (oracle " + std::to_string(oracle) + ")");
        c.require(bf.best_report.total < 1e-20, "brute-force loss >= 1e-20");
        c.require(bf.visited == oracle, "visit count != oracle count");
    }

    AnnealOptions opts;
    opts.budget.max_evaluations = 20000;
    std::vector<double> finals;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        Rng rng(seed);
        auto init = sample_initial_candidate(problem, g, g, rng, 32);
        if (!init) {
            finals.push_back(std::numeric_limits<double>::infinity());
            continue;
        }
        const SearchOutcome sa = simulated_annealing(problem, *init, g, g, opts, seed);
        finals.push_back(sa.best ? sa.best_report.total : std::numeric_limits<double>::infinity());
    }
    std::sort(finals.begin(), finals.end());
    const double median = 0.5 * (finals[4] + finals[5]);
    const double secs = seconds_since(t0);
    c.note("annealing median final loss over 10 seeds = " + format_real(median) + ", criterion took " +
           format_real(secs) + " s");
    c.require(median <= 1e-3, "median final loss > 1e-3");
    c.require(secs < 300.0, "criterion exceeded 5 minutes");
    return c;
}

Criterion criterion7_determinism() {
    Criterion c{"7. single-worker searches are bitwise reproducible"};
    const fs::path dir = "acc_tmp/crit7";
    fs::remove_all(dir);
    fs::create_directories(dir / "a");
    fs::create_directories(dir / "b");

    RunConfig cfg;
    cfg.driver = SearchDriver::Anneal;
    cfg.seed = 31415;
    cfg.workers = 1;
    cfg.max_depth = 2;
    cfg.unary_ops = {UnaryOp::Sech, UnaryOp::Tanh};
    cfg.binary_ops = {BinaryOp::Mul};
    cfg.fit_const_leaves = true;
    cfg.triviality_threshold = 1e-4;
    cfg.max_evaluations = 400;
    cfg.fit_max_iterations = 10;
    cfg.schedule.steps_per_temperature = 50;
    cfg.schedule.cooling_ratio = 0.8;
    cfg.schedule.min_temperature = 1e-2;
    cfg.save((dir / "run.ini").string());

    for (const char* sub : {"a", "b"}) {
        const int code = run_cli("search --config " + (dir / "run.ini").string() + " --out " +
                                     (dir / sub).string(),
                                 (dir / (std::string(sub) + ".log")).string());
        c.require(code == 0, std::string("search run ") + sub + " exited with " + std::to_string(code));
    }
    const std::string best_a = read_text_file((dir / "a" / "best.json").string());
    const std::string best_b = read_text_file((dir / "b" / "best.json").string());
    const std::string trace_a = read_text_file((dir / "a" / "trace.csv").string());
    const std::string trace_b = read_text_file((dir / "b" / "trace.csv").string());
    c.note("best.json " + std::to_string(best_a.size()) + " bytes, trace.csv " +
           std::to_string(trace_a.size()) + " bytes");
    c.require(best_a == best_b, "best.json differs between identical runs");
    c.require(trace_a == trace_b, "trace.csv differs between identical runs");
    return c;
}

Criterion criterion8_triviality() {
    Criterion c{"8. trivial-solution filter at the 1e-3 variance threshold"};
    SolitonProblem prob;
    prob.grid = Grid::uniform(-10.0, 10.0, 127);
    prob.triviality_threshold = 1e-3;

    const CandidateSolution gold = golden();
    auto with = [&](PostfixExpr u, PostfixExpr n) {
        CandidateSolution cand;
        cand.u_expr = std::move(u);
        cand.n_expr = std::move(n);
        cand.gamma0_slot = 0;
        cand.constants = {2.0};
        return cand;
    };

    const PostfixExpr const5({Token::literal(5.0)});
    const PostfixExpr const1({Token::literal(1.0)});
    const PostfixExpr tiny_x({Token::variable(0), Token::literal(1e-6), Token::binary(BinaryOp::Mul)});

    c.require(!prob.triviality_check(with(const5, gold.n_expr)), "u == const was accepted");
    c.require(!prob.triviality_check(with(gold.u_expr, const1)), "n == const was accepted");
    c.require(!prob.triviality_check(with(tiny_x, gold.n_expr)), "u = 1e-6*x was accepted");

    const auto var_of = [&](const PostfixExpr& e) {
        return variance(eval_batch(e, prob.grid, gold.constants));
    };
    c.note("published solution on this grid: Var(u) = " + format_real(var_of(gold.u_expr)) +
           ", Var(du/dx) = " + format_real(var_of(differentiate(gold.u_expr, 0))) +
           ", Var(n) = " + format_real(var_of(gold.n_expr)) +
           ", Var(dn/dx) = " + format_real(var_of(differentiate(gold.n_expr, 0))));
    c.require(prob.triviality_check(gold),
              "published solution rejected at threshold 1e-3 (its Var(u) and Var(du/dx) measure "
              "below 1e-3 on the default grid; it passes at 1e-4)");
    return c;
}

}  // namespace

int main() {
    std::vector<Criterion> results;
    results.push_back(criterion1_derivatives());
    results.push_back(criterion2_simplify());
    results.push_back(criterion3_golden_residuals());
    results.push_back(criterion4_data_round_trip());
    results.push_back(criterion5_constant_fitting());
    results.push_back(criterion6_planted_search());
    results.push_back(criterion7_determinism());
    results.push_back(criterion8_triviality());

    int failures = 0;
    for (const Criterion& c : results) {
        std::printf("[%s] %s\n", c.pass ? "PASS" : "FAIL", c.title.c_str());
        for (const std::string& n : c.notes) std::printf("       %s\n", n.c_str());
        if (!c.pass) ++failures;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
                results.size());
    return failures == 0 ? 0 : 1;
}
