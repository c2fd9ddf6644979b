// pisr: physics-informed symbolic regression engine for the bright-soliton
// benchmark. Subcommands: search, eval, gen-data, plot-data, resume.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>

#include <CLI11.hpp>

#include "pisr/config.hpp"
#include "pisr/json_io.hpp"
#include "pisr/symdiff.hpp"

namespace fs = std::filesystem;
using namespace pisr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitRejected = 2;

struct CommonFlags {
    std::string config_path;
    std::string dataset_path;
    std::string out_dir;
    std::string candidate_path;
    std::string checkpoint_path;
    long seed = -1;
    int workers = 0;

    void attach(CLI::App* app, bool with_candidate = false) {
        app->add_option("--config", config_path, "run configuration file");
        app->add_option("--dataset", dataset_path, "dataset CSV (x,density,a)");
        app->add_option("--out", out_dir, "output directory");
        app->add_option("--seed", seed, "RNG seed override");
        app->add_option("--workers", workers, "annealing workers (1 = deterministic)");
        app->add_option("--checkpoint", checkpoint_path, "checkpoint file");
        if (with_candidate) app->add_option("--candidate", candidate_path, "candidate JSON file");
    }

    RunConfig resolve() const {
        RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
        cfg.apply_env_overrides();
        if (!dataset_path.empty()) cfg.dataset_path = dataset_path;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (!candidate_path.empty()) cfg.candidate_path = candidate_path;
        if (!checkpoint_path.empty()) cfg.checkpoint_path = checkpoint_path;
        if (seed >= 0) cfg.seed = static_cast<std::uint64_t>(seed);
        if (workers > 0) cfg.workers = workers;
        cfg.validate();
        return cfg;
    }
};

std::optional<Dataset> load_dataset_if_any(const RunConfig& cfg) {
    if (cfg.dataset_path.empty()) return std::nullopt;
    return Dataset::load_csv(cfg.dataset_path);
}

SolitonProblem make_soliton_problem(const RunConfig& cfg) {
    SolitonProblem prob;
    prob.params = cfg.params;
    prob.grid = cfg.make_grid();
    prob.dataset = load_dataset_if_any(cfg);
    prob.triviality_threshold = cfg.triviality_threshold;
    prob.data_weight = cfg.data_weight;
    return prob;
}

std::unique_ptr<SearchProblem> make_search_problem(const RunConfig& cfg) {
    if (cfg.kind == ProblemKind::PlantedSech)
        return std::make_unique<PlantedSechProblem>(cfg.make_grid(), cfg.triviality_threshold);
    auto p = std::make_unique<SolitonSearchProblem>(make_soliton_problem(cfg));
    p->gamma0_initial = cfg.gamma0_initial;
    p->gamma0_min = cfg.gamma0_min;
    p->gamma0_max = cfg.gamma0_max;
    return p;
}

CandidateSolution load_candidate(const std::string& path) {
    if (path.empty()) throw std::runtime_error("no candidate file given (--candidate or [paths] candidate)");
    return CandidateSolution::from_json(load_json_file(path));
}

// The eval/gen-data commands accept candidates without a gamma0 slot by
// appending one pinned to 1 (a(x) then coincides with g(x)).
CandidateSolution ensure_gamma0(CandidateSolution c) {
    if (c.gamma0_slot < 0) {
        c.gamma0_slot = static_cast<int>(c.constants.size());
        c.constants.push_back(1.0);
    }
    return c;
}

void write_outputs(const RunConfig& cfg, const SearchOutcome& outcome,
                   const std::vector<TraceRow>& trace) {
    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    cfg.save((out / "config.effective.ini").string());
    write_text_file((out / "trace.csv").string(), trace_to_csv(trace));
    if (outcome.best) {
        const nlohmann::json jc = outcome.best->to_json(true);
        write_json_file((out / "best.json").string(), jc);
        CandidateSolution::from_json(load_json_file((out / "best.json").string()));  // self-check
        write_json_file((out / "loss.json").string(), outcome.best_report.to_json());
        LossReport::from_json(load_json_file((out / "loss.json").string()));  // self-check
    }
}

int cmd_search(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    const auto problem = make_search_problem(cfg);
    const Grammar grammar = cfg.make_grammar();
    const SearchBudget budget = cfg.make_budget();
    const FitConfig fit = cfg.make_fit_config();

    SearchOutcome outcome;
    std::vector<TraceRow> trace;
    if (cfg.driver == SearchDriver::BruteForce) {
        outcome = brute_force(*problem, grammar, grammar, fit, budget);
        trace.push_back({outcome.visited, 0.0,
                         outcome.best ? outcome.best_report.total : 0.0,
                         outcome.best ? outcome.best_report.total : 0.0});
    } else {
        Rng rng(cfg.seed);
        auto init = sample_initial_candidate(*problem, grammar, grammar, rng, cfg.init_samples);
        if (!init) {
            std::cerr << "search: no viable initial candidate after " << cfg.init_samples
                      << " samples\n";
            return kExitRejected;
        }
        AnnealOptions opts{cfg.schedule, fit, budget, cfg.fit_gate_factor, cfg.checkpoint_path};
        if (opts.checkpoint_path.empty())
            opts.checkpoint_path = (fs::path(cfg.output_dir) / "checkpoint.json").string();
        fs::create_directories(cfg.output_dir);
        outcome = parallel_annealing(*problem, *init, grammar, grammar, opts, cfg.seed,
                                     cfg.workers, &trace);
    }

    write_outputs(cfg, outcome, trace);
    if (!outcome.best) {
        std::cerr << "search: " << (outcome.diagnostic.empty() ? "no accepted candidate" : outcome.diagnostic)
                  << "\n";
        return kExitRejected;
    }
    std::cout << "best total loss: " << format_real(outcome.best_report.total) << "\n"
              << "u(x) = " << to_infix(outcome.best->u_expr, outcome.best->constants) << "\n"
              << "n(x) = " << to_infix(outcome.best->n_expr, outcome.best->constants) << "\n"
              << "evaluations: " << outcome.evaluations << (outcome.exhausted ? " (budget exhausted)" : "")
              << "\n";
    return kExitOk;
}

int cmd_resume(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    if (cfg.kind != ProblemKind::Soliton && cfg.kind != ProblemKind::PlantedSech) return kExitError;
    std::string ckpt = cfg.checkpoint_path;
    if (ckpt.empty()) ckpt = (fs::path(cfg.output_dir) / "checkpoint.json").string();
    const AnnealState state = load_checkpoint(ckpt);

    const auto problem = make_search_problem(cfg);
    const Grammar grammar = cfg.make_grammar();
    AnnealOptions opts{cfg.schedule, cfg.make_fit_config(), cfg.make_budget(), cfg.fit_gate_factor, ckpt};
    std::vector<TraceRow> trace;
    const SearchOutcome outcome = resume_annealing(*problem, state, grammar, grammar, opts, &trace);

    write_outputs(cfg, outcome, trace);
    if (!outcome.best) return kExitRejected;
    std::cout << "resumed; best total loss: " << format_real(outcome.best_report.total) << "\n";
    return kExitOk;
}

int cmd_eval(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    const CandidateSolution cand = ensure_gamma0(load_candidate(cfg.candidate_path));
    const SolitonProblem problem = make_soliton_problem(cfg);
    const LossReport report = problem.total_loss(cand);

    std::cout << report.table();
    fs::create_directories(cfg.output_dir);
    const fs::path out(cfg.output_dir);
    write_json_file((out / "loss.json").string(), report.to_json());
    LossReport::from_json(load_json_file((out / "loss.json").string()));  // self-check
    return report.accepted() ? kExitOk : kExitRejected;
}

int cmd_gen_data(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    const CandidateSolution cand = ensure_gamma0(load_candidate(cfg.candidate_path));
    const Grid grid = cfg.make_grid();

    const std::vector<double> n = eval_batch(cand.n_expr, grid, cand.constants);
    const PostfixExpr a_expr = compose_a(cand.u_expr, cfg.params.alpha, cand.gamma0_slot);
    const std::vector<double> a = eval_batch(a_expr, grid, cand.constants);

    Dataset data;
    data.grid = grid;
    data.density.resize(grid.size());
    data.a_profile = a;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        data.density[i] = n[i] / cfg.params.n0 - 1.0;
        if (!std::isfinite(data.density[i]) || !std::isfinite(a[i])) {
            std::cerr << "gen-data: non-finite value at x = " << format_real(grid.points[i]) << "\n";
            return kExitError;
        }
    }

    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / "dataset.csv").string();
    write_text_file(path, data.to_csv());
    Dataset::load_csv(path);  // self-check
    std::cout << "wrote " << grid.size() << " rows to " << path << "\n";
    return kExitOk;
}

int cmd_plot_data(const CommonFlags& flags) {
    const RunConfig cfg = flags.resolve();
    const CandidateSolution cand = ensure_gamma0(load_candidate(cfg.candidate_path));
    const Grid grid = cfg.make_grid();
    const auto dataset = load_dataset_if_any(cfg);
    if (!dataset) {
        std::cerr << "plot-data: a dataset is required (--dataset)\n";
        return kExitError;
    }
    if (dataset->count() != grid.size()) {
        std::cerr << "plot-data: dataset has " << dataset->count() << " rows but the grid has "
                  << grid.size() << " points\n";
        return kExitError;
    }

    const std::vector<double> u = eval_batch(cand.u_expr, grid, cand.constants);
    const std::vector<double> n = eval_batch(cand.n_expr, grid, cand.constants);
    const PostfixExpr a_expr = compose_a(cand.u_expr, cfg.params.alpha, cand.gamma0_slot);
    const std::vector<double> a = eval_batch(a_expr, grid, cand.constants);

    std::string csv = "x,u,n,a,density_model,density_data,a_data\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
        csv += format_real17(grid.points[i]);
        csv += ',';
        csv += format_real17(u[i]);
        csv += ',';
        csv += format_real17(n[i]);
        csv += ',';
        csv += format_real17(a[i]);
        csv += ',';
        csv += format_real17(n[i] / cfg.params.n0 - 1.0);
        csv += ',';
        csv += format_real17(dataset->density[i]);
        csv += ',';
        csv += format_real17(dataset->a_profile[i]);
        csv += '\n';
    }
    fs::create_directories(cfg.output_dir);
    const std::string path = (fs::path(cfg.output_dir) / "plot.csv").string();
    write_text_file(path, csv);
    std::cout << "wrote " << grid.size() << " rows to " << path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physics-informed symbolic regression for bright-soliton profiles"};
    app.require_subcommand(1);

    CommonFlags search_flags, resume_flags, eval_flags, gen_flags, plot_flags;
    auto* search = app.add_subcommand("search", "run expression search");
    search_flags.attach(search);
    auto* resume = app.add_subcommand("resume", "continue a checkpointed annealing run");
    resume_flags.attach(resume);
    auto* eval = app.add_subcommand("eval", "score a candidate and print the loss table");
    eval_flags.attach(eval, true);
    auto* gen = app.add_subcommand("gen-data", "write a synthetic dataset CSV from a candidate");
    gen_flags.attach(gen, true);
    auto* plot = app.add_subcommand("plot-data", "write model-vs-data curves as CSV");
    plot_flags.attach(plot, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (search->parsed()) return cmd_search(search_flags);
        if (resume->parsed()) return cmd_resume(resume_flags);
        if (eval->parsed()) return cmd_eval(eval_flags);
        if (gen->parsed()) return cmd_gen_data(gen_flags);
        if (plot->parsed()) return cmd_plot_data(plot_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
