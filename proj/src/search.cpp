#include "pisr/search.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "pisr/json_io.hpp"
#include "pisr/symdiff.hpp"

namespace pisr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}
}  // namespace

void AnnealSchedule::validate() const {
    if (!(initial_temperature > min_temperature) || !(min_temperature > 0))
        throw std::invalid_argument("schedule: need initial_temperature > min_temperature > 0");
    if (!(cooling_ratio > 0 && cooling_ratio < 1))
        throw std::invalid_argument("schedule: cooling_ratio must be in (0,1)");
    if (steps_per_temperature < 1)
        throw std::invalid_argument("schedule: steps_per_temperature must be >= 1");
}

void SearchBudget::validate() const {
    if (!any_set()) throw std::invalid_argument("budget: no stopping criterion set");
}

double SearchProblem::shared_slot_initial(int) const { return 1.0; }
std::optional<std::pair<double, double>> SearchProblem::shared_slot_bounds(int) const {
    return std::nullopt;
}

namespace {

class SolitonPrepared final : public SearchProblem::Prepared {
public:
    SolitonPrepared(const SolitonProblem& problem, const CandidateSolution& candidate)
        : problem_(problem), prepared_(candidate, problem.params) {}

    bool nontrivial(std::span<const double> constants) const override {
        return prepared_.triviality_check(problem_, constants);
    }
    LossReport score(std::span<const double> constants) const override {
        return prepared_.score(problem_, constants);
    }
    Eigen::VectorXd residuals(std::span<const double> constants) const override {
        return prepared_.residuals(problem_, constants);
    }

private:
    const SolitonProblem& problem_;
    PreparedCandidate prepared_;
};

}  // namespace

std::unique_ptr<SearchProblem::Prepared> SolitonSearchProblem::prepare(
    const CandidateSolution& candidate) const {
    return std::make_unique<SolitonPrepared>(problem_, candidate);
}

PlantedSechProblem::PlantedSechProblem(Grid grid, double triviality_threshold)
    : grid_(std::move(grid)), threshold_(triviality_threshold) {
    target_.resize(grid_.size());
    for (std::size_t i = 0; i < grid_.size(); ++i) target_[i] = 1.0 / std::cosh(grid_.points[i]);
}

namespace {

class PlantedPrepared final : public SearchProblem::Prepared {
public:
    PlantedPrepared(const Grid& grid, const std::vector<double>& target, double threshold,
                    const CandidateSolution& candidate)
        : grid_(grid),
          target_(target),
          threshold_(threshold),
          n_(candidate.n_expr),
          dn_(differentiate(candidate.n_expr, 0)) {}

    bool nontrivial(std::span<const double> constants) const override {
        if (!n_.references_variable(0)) return false;
        for (const PostfixExpr* e : {&n_, &dn_}) {
            const double var = variance(eval_batch(*e, grid_, constants));
            if (!(var >= threshold_)) return false;
        }
        return true;
    }

    LossReport score(std::span<const double> constants) const override {
        LossReport r;
        r.count = grid_.size();
        r.no_data = true;
        const std::vector<double> vals = eval_batch(n_, grid_, constants);
        double acc = 0.0;
        for (std::size_t i = 0; i < vals.size(); ++i) {
            const double d = vals[i] - target_[i];
            acc += d * d;
        }
        if (!std::isfinite(acc)) {
            r.rejected = true;
            r.sne.fill(std::numeric_limits<double>::quiet_NaN());
            r.total = r.sne[0];
            return r;
        }
        r.sne[0] = acc;
        r.total = acc;
        return r;
    }

    Eigen::VectorXd residuals(std::span<const double> constants) const override {
        const std::vector<double> vals = eval_batch(n_, grid_, constants);
        Eigen::VectorXd r(static_cast<Eigen::Index>(vals.size()));
        for (std::size_t i = 0; i < vals.size(); ++i) r[i] = vals[i] - target_[i];
        return r;
    }

private:
    const Grid& grid_;
    const std::vector<double>& target_;
    double threshold_;
    PostfixExpr n_, dn_;
};

}  // namespace

std::unique_ptr<SearchProblem::Prepared> PlantedSechProblem::prepare(
    const CandidateSolution& candidate) const {
    return std::make_unique<PlantedPrepared>(grid_, target_, threshold_, candidate);
}

namespace {

std::vector<Token> shift_fit_slots(std::vector<Token> tokens, int by) {
    for (Token& t : tokens)
        if (t.kind == Token::Kind::FitConst) t.index = static_cast<std::uint16_t>(t.index + by);
    return tokens;
}

// Bounds vector for a candidate: expression slots unbounded (unless the user
// config pins them), shared slots bounded by the problem.
FitConfig fit_config_for(const SearchProblem& problem, const FitConfig& base, int expr_slots) {
    FitConfig cfg = base;
    cfg.constant_bounds.resize(expr_slots + problem.shared_slots());
    for (int k = 0; k < problem.shared_slots(); ++k)
        cfg.constant_bounds[expr_slots + k] = problem.shared_slot_bounds(k);
    return cfg;
}

struct ScoredCandidate {
    CandidateSolution candidate;
    LossReport report;
    std::unique_ptr<SearchProblem::Prepared> prepared;
};

// Triviality check, base score, then an optional constant fit whose result is
// kept only when it yields a better accepted report (a fit can drag constants
// into a flat or non-finite region). Returns nullopt when the candidate is
// trivial or never produced an accepted report.
std::optional<ScoredCandidate> evaluate_candidate(const SearchProblem& problem,
                                                  CandidateSolution cand, const FitConfig& fit,
                                                  bool do_fit) {
    auto prepared = problem.prepare(cand);
    if (!prepared->nontrivial(cand.constants)) return std::nullopt;

    LossReport report = prepared->score(cand.constants);
    const int total_slots = static_cast<int>(cand.constants.size());
    if (do_fit && total_slots > 0) {
        Eigen::VectorXd init(total_slots);
        for (int j = 0; j < total_slots; ++j) init[j] = cand.constants[j];
        ResidualFn fn = [&](const Eigen::VectorXd& c) {
            return prepared->residuals({c.data(), static_cast<std::size_t>(c.size())});
        };
        const int expr_slots = total_slots - problem.shared_slots();
        const FitResult res = fit_constants(init, fn, fit_config_for(problem, fit, expr_slots));
        if (!res.rejected) {
            std::vector<double> fitted(total_slots);
            for (int j = 0; j < total_slots; ++j) fitted[j] = res.constants[j];
            LossReport refit = prepared->score(fitted);
            if (!refit.rejected && (report.rejected || refit.total < report.total)) {
                cand.constants = std::move(fitted);
                report = std::move(refit);
            }
        }
    }

    if (report.rejected) return std::nullopt;
    return ScoredCandidate{std::move(cand), std::move(report), std::move(prepared)};
}

std::size_t combined_tokens(const CandidateSolution& c) {
    return c.u_expr.size() + c.n_expr.size();
}

}  // namespace

CandidateSolution assemble_candidate(const SearchProblem& problem, const PostfixExpr* u_expr,
                                     const PostfixExpr& n_expr, Provenance provenance) {
    CandidateSolution cand;
    cand.provenance = provenance;
    int slots = 0;
    if (problem.pair_mode()) {
        if (!u_expr) throw std::invalid_argument("assemble_candidate: pair problem needs a u expression");
        cand.u_expr = *u_expr;
        slots = cand.u_expr.num_fit_slots();
        cand.n_expr = PostfixExpr(shift_fit_slots(n_expr.tokens(), slots));
        slots += n_expr.num_fit_slots();
    } else {
        cand.u_expr = PostfixExpr();  // unused zero literal
        cand.n_expr = n_expr;
        slots = n_expr.num_fit_slots();
    }
    cand.constants.assign(slots, 1.0);
    if (problem.shared_slots() > 0) {
        for (int k = 0; k < problem.shared_slots(); ++k)
            cand.constants.push_back(problem.shared_slot_initial(k));
        cand.gamma0_slot = slots;  // first shared slot is gamma0 by convention
    } else {
        cand.gamma0_slot = -1;
    }
    return cand;
}

SearchOutcome brute_force(const SearchProblem& problem, const Grammar& grammar_u,
                          const Grammar& grammar_n, const FitConfig& fit,
                          const SearchBudget& budget) {
    budget.validate();
    const auto t0 = Clock::now();
    SearchOutcome out;
    double best_total = kInf;
    std::size_t best_tokens = 0;

    std::vector<PostfixExpr> n_list;
    enumerate_expressions(grammar_n, grammar_n.max_depth, [&](const PostfixExpr& e) {
        n_list.push_back(e);
        return true;
    });

    auto stop_reached = [&] {
        if (budget.max_evaluations > 0 && out.evaluations >= budget.max_evaluations) return true;
        if (budget.max_wall_seconds > 0 && seconds_since(t0) >= budget.max_wall_seconds) return true;
        return false;
    };

    bool stopped = false;
    auto consider = [&](const PostfixExpr* u, const PostfixExpr& n) {
        ++out.visited;
        CandidateSolution cand =
            assemble_candidate(problem, u, n, Provenance::Enumerated);
        auto scored = evaluate_candidate(problem, std::move(cand), fit, true);
        if (scored) {
            ++out.scored;
            ++out.evaluations;
            const double total = scored->report.total;
            const std::size_t ntok = combined_tokens(scored->candidate);
            if (total < best_total || (total == best_total && out.best && ntok < best_tokens)) {
                best_total = total;
                best_tokens = ntok;
                out.best = std::move(scored->candidate);
                out.best_report = std::move(scored->report);
            }
            if (budget.target_loss >= 0 && best_total <= budget.target_loss) return false;
        }
        if (stop_reached()) {
            stopped = true;
            return false;
        }
        return true;
    };

    if (problem.pair_mode()) {
        enumerate_expressions(grammar_u, grammar_u.max_depth, [&](const PostfixExpr& u) {
            for (const PostfixExpr& n : n_list)
                if (!consider(&u, n)) return false;
            return true;
        });
    } else {
        for (const PostfixExpr& n : n_list)
            if (!consider(nullptr, n)) break;
    }

    out.exhausted = stopped;
    if (!out.best) out.diagnostic = "no candidate survived triviality/rejection filters";
    return out;
}

std::string trace_to_csv(const std::vector<TraceRow>& rows) {
    std::string out = "step,temperature,current_total,best_total\n";
    for (const TraceRow& r : rows) {
        out += std::to_string(r.step);
        out += ',';
        out += format_real17(r.temperature);
        out += ',';
        out += format_real17(r.current_total);
        out += ',';
        out += format_real17(r.best_total);
        out += '\n';
    }
    return out;
}

nlohmann::json AnnealState::to_json() const {
    return nlohmann::json{{"schema_version", 1},
                          {"candidate", best.to_json()},
                          {"best_report", best_report.to_json()},
                          {"current", current.to_json()},
                          {"current_total", current_total},
                          {"rng_state", rng_state},
                          {"schedule_cursor",
                           {{"temperature", temperature},
                            {"step_in_temperature", step_in_temperature},
                            {"step", step}}},
                          {"evaluations_used", evaluations},
                          {"finished", finished}};
}

AnnealState AnnealState::from_json(const nlohmann::json& j) {
    if (j.value("schema_version", 0) != 1)
        throw std::runtime_error("checkpoint: unsupported schema_version");
    AnnealState s;
    s.best = CandidateSolution::from_json(j.at("candidate"));
    s.best_report = LossReport::from_json(j.at("best_report"));
    s.current = CandidateSolution::from_json(j.at("current"));
    s.current_total = j.at("current_total").get<double>();
    s.rng_state = j.at("rng_state").get<std::string>();
    const auto& cur = j.at("schedule_cursor");
    s.temperature = cur.at("temperature").get<double>();
    s.step_in_temperature = cur.at("step_in_temperature").get<int>();
    s.step = cur.at("step").get<long>();
    s.evaluations = j.at("evaluations_used").get<long>();
    s.finished = j.at("finished").get<bool>();
    return s;
}

void save_checkpoint(const std::string& path, const AnnealState& state) {
    write_json_file(path, state.to_json());
}

AnnealState load_checkpoint(const std::string& path) {
    try {
        return AnnealState::from_json(load_json_file(path));
    } catch (const std::exception& e) {
        throw std::runtime_error("cannot resume from '" + path + "': " + e.what());
    }
}

namespace {

std::string rng_to_string(const Rng& rng) {
    std::ostringstream ss;
    ss << rng;
    return ss.str();
}

Rng rng_from_string(const std::string& s) {
    Rng rng;
    std::istringstream ss(s);
    ss >> rng;
    if (ss.fail()) throw std::runtime_error("checkpoint: bad rng_state");
    return rng;
}

// Carries inherited constant values across a perturbation: token count is
// preserved, so a fit slot keeps its value iff the token at its position was
// already a fit slot.
std::vector<double> inherit_expr_constants(const std::vector<Token>& old_tokens,
                                           std::span<const double> old_values, int old_base,
                                           const std::vector<Token>& new_tokens) {
    std::vector<double> out;
    std::vector<std::optional<double>> old_at(old_tokens.size());
    for (std::size_t i = 0; i < old_tokens.size(); ++i)
        if (old_tokens[i].kind == Token::Kind::FitConst)
            old_at[i] = old_values[old_base + old_tokens[i].index];
    for (std::size_t i = 0; i < new_tokens.size(); ++i)
        if (new_tokens[i].kind == Token::Kind::FitConst)
            out.push_back(i < old_at.size() && old_at[i] ? *old_at[i] : 1.0);
    return out;
}

struct SharedBest {
    std::mutex mutex;
    std::optional<CandidateSolution> candidate;
    LossReport report;
    double total = kInf;
};

struct AnnealDriver {
    const SearchProblem& problem;
    const Grammar& grammar_u;
    const Grammar& grammar_n;
    const AnnealOptions& options;

    AnnealState state{};
    Rng rng{};
    std::vector<TraceRow>* trace = nullptr;
    SharedBest* shared = nullptr;
    Clock::time_point t0 = Clock::now();
    bool budget_stop = false;

    void init_from(const CandidateSolution& init, std::uint64_t seed) {
        rng.seed(seed);
        auto scored = evaluate_candidate(problem, init, options.fit, true);
        if (!scored)
            throw std::invalid_argument("simulated_annealing: initial candidate is trivial or rejected");
        state.best = scored->candidate;
        state.best_report = scored->report;
        state.current = std::move(scored->candidate);
        state.current_total = scored->report.total;
        state.temperature = options.schedule.initial_temperature;
        state.step_in_temperature = 0;
        state.step = 0;
        state.evaluations = 1;
        state.finished = false;
    }

    void restore(const AnnealState& s) {
        state = s;
        rng = rng_from_string(s.rng_state);
    }

    bool stop_reached() {
        const SearchBudget& b = options.budget;
        if (b.max_evaluations > 0 && state.evaluations >= b.max_evaluations) return true;
        if (b.max_wall_seconds > 0 && seconds_since(t0) >= b.max_wall_seconds) return true;
        if (b.target_loss >= 0 && state.best_report.total <= b.target_loss) return true;
        return false;
    }

    // Builds a proposal by perturbing u or n (uniform among searched
    // expressions), rebuilding the slot layout and inheriting constants.
    CandidateSolution propose() {
        CandidateSolution prop = state.current;
        const bool pair = problem.pair_mode();
        std::uniform_int_distribution<int> side(0, 1);
        const bool move_u = pair && side(rng) == 0;

        const int old_ku = pair ? state.current.u_expr.num_fit_slots() : 0;
        // n's slots occupy [old_ku, old_ku + old_kn) in the shared vector
        const int old_kn = std::max(0, state.current.n_expr.num_fit_slots() - old_ku);
        std::vector<double> u_vals, n_vals;

        if (move_u) {
            PostfixExpr u_new = perturb(state.current.u_expr, grammar_u, rng);
            u_vals = inherit_expr_constants(state.current.u_expr.tokens(), state.current.constants,
                                            0, u_new.tokens());
            // n keeps its values; slots re-shift onto the new base
            std::vector<Token> n_raw = state.current.n_expr.tokens();
            for (Token& t : n_raw)
                if (t.kind == Token::Kind::FitConst)
                    t.index = static_cast<std::uint16_t>(t.index - old_ku);
            n_vals.assign(state.current.constants.begin() + old_ku,
                          state.current.constants.begin() + old_ku + old_kn);
            prop.u_expr = std::move(u_new);
            prop.n_expr = PostfixExpr(shift_fit_slots(std::move(n_raw),
                                                      static_cast<int>(u_vals.size())));
        } else {
            // perturb works on canonical slot numbering; strip n's base first
            std::vector<Token> n_raw = state.current.n_expr.tokens();
            for (Token& t : n_raw)
                if (t.kind == Token::Kind::FitConst)
                    t.index = static_cast<std::uint16_t>(t.index - old_ku);
            PostfixExpr n_old_local(n_raw);
            PostfixExpr n_new = perturb(n_old_local, grammar_n, rng);
            n_vals = inherit_expr_constants(n_old_local.tokens(),
                                            std::span<const double>(state.current.constants)
                                                .subspan(old_ku),
                                            0, n_new.tokens());
            u_vals.assign(state.current.constants.begin(),
                          state.current.constants.begin() + old_ku);
            prop.n_expr = PostfixExpr(shift_fit_slots(n_new.tokens(), old_ku));
        }

        prop.constants.clear();
        prop.constants.insert(prop.constants.end(), u_vals.begin(), u_vals.end());
        prop.constants.insert(prop.constants.end(), n_vals.begin(), n_vals.end());
        if (problem.shared_slots() > 0) {
            prop.gamma0_slot = static_cast<int>(prop.constants.size());
            for (int k = 0; k < problem.shared_slots(); ++k) {
                const int old_shared =
                    static_cast<int>(state.current.constants.size()) - problem.shared_slots() + k;
                prop.constants.push_back(state.current.constants[old_shared]);
            }
        }
        return prop;
    }

    void run() {
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        while (state.temperature >= options.schedule.min_temperature && !budget_stop) {
            for (; state.step_in_temperature < options.schedule.steps_per_temperature;
                 ++state.step_in_temperature) {
                if (stop_reached()) {
                    budget_stop = true;
                    break;
                }
                ++state.step;
                ++state.evaluations;

                CandidateSolution prop = propose();
                double prop_total = kInf;
                auto prepared = problem.prepare(prop);
                std::optional<LossReport> prop_report;
                if (prepared->nontrivial(prop.constants)) {
                    LossReport r = prepared->score(prop.constants);
                    if (!r.rejected) {
                        prop_total = r.total;
                        prop_report = std::move(r);
                        // gated refit: only spend LM iterations near the best
                        if (!prop.constants.empty() &&
                            prop_total <= options.fit_gate_factor * state.best_report.total) {
                            Eigen::VectorXd init(static_cast<Eigen::Index>(prop.constants.size()));
                            for (std::size_t j = 0; j < prop.constants.size(); ++j)
                                init[j] = prop.constants[j];
                            ResidualFn fn = [&](const Eigen::VectorXd& c) {
                                return prepared->residuals({c.data(), static_cast<std::size_t>(c.size())});
                            };
                            const int expr_slots =
                                static_cast<int>(prop.constants.size()) - problem.shared_slots();
                            const FitResult res = fit_constants(
                                init, fn, fit_config_for(problem, options.fit, expr_slots));
                            if (!res.rejected && res.sse < prop_total) {
                                for (std::size_t j = 0; j < prop.constants.size(); ++j)
                                    prop.constants[j] = res.constants[j];
                                LossReport refit = prepared->score(prop.constants);
                                if (!refit.rejected) {
                                    prop_total = refit.total;
                                    prop_report = std::move(refit);
                                }
                            }
                        }
                    }
                }

                const double delta = prop_total - state.current_total;
                const bool accept =
                    std::isfinite(prop_total) &&
                    (delta <= 0.0 || uni(rng) < std::exp(-delta / state.temperature));
                if (accept) {
                    state.current = std::move(prop);
                    state.current_total = prop_total;
                    if (prop_total < state.best_report.total) {
                        state.best = state.current;
                        state.best_report = std::move(*prop_report);
                    }
                }
                if (trace)
                    trace->push_back(
                        {state.step, state.temperature, state.current_total, state.best_report.total});
            }
            if (state.step_in_temperature >= options.schedule.steps_per_temperature) {
                state.step_in_temperature = 0;
                state.temperature *= options.schedule.cooling_ratio;
                exchange_with_shared();
                if (!options.checkpoint_path.empty()) checkpoint();
            }
        }
        state.finished = !budget_stop;
        if (!options.checkpoint_path.empty()) checkpoint();
    }

    void exchange_with_shared() {
        if (!shared) return;
        std::lock_guard<std::mutex> lock(shared->mutex);
        if (state.best_report.total < shared->total) {
            shared->total = state.best_report.total;
            shared->candidate = state.best;
            shared->report = state.best_report;
        } else if (shared->candidate && shared->total < state.current_total) {
            state.current = *shared->candidate;
            state.current_total = shared->total;
        }
    }

    void checkpoint() {
        state.rng_state = rng_to_string(rng);
        save_checkpoint(options.checkpoint_path, state);
    }

    SearchOutcome outcome() const {
        SearchOutcome out;
        out.best = state.best;
        out.best_report = state.best_report;
        out.visited = state.step;
        out.scored = state.step;
        out.evaluations = state.evaluations;
        out.exhausted = budget_stop;
        return out;
    }
};

}  // namespace

SearchOutcome simulated_annealing(const SearchProblem& problem, const CandidateSolution& init,
                                  const Grammar& grammar_u, const Grammar& grammar_n,
                                  const AnnealOptions& options, std::uint64_t seed,
                                  std::vector<TraceRow>* trace) {
    options.schedule.validate();
    options.budget.validate();
    AnnealDriver driver{problem, grammar_u, grammar_n, options};
    driver.trace = trace;
    driver.init_from(init, seed);
    driver.run();
    return driver.outcome();
}

SearchOutcome resume_annealing(const SearchProblem& problem, const AnnealState& state,
                               const Grammar& grammar_u, const Grammar& grammar_n,
                               const AnnealOptions& options, std::vector<TraceRow>* trace) {
    options.schedule.validate();
    options.budget.validate();
    AnnealDriver driver{problem, grammar_u, grammar_n, options};
    driver.trace = trace;
    if (state.finished) {
        driver.state = state;
        driver.budget_stop = false;
        return driver.outcome();
    }
    driver.restore(state);
    driver.run();
    return driver.outcome();
}

SearchOutcome parallel_annealing(const SearchProblem& problem, const CandidateSolution& init,
                                 const Grammar& grammar_u, const Grammar& grammar_n,
                                 const AnnealOptions& options, std::uint64_t seed, int workers,
                                 std::vector<TraceRow>* trace) {
    if (workers <= 1) return simulated_annealing(problem, init, grammar_u, grammar_n, options, seed, trace);

    SharedBest shared;
    std::vector<std::thread> pool;
    std::vector<SearchOutcome> outcomes(workers);
    std::vector<std::string> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                AnnealOptions opts = options;
                if (!opts.checkpoint_path.empty() && w > 0)
                    opts.checkpoint_path.clear();  // only worker 0 checkpoints
                AnnealDriver driver{problem, grammar_u, grammar_n, opts};
                driver.shared = &shared;
                driver.init_from(init, seed + static_cast<std::uint64_t>(w));
                driver.run();
                outcomes[w] = driver.outcome();
            } catch (const std::exception& e) {
                errors[w] = e.what();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const std::string& e : errors)
        if (!e.empty()) throw std::runtime_error("worker failed: " + e);

    SearchOutcome out = outcomes[0];
    for (int w = 1; w < workers; ++w) {
        out.evaluations += outcomes[w].evaluations;
        out.visited += outcomes[w].visited;
        out.scored += outcomes[w].scored;
        if (outcomes[w].best &&
            (!out.best || outcomes[w].best_report.total < out.best_report.total)) {
            out.best = outcomes[w].best;
            out.best_report = outcomes[w].best_report;
        }
    }
    return out;
}

std::optional<CandidateSolution> sample_initial_candidate(const SearchProblem& problem,
                                                          const Grammar& grammar_u,
                                                          const Grammar& grammar_n, Rng& rng,
                                                          int tries) {
    std::optional<CandidateSolution> best;
    double best_total = kInf;
    std::uniform_int_distribution<int> du(0, grammar_u.max_depth);
    std::uniform_int_distribution<int> dn(0, grammar_n.max_depth);
    for (int t = 0; t < tries; ++t) {
        PostfixExpr n = sample_expression(grammar_n, rng, dn(rng));
        std::optional<PostfixExpr> u;
        if (problem.pair_mode()) u = sample_expression(grammar_u, rng, du(rng));
        CandidateSolution cand =
            assemble_candidate(problem, u ? &*u : nullptr, n, Provenance::Sampled);
        auto prepared = problem.prepare(cand);
        if (!prepared->nontrivial(cand.constants)) continue;
        LossReport r = prepared->score(cand.constants);
        if (r.rejected || !(r.total < best_total)) continue;
        best_total = r.total;
        best = std::move(cand);
    }
    return best;
}

}  // namespace pisr
