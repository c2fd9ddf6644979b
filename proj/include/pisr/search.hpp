#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pisr/constfit.hpp"
#include "pisr/grammar.hpp"
#include "pisr/soliton.hpp"

namespace pisr {

// Geometric cooling schedule.
struct AnnealSchedule {
    double initial_temperature = 1.0;
    double cooling_ratio = 0.95;
    int steps_per_temperature = 200;
    double min_temperature = 1e-6;

    void validate() const;
};

// Stopping criteria; non-positive values disable a criterion (target_loss is
// disabled when negative so an exact-zero target stays expressible).
struct SearchBudget {
    long max_evaluations = 100000;
    double max_wall_seconds = 0.0;
    double target_loss = -1.0;

    bool any_set() const { return max_evaluations > 0 || max_wall_seconds > 0 || target_loss >= 0; }
    void validate() const;
};

// A search problem scores (u, n) candidates. prepare() compiles whatever the
// problem needs (derivative programs) once per candidate so that constant
// fitting and rescoring are cheap.
class SearchProblem {
public:
    struct Prepared {
        virtual ~Prepared() = default;
        virtual bool nontrivial(std::span<const double> constants) const = 0;
        virtual LossReport score(std::span<const double> constants) const = 0;
        virtual Eigen::VectorXd residuals(std::span<const double> constants) const = 0;
    };

    virtual ~SearchProblem() = default;
    // false: single-function problem, only n_expr is searched.
    virtual bool pair_mode() const = 0;
    // Constant slots appended after the expressions' own slots (gamma0).
    virtual int shared_slots() const = 0;
    virtual double shared_slot_initial(int k) const;
    virtual std::optional<std::pair<double, double>> shared_slot_bounds(int k) const;
    virtual std::unique_ptr<Prepared> prepare(const CandidateSolution& candidate) const = 0;
};

// The bright-soliton benchmark as a search problem; owns the gamma0 slot.
class SolitonSearchProblem final : public SearchProblem {
public:
    explicit SolitonSearchProblem(SolitonProblem problem) : problem_(std::move(problem)) {}

    bool pair_mode() const override { return true; }
    int shared_slots() const override { return 1; }
    double shared_slot_initial(int) const override { return gamma0_initial; }
    std::optional<std::pair<double, double>> shared_slot_bounds(int) const override {
        return std::make_pair(gamma0_min, gamma0_max);
    }
    std::unique_ptr<Prepared> prepare(const CandidateSolution& candidate) const override;

    const SolitonProblem& problem() const { return problem_; }

    double gamma0_initial = 2.0;
    double gamma0_min = 1.0;
    double gamma0_max = 100.0;

private:
    SolitonProblem problem_;
};

// Self-test problem: recover n(x) from the single equation n(x) - sech(x) = 0.
class PlantedSechProblem final : public SearchProblem {
public:
    explicit PlantedSechProblem(Grid grid, double triviality_threshold = 1e-3);

    bool pair_mode() const override { return false; }
    int shared_slots() const override { return 0; }
    std::unique_ptr<Prepared> prepare(const CandidateSolution& candidate) const override;

    const Grid& grid() const { return grid_; }

private:
    Grid grid_;
    std::vector<double> target_;
    double threshold_;
};

struct SearchOutcome {
    std::optional<CandidateSolution> best;
    LossReport best_report;
    long visited = 0;      // candidates enumerated / proposals made
    long scored = 0;       // survived triviality and were scored
    long evaluations = 0;  // work units counted against the budget
    bool exhausted = false;
    std::string diagnostic;
};

// Builds a candidate from enumerated/sampled expressions: u keeps its slots,
// n's slots are shifted up, shared slots are appended with their initial
// values. In single-function mode u is the zero literal.
CandidateSolution assemble_candidate(const SearchProblem& problem, const PostfixExpr* u_expr,
                                     const PostfixExpr& n_expr, Provenance provenance);

// Exhaustive scan of the (u, n) cartesian product in deterministic layered
// enumeration order. Ties on total loss break toward fewer combined tokens,
// then earlier enumeration order.
SearchOutcome brute_force(const SearchProblem& problem, const Grammar& grammar_u,
                          const Grammar& grammar_n, const FitConfig& fit,
                          const SearchBudget& budget);

struct TraceRow {
    long step;
    double temperature;
    double current_total;
    double best_total;
};

std::string trace_to_csv(const std::vector<TraceRow>& rows);

// Serializable annealer state; resuming from it continues a single-worker run
// bitwise.
struct AnnealState {
    CandidateSolution best;
    LossReport best_report;
    CandidateSolution current;
    double current_total = 0.0;
    std::string rng_state;
    double temperature = 0.0;
    int step_in_temperature = 0;
    long step = 0;
    long evaluations = 0;
    bool finished = false;

    nlohmann::json to_json() const;
    static AnnealState from_json(const nlohmann::json& j);
};

void save_checkpoint(const std::string& path, const AnnealState& state);
AnnealState load_checkpoint(const std::string& path);  // throws on missing/corrupt file

struct AnnealOptions {
    AnnealSchedule schedule;
    FitConfig fit;
    SearchBudget budget;
    double fit_gate_factor = 10.0;  // refit only when within this factor of the best
    std::string checkpoint_path;    // saved at temperature boundaries when set
};

// Metropolis annealing over depth-preserving perturbations of u or n (chosen
// uniformly). Non-finite or trivial proposals are never accepted. `init` must
// be non-trivial. Appends one trace row per proposal when trace is given.
SearchOutcome simulated_annealing(const SearchProblem& problem, const CandidateSolution& init,
                                  const Grammar& grammar_u, const Grammar& grammar_n,
                                  const AnnealOptions& options, std::uint64_t seed,
                                  std::vector<TraceRow>* trace = nullptr);

// Continues a checkpointed run to completion.
SearchOutcome resume_annealing(const SearchProblem& problem, const AnnealState& state,
                               const Grammar& grammar_u, const Grammar& grammar_n,
                               const AnnealOptions& options, std::vector<TraceRow>* trace = nullptr);

// Independent chains with private RNGs that exchange the shared best at
// temperature boundaries. Deterministic only with workers == 1 (where it
// matches simulated_annealing exactly).
SearchOutcome parallel_annealing(const SearchProblem& problem, const CandidateSolution& init,
                                 const Grammar& grammar_u, const Grammar& grammar_n,
                                 const AnnealOptions& options, std::uint64_t seed, int workers,
                                 std::vector<TraceRow>* trace = nullptr);

// Best non-trivial candidate out of `tries` random samples with depths drawn
// uniformly in [0, max_depth]; nullopt when every sample was trivial or
// rejected.
std::optional<CandidateSolution> sample_initial_candidate(const SearchProblem& problem,
                                                          const Grammar& grammar_u,
                                                          const Grammar& grammar_n, Rng& rng,
                                                          int tries);

}  // namespace pisr
