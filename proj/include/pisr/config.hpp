#pragma once

#include <string>

#include "pisr/constfit.hpp"
#include "pisr/grammar.hpp"
#include "pisr/search.hpp"
#include "pisr/soliton.hpp"

namespace pisr {

enum class ProblemKind { Soliton, PlantedSech };
enum class SearchDriver { Anneal, BruteForce };

// Flat sectioned key=value run configuration. Defaults reproduce the bundled
// benchmark setup so `search` runs with no flags at all.
struct RunConfig {
    // [problem]
    ProblemKind kind = ProblemKind::Soliton;
    PlasmaParams params;
    double triviality_threshold = 1e-3;
    double data_weight = 10.0;

    // [grid]
    double x_min = -10.0;
    double x_max = 10.0;
    int n_points = 127;

    // [grammar]
    int max_depth = 3;
    std::vector<UnaryOp> unary_ops;    // defaults to the benchmark whitelist
    std::vector<BinaryOp> binary_ops;  // defaults to all five
    bool fit_const_leaves = true;
    bool exact_depth = false;

    // [search]
    SearchDriver driver = SearchDriver::Anneal;
    std::uint64_t seed = 42;
    int workers = 1;
    long max_evaluations = 100000;
    double max_wall_seconds = 0.0;
    double target_loss = -1.0;
    AnnealSchedule schedule;
    int init_samples = 2000;
    double fit_gate_factor = 10.0;

    // [fit]
    FitConfig::Method fit_method = FitConfig::Method::LevenbergMarquardt;
    int fit_max_iterations = 50;
    double fit_gradient_tolerance = 1e-10;
    double fit_step_tolerance = 1e-12;
    double gamma0_initial = 2.0;
    double gamma0_min = 1.0;
    double gamma0_max = 100.0;

    // [paths]
    std::string dataset_path;
    std::string output_dir = "out";
    std::string checkpoint_path;
    std::string candidate_path;

    RunConfig();

    static RunConfig load(const std::string& path);       // throws on malformed input
    static RunConfig parse(const std::string& text);
    std::string serialize() const;                        // reload of this text is identical
    void save(const std::string& path) const;

    // PISR_<SECTION>_<KEY> environment variables override file values.
    void apply_env_overrides();
    void validate() const;

    Grid make_grid() const;
    Grammar make_grammar() const;
    FitConfig make_fit_config() const;
    SearchBudget make_budget() const;
};

}  // namespace pisr
