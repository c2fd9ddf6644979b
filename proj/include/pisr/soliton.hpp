#pragma once

#include <array>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <json.hpp>

#include "pisr/eval.hpp"
#include "pisr/expr.hpp"

namespace pisr {

// Physical constants of the magnetized-plasma bright-soliton model. Defaults
// are the benchmark values.
struct PlasmaParams {
    double rho_i = 1.0 / 1836.0;    // electron/ion mass ratio
    double alpha = 0.4;             // cyclotron/wave frequency ratio
    double v_te = 0.05;             // electron thermal speed (units of c)
    double v_ti = 0.001;            // ion thermal speed (units of c)
    double n0 = 1.0;                // reference density
    double omega_sq_coeff = 0.64;   // omega^2 = coeff * n(x)

    void validate() const;
};

// Reference profiles sampled on a grid: density = n/n0 - 1 and the a(x)
// amplitude, as stored in the dataset CSV (header: x,density,a).
struct Dataset {
    Grid grid;
    std::vector<double> density;
    std::vector<double> a_profile;

    std::size_t count() const { return grid.size(); }

    static Dataset load_csv(const std::string& path);
    std::string to_csv() const;
};

// Standalone expression wire form: {"postfix": [token strings], "constants": [...]}.
nlohmann::json expr_to_json(const PostfixExpr& expr, std::span<const double> constants);
std::pair<PostfixExpr, std::vector<double>> expr_from_json(const nlohmann::json& j);

enum class Provenance { Sampled, Enumerated, Golden };

const char* name_of(Provenance p);
std::optional<Provenance> parse_provenance(const std::string& s);

// A paired (u, n) candidate over one shared constant vector. gamma0_slot
// addresses the Lorentz-factor constant inside that vector.
struct CandidateSolution {
    PostfixExpr u_expr;
    PostfixExpr n_expr;
    std::vector<double> constants;
    int gamma0_slot = -1;  // -1: candidate has no gamma0 (single-function problems)
    Provenance provenance = Provenance::Sampled;

    double gamma0() const { return gamma0_slot >= 0 ? constants[gamma0_slot] : 1.0; }

    nlohmann::json to_json(bool with_infix = false) const;
    static CandidateSolution from_json(const nlohmann::json& j);
};

// Squared-norm errors of the nine loss terms, in equation order
// (field equation, pressure balance, four boundary terms, symmetry, two data
// misfits). A rejected report carries NaN entries when a term went
// non-finite; a trivial report keeps its finite values.
struct LossReport {
    static constexpr int kNumTerms = 9;
    static const std::array<const char*, kNumTerms> kKeys;          // "eq7".."eq15"
    static const std::array<const char*, kNumTerms> kDescriptions;

    std::array<double, kNumTerms> sne{};
    double total = 0.0;
    std::size_t count = 0;  // divisor for the MSE column
    bool rejected = false;
    bool trivial = false;
    bool no_data = false;

    double mse(int k) const { return sne[k] / static_cast<double>(count); }
    bool accepted() const { return !rejected; }

    nlohmann::json to_json() const;
    static LossReport from_json(const nlohmann::json& j);
    std::string table() const;  // printable nine-row summary
};

// g(u) = sinh(u) - alpha*tanh(u), built by token concatenation + simplify.
PostfixExpr compose_g(const PostfixExpr& u_expr, double alpha);
// a(u) = sinh(u) - alpha*gamma0*tanh(u) with gamma0 as a fit-constant slot.
PostfixExpr compose_a(const PostfixExpr& u_expr, double alpha, int gamma0_slot);

// Benchmark problem: parameters + grid + optional data + rejection threshold.
struct SolitonProblem {
    PlasmaParams params;
    Grid grid;
    std::optional<Dataset> dataset;
    double triviality_threshold = 1e-3;
    double data_weight = 10.0;  // applied inside the square of the a(x) misfit

    // Derivative programs are rebuilt per call; the search layer caches them
    // through PreparedCandidate instead.
    LossReport total_loss(const CandidateSolution& candidate) const;
    bool triviality_check(const CandidateSolution& candidate) const;
};

// Individual loss terms (SNE per equation). All are pure; non-finite values
// surface as NaN results rather than errors.
double loss_eq1(const CandidateSolution& c, const PlasmaParams& p, const Grid& grid);
double loss_eq2(const CandidateSolution& c, const PlasmaParams& p, const Grid& grid);
std::array<double, 4> loss_boundary(const CandidateSolution& c, const PlasmaParams& p,
                                    const Grid& grid);
double loss_symmetry(const CandidateSolution& c, const Grid& grid);  // throws on asymmetric grid
std::pair<double, double> loss_data(const CandidateSolution& c, const PlasmaParams& p,
                                    const Dataset& data, double weight = 10.0);

// Token programs compiled once per candidate so repeated scoring (constant
// fitting, annealing) skips re-differentiation.
class PreparedCandidate {
public:
    PreparedCandidate(const CandidateSolution& candidate, const PlasmaParams& params);

    // Loss report at the given constants (overriding the candidate's own).
    LossReport score(const SolitonProblem& problem, std::span<const double> constants) const;
    // Residual vector for constant fitting: equation residuals at every grid
    // point, four boundary terms, mirrored-symmetry gaps, and weighted data
    // misfits. The report's SNEs are the per-block squared norms.
    Eigen::VectorXd residuals(const SolitonProblem& problem,
                              std::span<const double> constants) const;
    bool triviality_check(const SolitonProblem& problem, std::span<const double> constants) const;

    const CandidateSolution& candidate() const { return candidate_; }

private:
    CandidateSolution candidate_;
    PostfixExpr g_, d2g_, a_, du_, dn_;
};

}  // namespace pisr
