#include "pisr/soliton.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pisr/symdiff.hpp"

namespace pisr {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void PlasmaParams::validate() const {
    if (!(rho_i > 0)) throw std::invalid_argument("params: rho_i must be > 0");
    if (!(n0 > 0)) throw std::invalid_argument("params: n0 must be > 0");
    if (omega_sq_coeff < 0) throw std::invalid_argument("params: omega_sq_coeff must be >= 0");
}

Dataset Dataset::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("dataset is empty: " + path);
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "x,density,a")
        throw std::runtime_error("dataset header must be 'x,density,a', got '" + line + "'");

    std::vector<double> xs, density, a;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string field;
        double row[3];
        for (int k = 0; k < 3; ++k) {
            if (!std::getline(ss, field, ','))
                throw std::runtime_error("dataset line " + std::to_string(lineno) + ": expected 3 fields");
            char* end = nullptr;
            row[k] = std::strtod(field.c_str(), &end);
            if (end == field.c_str() || !std::isfinite(row[k]))
                throw std::runtime_error("dataset line " + std::to_string(lineno) + ": bad value '" + field + "'");
        }
        xs.push_back(row[0]);
        density.push_back(row[1]);
        a.push_back(row[2]);
    }
    if (xs.empty()) throw std::runtime_error("dataset has no rows: " + path);
    Dataset d;
    d.grid = Grid::from_points(std::move(xs));  // enforces strictly increasing x
    d.density = std::move(density);
    d.a_profile = std::move(a);
    return d;
}

std::string Dataset::to_csv() const {
    std::string out = "x,density,a\n";
    for (std::size_t i = 0; i < count(); ++i) {
        out += format_real17(grid.points[i]);
        out += ',';
        out += format_real17(density[i]);
        out += ',';
        out += format_real17(a_profile[i]);
        out += '\n';
    }
    return out;
}

nlohmann::json expr_to_json(const PostfixExpr& expr, std::span<const double> constants) {
    return nlohmann::json{{"postfix", expr.token_strings()},
                          {"constants", std::vector<double>(constants.begin(), constants.end())}};
}

std::pair<PostfixExpr, std::vector<double>> expr_from_json(const nlohmann::json& j) {
    PostfixExpr expr = PostfixExpr::from_token_strings(j.at("postfix").get<std::vector<std::string>>());
    std::vector<double> constants = j.value("constants", std::vector<double>{});
    if (static_cast<int>(constants.size()) < expr.num_fit_slots())
        throw std::invalid_argument("expression JSON: constants vector shorter than used slots");
    return {std::move(expr), std::move(constants)};
}

const char* name_of(Provenance p) {
    switch (p) {
        case Provenance::Sampled: return "sampled";
        case Provenance::Enumerated: return "enumerated";
        case Provenance::Golden: return "golden";
    }
    return "sampled";
}

std::optional<Provenance> parse_provenance(const std::string& s) {
    if (s == "sampled") return Provenance::Sampled;
    if (s == "enumerated") return Provenance::Enumerated;
    if (s == "golden") return Provenance::Golden;
    return std::nullopt;
}

nlohmann::json CandidateSolution::to_json(bool with_infix) const {
    nlohmann::json ju{{"postfix", u_expr.token_strings()}};
    nlohmann::json jn{{"postfix", n_expr.token_strings()}};
    if (with_infix) {
        ju["infix"] = to_infix(u_expr, constants);
        jn["infix"] = to_infix(n_expr, constants);
    }
    return nlohmann::json{{"schema_version", 1},
                          {"u", std::move(ju)},
                          {"n", std::move(jn)},
                          {"constants", constants},
                          {"gamma0_slot", gamma0_slot},
                          {"provenance", name_of(provenance)}};
}

CandidateSolution CandidateSolution::from_json(const nlohmann::json& j) {
    CandidateSolution c;
    c.u_expr = PostfixExpr::from_token_strings(j.at("u").at("postfix").get<std::vector<std::string>>());
    c.n_expr = PostfixExpr::from_token_strings(j.at("n").at("postfix").get<std::vector<std::string>>());
    c.constants = j.at("constants").get<std::vector<double>>();
    c.gamma0_slot = j.value("gamma0_slot", -1);
    if (auto p = parse_provenance(j.value("provenance", "sampled")))
        c.provenance = *p;
    else
        throw std::invalid_argument("candidate: unknown provenance");
    const int slots = std::max(c.u_expr.num_fit_slots(), c.n_expr.num_fit_slots());
    if (static_cast<int>(c.constants.size()) < slots)
        throw std::invalid_argument("candidate: constants vector shorter than used slots");
    if (c.gamma0_slot >= static_cast<int>(c.constants.size()))
        throw std::invalid_argument("candidate: gamma0_slot out of range");
    return c;
}

const std::array<const char*, LossReport::kNumTerms> LossReport::kKeys = {
    "eq7", "eq8", "eq9", "eq10", "eq11", "eq12", "eq13", "eq14", "eq15"};

const std::array<const char*, LossReport::kNumTerms> LossReport::kDescriptions = {
    "Field equation residual",
    "Pressure balance residual",
    "Boundary a(x_min) = 0",
    "Boundary a(x_max) = 0",
    "Boundary da/dx(x_min) = 0",
    "Boundary da/dx(x_max) = 0",
    "Density symmetry n(x) = n(-x)",
    "Density data misfit",
    "Amplitude data misfit",
};

nlohmann::json LossReport::to_json() const {
    nlohmann::json j;
    for (int k = 0; k < kNumTerms; ++k) j[kKeys[k]] = sne[k];
    j["total"] = total;
    nlohmann::json m = nlohmann::json::array();
    for (int k = 0; k < kNumTerms; ++k) m.push_back(mse(k));
    j["mse"] = std::move(m);
    j["count"] = count;
    j["rejected"] = rejected;
    j["trivial"] = trivial;
    j["no_data_flag"] = no_data;
    return j;
}

LossReport LossReport::from_json(const nlohmann::json& j) {
    LossReport r;
    for (int k = 0; k < kNumTerms; ++k) {
        const auto& v = j.at(kKeys[k]);
        r.sne[k] = v.is_null() ? kNaN : v.get<double>();
    }
    r.total = j.at("total").is_null() ? kNaN : j.at("total").get<double>();
    r.count = j.at("count").get<std::size_t>();
    r.rejected = j.at("rejected").get<bool>();
    r.trivial = j.value("trivial", false);
    r.no_data = j.at("no_data_flag").get<bool>();
    return r;
}

std::string LossReport::table() const {
    char buf[128];
    std::string out = "term   description                      SNE              MSE\n";
    for (int k = 0; k < kNumTerms; ++k) {
        std::snprintf(buf, sizeof(buf), "%-6s %-32s %-16.6g %-16.6g\n", kKeys[k], kDescriptions[k],
                      sne[k], mse(k));
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "%-6s %-32s %-16.6g\n", "total", "", total);
    out += buf;
    if (no_data) out += "data terms: no dataset supplied, reported as 0\n";
    if (rejected) out += trivial ? "REJECTED: trivial solution\n" : "REJECTED: non-finite residual\n";
    return out;
}

PostfixExpr compose_g(const PostfixExpr& u_expr, double alpha) {
    std::vector<Token> t;
    t.reserve(2 * u_expr.size() + 4);
    t.insert(t.end(), u_expr.tokens().begin(), u_expr.tokens().end());
    t.push_back(Token::unary(UnaryOp::Sinh));
    t.insert(t.end(), u_expr.tokens().begin(), u_expr.tokens().end());
    t.push_back(Token::unary(UnaryOp::Tanh));
    t.push_back(Token::literal(alpha));
    t.push_back(Token::binary(BinaryOp::Mul));
    t.push_back(Token::binary(BinaryOp::Sub));
    return simplify(PostfixExpr(std::move(t)));
}

PostfixExpr compose_a(const PostfixExpr& u_expr, double alpha, int gamma0_slot) {
    std::vector<Token> t;
    t.reserve(2 * u_expr.size() + 5);
    t.insert(t.end(), u_expr.tokens().begin(), u_expr.tokens().end());
    t.push_back(Token::unary(UnaryOp::Sinh));
    t.insert(t.end(), u_expr.tokens().begin(), u_expr.tokens().end());
    t.push_back(Token::unary(UnaryOp::Tanh));
    t.push_back(Token::literal(alpha));
    t.push_back(Token::binary(BinaryOp::Mul));
    t.push_back(Token::fit_const(gamma0_slot));
    t.push_back(Token::binary(BinaryOp::Mul));
    t.push_back(Token::binary(BinaryOp::Sub));
    return simplify(PostfixExpr(std::move(t)));
}

namespace {

struct ResidualBlocks {
    std::vector<double> eq7, eq8;
    std::array<double, 4> boundary{};
    std::vector<double> symmetry;
    std::vector<double> data_density, data_amplitude;
    bool has_data = false;

    bool all_finite() const {
        auto fin = [](const std::vector<double>& v) {
            for (double x : v)
                if (!std::isfinite(x)) return false;
            return true;
        };
        for (double x : boundary)
            if (!std::isfinite(x)) return false;
        return fin(eq7) && fin(eq8) && fin(symmetry) && fin(data_density) && fin(data_amplitude);
    }
};

double sum_squares(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return acc;
}

std::vector<double> eq1_residuals(std::span<const double> U, std::span<const double> N,
                                  std::span<const double> G, std::span<const double> D2G,
                                  const PlasmaParams& p) {
    std::vector<double> r(U.size());
    const double coupling = 1.0 + p.rho_i * p.alpha;
    for (std::size_t i = 0; i < U.size(); ++i) {
        const double omega_sq = p.omega_sq_coeff * N[i];
        r[i] = D2G[i] + omega_sq * G[i] -
               N[i] * (std::tanh(U[i]) + p.rho_i * std::sinh(U[i])) / coupling;
    }
    return r;
}

std::vector<double> eq2_residuals(std::span<const double> U, std::span<const double> N,
                                  std::span<const double> G, const PlasmaParams& p) {
    std::vector<double> r(U.size());
    const double coupling = 1.0 + p.rho_i * p.alpha;
    for (std::size_t i = 0; i < U.size(); ++i) {
        const double th = std::tanh(U[i]);
        r[i] = (p.rho_i * p.v_te * p.v_te + p.v_ti * p.v_ti) * std::log(N[i] / p.n0) -
               p.rho_i * (1.0 - std::cosh(U[i])) + 0.5 * p.rho_i * p.alpha * th * th -
               p.rho_i * p.rho_i * G[i] * G[i] / (2.0 * coupling);
    }
    return r;
}

// da/dx = (cosh u - alpha*gamma0*sech^2 u) * du/dx
double amplitude_slope(double u, double du, double alpha, double gamma0) {
    const double sech_u = 1.0 / std::cosh(u);
    return (std::cosh(u) - alpha * gamma0 * sech_u * sech_u) * du;
}

}  // namespace

PreparedCandidate::PreparedCandidate(const CandidateSolution& candidate, const PlasmaParams& params)
    : candidate_(candidate) {
    if (candidate_.gamma0_slot < 0)
        throw std::invalid_argument("soliton candidate needs a gamma0 slot");
    g_ = compose_g(candidate_.u_expr, params.alpha);
    d2g_ = second_derivative(g_, 0);
    a_ = compose_a(candidate_.u_expr, params.alpha, candidate_.gamma0_slot);
    du_ = differentiate(candidate_.u_expr, 0);
    dn_ = differentiate(candidate_.n_expr, 0);
}

namespace {

ResidualBlocks blocks_for(const CandidateSolution& cand, const PostfixExpr& g,
                          const PostfixExpr& d2g, const PostfixExpr& a, const PostfixExpr& du,
                          const SolitonProblem& problem, std::span<const double> consts) {
    const PlasmaParams& p = problem.params;
    const Grid& grid = problem.grid;
    const std::size_t n_pts = grid.size();
    if (!grid.symmetric) throw std::invalid_argument("loss: grid is not symmetric");

    const std::vector<double> U = eval_batch(cand.u_expr, grid, consts);
    const std::vector<double> N = eval_batch(cand.n_expr, grid, consts);
    const std::vector<double> G = eval_batch(g, grid, consts);
    const std::vector<double> D2G = eval_batch(d2g, grid, consts);
    const std::vector<double> DU = eval_batch(du, grid, consts);
    const double gamma0 = consts[cand.gamma0_slot];

    ResidualBlocks b;
    b.eq7 = eq1_residuals(U, N, G, D2G, p);
    b.eq8 = eq2_residuals(U, N, G, p);
    b.symmetry.resize(n_pts);
    // mirrored indices: the grid guarantees points[n-1-i] == -points[i]
    for (std::size_t i = 0; i < n_pts; ++i) b.symmetry[i] = N[i] - N[n_pts - 1 - i];
    b.boundary = {eval_scalar(a, grid.points.front(), consts),
                  eval_scalar(a, grid.points.back(), consts),
                  amplitude_slope(U.front(), DU.front(), p.alpha, gamma0),
                  amplitude_slope(U.back(), DU.back(), p.alpha, gamma0)};

    if (problem.dataset) {
        const Dataset& d = *problem.dataset;
        const std::vector<double> Nd = eval_batch(cand.n_expr, d.grid, consts);
        const std::vector<double> Ad = eval_batch(a, d.grid, consts);
        b.data_density.resize(d.count());
        b.data_amplitude.resize(d.count());
        for (std::size_t i = 0; i < d.count(); ++i) {
            b.data_density[i] = (Nd[i] / p.n0 - 1.0) - d.density[i];
            b.data_amplitude[i] = problem.data_weight * (Ad[i] - d.a_profile[i]);
        }
        b.has_data = true;
    }
    return b;
}

LossReport report_from_blocks(const ResidualBlocks& b, std::size_t count) {
    LossReport r;
    r.count = count;
    r.no_data = !b.has_data;
    if (!b.all_finite()) {
        r.rejected = true;
        r.sne.fill(kNaN);
        r.total = kNaN;
        return r;
    }
    r.sne[0] = sum_squares(b.eq7);
    r.sne[1] = sum_squares(b.eq8);
    for (int k = 0; k < 4; ++k) r.sne[2 + k] = b.boundary[k] * b.boundary[k];
    r.sne[6] = sum_squares(b.symmetry);
    r.sne[7] = sum_squares(b.data_density);
    r.sne[8] = sum_squares(b.data_amplitude);
    r.total = 0.0;
    for (int k = 0; k < LossReport::kNumTerms; ++k) r.total += r.sne[k];
    return r;
}

}  // namespace

LossReport PreparedCandidate::score(const SolitonProblem& problem,
                                    std::span<const double> constants) const {
    ResidualBlocks b = blocks_for(candidate_, g_, d2g_, a_, du_, problem, constants);
    const std::size_t count = problem.dataset ? problem.dataset->count() : problem.grid.size();
    LossReport r = report_from_blocks(b, count);
    if (!r.rejected && !triviality_check(problem, constants)) {
        r.trivial = true;
        r.rejected = true;  // values stay populated for diagnostics
    }
    return r;
}

Eigen::VectorXd PreparedCandidate::residuals(const SolitonProblem& problem,
                                             std::span<const double> constants) const {
    ResidualBlocks b = blocks_for(candidate_, g_, d2g_, a_, du_, problem, constants);
    const std::size_t total = b.eq7.size() + b.eq8.size() + 4 + b.symmetry.size() +
                              b.data_density.size() + b.data_amplitude.size();
    Eigen::VectorXd r(static_cast<Eigen::Index>(total));
    Eigen::Index at = 0;
    auto put = [&](std::span<const double> v) {
        for (double x : v) r[at++] = x;
    };
    put(b.eq7);
    put(b.eq8);
    put(b.boundary);
    put(b.symmetry);
    put(b.data_density);
    put(b.data_amplitude);
    return r;
}

bool PreparedCandidate::triviality_check(const SolitonProblem& problem,
                                         std::span<const double> constants) const {
    const CandidateSolution& c = candidate_;
    if (!c.u_expr.references_variable(0) || !c.n_expr.references_variable(0)) return false;
    for (const PostfixExpr* e : {&c.u_expr, &c.n_expr, &du_, &dn_}) {
        const std::vector<double> vals = eval_batch(*e, problem.grid, constants);
        const double var = variance(vals);
        if (!(var >= problem.triviality_threshold)) return false;  // NaN fails too
    }
    return true;
}

LossReport SolitonProblem::total_loss(const CandidateSolution& candidate) const {
    PreparedCandidate pc(candidate, params);
    return pc.score(*this, candidate.constants);
}

bool SolitonProblem::triviality_check(const CandidateSolution& candidate) const {
    PreparedCandidate pc(candidate, params);
    return pc.triviality_check(*this, candidate.constants);
}

double loss_eq1(const CandidateSolution& c, const PlasmaParams& p, const Grid& grid) {
    const PostfixExpr g = compose_g(c.u_expr, p.alpha);
    const PostfixExpr d2g = second_derivative(g, 0);
    const std::vector<double> U = eval_batch(c.u_expr, grid, c.constants);
    const std::vector<double> N = eval_batch(c.n_expr, grid, c.constants);
    const std::vector<double> G = eval_batch(g, grid, c.constants);
    const std::vector<double> D2G = eval_batch(d2g, grid, c.constants);
    const std::vector<double> r = eq1_residuals(U, N, G, D2G, p);
    double acc = 0.0;
    for (double x : r) {
        if (!std::isfinite(x)) return kNaN;
        acc += x * x;
    }
    return acc;
}

double loss_eq2(const CandidateSolution& c, const PlasmaParams& p, const Grid& grid) {
    const PostfixExpr g = compose_g(c.u_expr, p.alpha);
    const std::vector<double> U = eval_batch(c.u_expr, grid, c.constants);
    const std::vector<double> N = eval_batch(c.n_expr, grid, c.constants);
    const std::vector<double> G = eval_batch(g, grid, c.constants);
    const std::vector<double> r = eq2_residuals(U, N, G, p);
    double acc = 0.0;
    for (double x : r) {
        if (!std::isfinite(x)) return kNaN;
        acc += x * x;
    }
    return acc;
}

std::array<double, 4> loss_boundary(const CandidateSolution& c, const PlasmaParams& p,
                                    const Grid& grid) {
    const PostfixExpr a = compose_a(c.u_expr, p.alpha, c.gamma0_slot);
    const PostfixExpr du = differentiate(c.u_expr, 0);
    const double gamma0 = c.constants[c.gamma0_slot];
    const double u_lo = eval_scalar(c.u_expr, grid.points.front(), c.constants);
    const double u_hi = eval_scalar(c.u_expr, grid.points.back(), c.constants);
    const double terms[4] = {
        eval_scalar(a, grid.points.front(), c.constants),
        eval_scalar(a, grid.points.back(), c.constants),
        amplitude_slope(u_lo, eval_scalar(du, grid.points.front(), c.constants), p.alpha, gamma0),
        amplitude_slope(u_hi, eval_scalar(du, grid.points.back(), c.constants), p.alpha, gamma0),
    };
    std::array<double, 4> out;
    for (int k = 0; k < 4; ++k) out[k] = std::isfinite(terms[k]) ? terms[k] * terms[k] : kNaN;
    return out;
}

double loss_symmetry(const CandidateSolution& c, const Grid& grid) {
    if (!grid.symmetric) throw std::invalid_argument("loss_symmetry: grid is not symmetric");
    const std::vector<double> N = eval_batch(c.n_expr, grid, c.constants);
    double acc = 0.0;
    const std::size_t n = N.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double d = N[i] - N[n - 1 - i];
        if (!std::isfinite(d)) return kNaN;
        acc += d * d;
    }
    return acc;
}

std::pair<double, double> loss_data(const CandidateSolution& c, const PlasmaParams& p,
                                    const Dataset& data, double weight) {
    const std::vector<double> Nd = eval_batch(c.n_expr, data.grid, c.constants);
    const PostfixExpr a = compose_a(c.u_expr, p.alpha, c.gamma0_slot);
    const std::vector<double> Ad = eval_batch(a, data.grid, c.constants);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < data.count(); ++i) {
        const double r1 = (Nd[i] / p.n0 - 1.0) - data.density[i];
        const double r2 = weight * (Ad[i] - data.a_profile[i]);
        s1 += r1 * r1;
        s2 += r2 * r2;
    }
    if (!std::isfinite(s1)) s1 = kNaN;
    if (!std::isfinite(s2)) s2 = kNaN;
    return {s1, s2};
}

}  // namespace pisr
