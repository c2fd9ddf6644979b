#include "pisr/config.hpp"

#include <cctype>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "pisr/json_io.hpp"

namespace pisr {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config: bad number for " + key + ": '" + v + "'");
    return x;
}

long parse_long(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long x = std::strtol(v.c_str(), &end, 10);
    if (end == v.c_str() || *end != '\0')
        throw std::invalid_argument("config: bad integer for " + key + ": '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw std::invalid_argument("config: bad boolean for " + key + ": '" + v + "'");
}

std::string bool_str(bool b) { return b ? "true" : "false"; }

}  // namespace

RunConfig::RunConfig() {
    unary_ops = {UnaryOp::Neg,  UnaryOp::Log,  UnaryOp::Exp,  UnaryOp::Cos,  UnaryOp::Sin,
                 UnaryOp::Sqrt, UnaryOp::Asin, UnaryOp::Acos, UnaryOp::Tanh, UnaryOp::Sech};
    binary_ops = {BinaryOp::Add, BinaryOp::Sub, BinaryOp::Mul, BinaryOp::Div, BinaryOp::Pow};
}

namespace {

// One assignment point per key keeps load/save/env handling in sync.
struct KeyBinding {
    std::string section, key;
    std::function<void(RunConfig&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

std::vector<KeyBinding> bindings() {
    using C = RunConfig;
    std::vector<KeyBinding> b;
    auto add = [&](std::string section, std::string key, auto set, auto get) {
        b.push_back({std::move(section), std::move(key), std::move(set), std::move(get)});
    };

    add("problem", "kind",
        [](C& c, const std::string& v) {
            if (v == "soliton") c.kind = ProblemKind::Soliton;
            else if (v == "planted-sech") c.kind = ProblemKind::PlantedSech;
            else throw std::invalid_argument("config: unknown problem kind '" + v + "'");
        },
        [](const C& c) { return c.kind == ProblemKind::Soliton ? "soliton" : "planted-sech"; });
    add("problem", "rho_i", [](C& c, const std::string& v) { c.params.rho_i = parse_double("rho_i", v); },
        [](const C& c) { return format_real17(c.params.rho_i); });
    add("problem", "alpha", [](C& c, const std::string& v) { c.params.alpha = parse_double("alpha", v); },
        [](const C& c) { return format_real17(c.params.alpha); });
    add("problem", "v_te", [](C& c, const std::string& v) { c.params.v_te = parse_double("v_te", v); },
        [](const C& c) { return format_real17(c.params.v_te); });
    add("problem", "v_ti", [](C& c, const std::string& v) { c.params.v_ti = parse_double("v_ti", v); },
        [](const C& c) { return format_real17(c.params.v_ti); });
    add("problem", "n0", [](C& c, const std::string& v) { c.params.n0 = parse_double("n0", v); },
        [](const C& c) { return format_real17(c.params.n0); });
    add("problem", "omega_sq_coeff",
        [](C& c, const std::string& v) { c.params.omega_sq_coeff = parse_double("omega_sq_coeff", v); },
        [](const C& c) { return format_real17(c.params.omega_sq_coeff); });
    add("problem", "triviality_threshold",
        [](C& c, const std::string& v) { c.triviality_threshold = parse_double("triviality_threshold", v); },
        [](const C& c) { return format_real17(c.triviality_threshold); });
    add("problem", "data_weight",
        [](C& c, const std::string& v) { c.data_weight = parse_double("data_weight", v); },
        [](const C& c) { return format_real17(c.data_weight); });

    add("grid", "x_min", [](C& c, const std::string& v) { c.x_min = parse_double("x_min", v); },
        [](const C& c) { return format_real17(c.x_min); });
    add("grid", "x_max", [](C& c, const std::string& v) { c.x_max = parse_double("x_max", v); },
        [](const C& c) { return format_real17(c.x_max); });
    add("grid", "n_points",
        [](C& c, const std::string& v) { c.n_points = static_cast<int>(parse_long("n_points", v)); },
        [](const C& c) { return std::to_string(c.n_points); });

    add("grammar", "max_depth",
        [](C& c, const std::string& v) { c.max_depth = static_cast<int>(parse_long("max_depth", v)); },
        [](const C& c) { return std::to_string(c.max_depth); });
    add("grammar", "unary",
        [](C& c, const std::string& v) {
            c.unary_ops.clear();
            for (const std::string& name : split_list(v)) {
                auto op = parse_unary(name);
                if (!op) throw std::invalid_argument("config: unknown unary operator '" + name + "'");
                c.unary_ops.push_back(*op);
            }
        },
        [](const C& c) {
            std::string s;
            for (UnaryOp op : c.unary_ops) {
                if (!s.empty()) s += ',';
                s += name_of(op);
            }
            return s;
        });
    add("grammar", "binary",
        [](C& c, const std::string& v) {
            c.binary_ops.clear();
            for (const std::string& name : split_list(v)) {
                auto op = parse_binary(name);
                if (!op) throw std::invalid_argument("config: unknown binary operator '" + name + "'");
                c.binary_ops.push_back(*op);
            }
        },
        [](const C& c) {
            std::string s;
            for (BinaryOp op : c.binary_ops) {
                if (!s.empty()) s += ',';
                s += name_of(op);
            }
            return s;
        });
    add("grammar", "fit_const_leaves",
        [](C& c, const std::string& v) { c.fit_const_leaves = parse_bool("fit_const_leaves", v); },
        [](const C& c) { return bool_str(c.fit_const_leaves); });
    add("grammar", "exact_depth",
        [](C& c, const std::string& v) { c.exact_depth = parse_bool("exact_depth", v); },
        [](const C& c) { return bool_str(c.exact_depth); });

    add("search", "driver",
        [](C& c, const std::string& v) {
            if (v == "anneal") c.driver = SearchDriver::Anneal;
            else if (v == "brute") c.driver = SearchDriver::BruteForce;
            else throw std::invalid_argument("config: unknown search driver '" + v + "'");
        },
        [](const C& c) { return c.driver == SearchDriver::Anneal ? "anneal" : "brute"; });
    add("search", "seed",
        [](C& c, const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_long("seed", v)); },
        [](const C& c) { return std::to_string(c.seed); });
    add("search", "workers",
        [](C& c, const std::string& v) { c.workers = static_cast<int>(parse_long("workers", v)); },
        [](const C& c) { return std::to_string(c.workers); });
    add("search", "max_evaluations",
        [](C& c, const std::string& v) { c.max_evaluations = parse_long("max_evaluations", v); },
        [](const C& c) { return std::to_string(c.max_evaluations); });
    add("search", "max_wall_seconds",
        [](C& c, const std::string& v) { c.max_wall_seconds = parse_double("max_wall_seconds", v); },
        [](const C& c) { return format_real17(c.max_wall_seconds); });
    add("search", "target_loss",
        [](C& c, const std::string& v) { c.target_loss = parse_double("target_loss", v); },
        [](const C& c) { return format_real17(c.target_loss); });
    add("search", "initial_temperature",
        [](C& c, const std::string& v) { c.schedule.initial_temperature = parse_double("initial_temperature", v); },
        [](const C& c) { return format_real17(c.schedule.initial_temperature); });
    add("search", "cooling_ratio",
        [](C& c, const std::string& v) { c.schedule.cooling_ratio = parse_double("cooling_ratio", v); },
        [](const C& c) { return format_real17(c.schedule.cooling_ratio); });
    add("search", "steps_per_temperature",
        [](C& c, const std::string& v) {
            c.schedule.steps_per_temperature = static_cast<int>(parse_long("steps_per_temperature", v));
        },
        [](const C& c) { return std::to_string(c.schedule.steps_per_temperature); });
    add("search", "min_temperature",
        [](C& c, const std::string& v) { c.schedule.min_temperature = parse_double("min_temperature", v); },
        [](const C& c) { return format_real17(c.schedule.min_temperature); });
    add("search", "init_samples",
        [](C& c, const std::string& v) { c.init_samples = static_cast<int>(parse_long("init_samples", v)); },
        [](const C& c) { return std::to_string(c.init_samples); });
    add("search", "fit_gate_factor",
        [](C& c, const std::string& v) { c.fit_gate_factor = parse_double("fit_gate_factor", v); },
        [](const C& c) { return format_real17(c.fit_gate_factor); });

    add("fit", "method",
        [](C& c, const std::string& v) {
            if (v == "lm") c.fit_method = FitConfig::Method::LevenbergMarquardt;
            else if (v == "bfgs") c.fit_method = FitConfig::Method::QuasiNewton;
            else throw std::invalid_argument("config: unknown fit method '" + v + "'");
        },
        [](const C& c) { return c.fit_method == FitConfig::Method::LevenbergMarquardt ? "lm" : "bfgs"; });
    add("fit", "max_iterations",
        [](C& c, const std::string& v) { c.fit_max_iterations = static_cast<int>(parse_long("max_iterations", v)); },
        [](const C& c) { return std::to_string(c.fit_max_iterations); });
    add("fit", "gradient_tolerance",
        [](C& c, const std::string& v) { c.fit_gradient_tolerance = parse_double("gradient_tolerance", v); },
        [](const C& c) { return format_real17(c.fit_gradient_tolerance); });
    add("fit", "step_tolerance",
        [](C& c, const std::string& v) { c.fit_step_tolerance = parse_double("step_tolerance", v); },
        [](const C& c) { return format_real17(c.fit_step_tolerance); });
    add("fit", "gamma0_initial",
        [](C& c, const std::string& v) { c.gamma0_initial = parse_double("gamma0_initial", v); },
        [](const C& c) { return format_real17(c.gamma0_initial); });
    add("fit", "gamma0_min",
        [](C& c, const std::string& v) { c.gamma0_min = parse_double("gamma0_min", v); },
        [](const C& c) { return format_real17(c.gamma0_min); });
    add("fit", "gamma0_max",
        [](C& c, const std::string& v) { c.gamma0_max = parse_double("gamma0_max", v); },
        [](const C& c) { return format_real17(c.gamma0_max); });

    add("paths", "dataset", [](C& c, const std::string& v) { c.dataset_path = v; },
        [](const C& c) { return c.dataset_path; });
    add("paths", "output_dir", [](C& c, const std::string& v) { c.output_dir = v; },
        [](const C& c) { return c.output_dir; });
    add("paths", "checkpoint", [](C& c, const std::string& v) { c.checkpoint_path = v; },
        [](const C& c) { return c.checkpoint_path; });
    add("paths", "candidate", [](C& c, const std::string& v) { c.candidate_path = v; },
        [](const C& c) { return c.candidate_path; });
    return b;
}

const std::vector<KeyBinding>& binding_table() {
    static const std::vector<KeyBinding> table = bindings();
    return table;
}

}  // namespace

RunConfig RunConfig::parse(const std::string& text) {
    RunConfig cfg;
    const auto& table = binding_table();
    std::istringstream in(text);
    std::string line, section;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        bool found = false;
        for (const KeyBinding& kb : table) {
            if (kb.section == section && kb.key == key) {
                kb.set(cfg, value);
                found = true;
                break;
            }
        }
        if (!found)
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": unknown key [" +
                                        section + "] " + key);
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) { return parse(read_text_file(path)); }

std::string RunConfig::serialize() const {
    std::string out;
    std::string section;
    for (const KeyBinding& kb : binding_table()) {
        if (kb.section != section) {
            if (!out.empty()) out += '\n';
            section = kb.section;
            out += '[' + section + "]\n";
        }
        out += kb.key + " = " + kb.get(*this) + '\n';
    }
    return out;
}

void RunConfig::save(const std::string& path) const { write_text_file(path, serialize()); }

void RunConfig::apply_env_overrides() {
    for (const KeyBinding& kb : binding_table()) {
        std::string var = "PISR_" + kb.section + "_" + kb.key;
        for (char& ch : var) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
        if (const char* v = std::getenv(var.c_str())) kb.set(*this, v);
    }
    validate();
}

void RunConfig::validate() const {
    params.validate();
    if (n_points < 2) throw std::invalid_argument("config: n_points must be >= 2");
    if (!(x_min < x_max)) throw std::invalid_argument("config: x_min must be < x_max");
    if (max_depth < 1) throw std::invalid_argument("config: grammar max_depth must be >= 1");
    if (workers < 1) throw std::invalid_argument("config: workers must be >= 1");
    if (init_samples < 1) throw std::invalid_argument("config: init_samples must be >= 1");
    if (!(triviality_threshold > 0)) throw std::invalid_argument("config: triviality_threshold must be > 0");
    if (!(gamma0_min >= 1.0)) throw std::invalid_argument("config: gamma0_min must be >= 1");
    if (!(gamma0_initial >= gamma0_min && gamma0_initial <= gamma0_max))
        throw std::invalid_argument("config: gamma0_initial outside [gamma0_min, gamma0_max]");
    schedule.validate();
}

Grid RunConfig::make_grid() const { return Grid::uniform(x_min, x_max, n_points); }

Grammar RunConfig::make_grammar() const {
    Grammar g;
    g.max_depth = max_depth;
    g.unary = unary_ops;
    g.binary = binary_ops;
    g.num_variables = 1;
    g.variable_leaves = true;
    g.fit_const_leaves = fit_const_leaves;
    g.exact_depth = exact_depth;
    return g;
}

FitConfig RunConfig::make_fit_config() const {
    FitConfig f;
    f.method = fit_method;
    f.max_iterations = fit_max_iterations;
    f.gradient_tolerance = fit_gradient_tolerance;
    f.step_tolerance = fit_step_tolerance;
    return f;
}

SearchBudget RunConfig::make_budget() const {
    SearchBudget b;
    b.max_evaluations = max_evaluations;
    b.max_wall_seconds = max_wall_seconds;
    b.target_loss = target_loss;
    return b;
}

}  // namespace pisr
