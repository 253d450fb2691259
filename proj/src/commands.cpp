#include "gbar/commands.hpp"

#include "gbar/dynkin.hpp"
#include "gbar/embedding.hpp"
#include "gbar/errors.hpp"
#include "gbar/rates.hpp"
#include "gbar/shortfall.hpp"

#include <filesystem>
#include <fstream>

namespace gbar {

using nlohmann::json;

namespace {

// Largest recombining problem whose value process is kept for stopping-time output.
constexpr int kKeepProcessMaxSteps = 512;

json barrier_json(const BarrierSpec& b) {
    return {{"L", b.lower}, {"R", b.upper ? json(*b.upper) : json("inf")}};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::string csv_field(const std::optional<double>& v) { return v ? format_number(*v) : ""; }

void write_file(const RunOptions& opts, const std::string& name, const std::string& body) {
    if (!opts.out_dir) return;
    std::filesystem::create_directories(*opts.out_dir);
    const auto path = std::filesystem::path(*opts.out_dir) / name;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << body;
}

bool keep_process(TreeMode mode, int n) {
    return mode == TreeMode::PathTree ? n <= kPathTreeMaxSteps : n <= kKeepProcessMaxSteps;
}

GameSolution solve(const ExperimentConfig& cfg, int n, const BarrierSpec& bar, bool keep) {
    SolveOptions so;
    so.mode = cfg.resolved_mode();
    so.convention = cfg.resolved_convention();
    so.keep_process = keep;
    return solve_game(cfg.model, n, cfg.payoff, bar, so);
}

json stopping_json(const GameSolution& sol, Player player, double up_prob) {
    const StoppingLaw law = stopping_law(sol, player, up_prob);
    json j;
    j["index"] = law.earliest == law.latest ? json(law.earliest) : json(nullptr);
    j["mean"] = law.mean;
    return j;
}

json price_one(const ExperimentConfig& cfg, int n) {
    const BarrierSpec bar = cfg.widen.apply(cfg.barrier, n);
    const TreeMode mode = cfg.resolved_mode();
    const bool keep = keep_process(mode, n);
    const GameSolution sol = solve(cfg, n, bar, keep);
    json j;
    j["n"] = n;
    j["value"] = sol.value;
    j["mode"] = to_string(mode);
    j["convention"] = to_string(sol.convention);
    j["barrier"] = barrier_json(bar);
    if (keep) {
        const double pt = sol.tree->params().p_tilde;
        const json s = stopping_json(sol, Player::Seller, pt);
        const json b = stopping_json(sol, Player::Buyer, pt);
        j["sigma_star"] = s["index"];
        j["sigma_star_mean"] = s["mean"];
        j["tau_star"] = b["index"];
        j["tau_star_mean"] = b["mean"];
    } else {
        j["sigma_star"] = nullptr;
        j["tau_star"] = nullptr;
    }
    if (cfg.european) j["european"] = european_value(cfg.model, n, cfg.payoff, bar, mode);
    return j;
}

double require_x(const ExperimentConfig& cfg) {
    if (!cfg.x) throw ConfigError("x", "this command needs the initial capital 'x'");
    return *cfg.x;
}

json shortfall_one(const ExperimentConfig& cfg, int n) {
    const double x = require_x(cfg);
    const BarrierSpec bar = cfg.widen.apply(cfg.barrier, n);
    ShortfallOptions so;
    so.mode = cfg.resolved_mode();
    so.convention = cfg.resolved_convention();
    so.keep_tables = false;
    so.keep_selectors = false;
    const ShortfallResult res = solve_shortfall(cfg.model, n, cfg.payoff, bar, x, cfg.grid, so);
    json j;
    j["n"] = n;
    j["x"] = x;
    j["risk"] = res.risk;
    j["value"] = solve(cfg, n, bar, false).value;
    j["y_max"] = res.surface->y_max;
    j["grid_tolerance"] = res.surface->tolerance();
    j["mode"] = to_string(so.mode);
    j["convention"] = to_string(*so.convention);
    j["barrier"] = barrier_json(bar);
    return j;
}

// Perfect hedge when the capital covers the price, else the shortfall-optimal hedge.
struct BuiltHedge {
    GameSolution solution;
    HedgeStrategy strategy;
    std::string kind;
    std::optional<double> risk;
    double x = 0.0;
};

BuiltHedge build_hedge(const ExperimentConfig& cfg, int n, const BarrierSpec& bar) {
    const TreeMode mode = cfg.resolved_mode();
    if (mode == TreeMode::PathTree && n > kPathTreeMaxSteps)
        throw BudgetError("hedge tables on the path tree are limited to n <= " +
                          std::to_string(kPathTreeMaxSteps));
    BuiltHedge out;
    out.solution = solve(cfg, n, bar, true);
    out.x = cfg.x.value_or(out.solution.value);
    if (out.x >= out.solution.value) {
        out.strategy = perfect_hedge(out.solution, out.x);
        out.kind = "perfect";
        out.risk = 0.0;
    } else {
        ShortfallOptions so;
        so.mode = mode;
        so.convention = cfg.resolved_convention();
        so.keep_selectors = false;
        const ShortfallResult res = solve_shortfall(cfg.model, n, cfg.payoff, bar, out.x, cfg.grid, so);
        out.strategy = extract_optimal_hedge(res.surface, out.x);
        out.kind = "shortfall-optimal";
        out.risk = res.risk;
    }
    return out;
}

// Enumeration bound for the exact audit of a hedge.
constexpr int kAuditMaxSteps = 20;

json hedge_one(const ExperimentConfig& cfg, int n) {
    const BarrierSpec bar = cfg.widen.apply(cfg.barrier, n);
    const BuiltHedge h = build_hedge(cfg, n, bar);
    const PortfolioPath root = replay(h.strategy, {});
    json j;
    j["n"] = n;
    j["x"] = h.x;
    j["value"] = h.solution.value;
    j["kind"] = h.kind;
    j["risk"] = optional_number(h.risk);
    const double alpha = h.strategy.position(0, 0, h.x);
    const double s0 = h.strategy.tree->node(0, 0).s_disc;
    j["root"] = {{"alpha", alpha},
                 {"gamma", alpha / s0},
                 {"beta", (h.x - alpha) / h.strategy.tree->params().b0},
                 {"cancel", root.cancel_index == 0}};
    if (n <= kAuditMaxSteps) {
        const RiskAudit audit = portfolio_risk(h.strategy);
        j["audit"] = {{"risk", audit.w0},
                      {"risk_with_cancel", audit.with_cancel},
                      {"min_value", audit.min_value}};
    } else {
        j["audit"] = nullptr;
    }
    j["barrier"] = barrier_json(bar);
    return j;
}

json simulate_one(const ExperimentConfig& cfg, int n, const RunOptions& opts, std::string& csv) {
    const BarrierSpec bar = cfg.widen.apply(cfg.barrier, n);
    const BuiltHedge h = build_hedge(cfg, n, bar);
    auto sol = std::make_shared<const GameSolution>(h.solution);
    const BuyerRule tau = [sol](std::span<const int> signs) { return sol->tau_star(signs); };

    MonteCarloConfig mc;
    mc.paths = cfg.sim.paths;
    mc.dt_divisor = cfg.sim.dt_divisor;
    mc.seed = opts.seed.value_or(cfg.sim.seed);
    mc.threads = opts.threads;
    mc.bridge = cfg.sim.bridge;
    mc.candidates = cfg.sim.candidates;
    const ShortfallEstimate est = estimate_shortfall_mc(cfg.model, h.strategy, cfg.payoff, cfg.barrier,
                                                        cfg.resolved_convention(), tau, mc);
    json j;
    j["n"] = n;
    j["x"] = h.x;
    j["value"] = h.solution.value;
    j["hedge"] = h.kind;
    j["paths"] = mc.paths;
    j["seed"] = mc.seed;
    j["lattice_barrier"] = barrier_json(bar);
    j["lower_bound"] = true;
    j["max_estimate"] = est.best().estimate.mean;
    j["max_std_err"] = est.best().estimate.std_err;
    j["argmax"] = est.best().name;
    json rows = json::array();
    csv = "candidate,estimate,std_err,n_paths\n";
    for (const auto& c : est.candidates) {
        rows.push_back({{"candidate", c.name},
                        {"estimate", c.estimate.mean},
                        {"std_err", c.estimate.std_err},
                        {"n_paths", c.estimate.count}});
        csv += c.name + "," + format_number(c.estimate.mean) + "," + format_number(c.estimate.std_err) +
               "," + std::to_string(c.estimate.count) + "\n";
    }
    j["candidates"] = rows;
    return j;
}

json converge(const ExperimentConfig& cfg, const RunOptions& opts) {
    ConvergenceOptions co;
    co.mode = cfg.resolved_mode();
    co.convention = cfg.resolved_convention();
    co.european = cfg.european;
    co.capital = cfg.x;
    co.grid = cfg.grid;
    if (cfg.widen.mode != WidenMode::Off)
        co.barrier_at = [w = cfg.widen](const BarrierSpec& b, int n) { return w.apply(b, n); };
    const ConvergenceStudy study = convergence_study(cfg.model, cfg.payoff, cfg.barrier, cfg.n_list, co);
    json rows = json::array();
    std::string csv = "n,value,abs_diff_prev,running_rate\n";
    for (const auto& r : study.rows) {
        json row = {{"n", r.n},
                    {"value", r.value},
                    {"abs_diff_prev", optional_number(r.abs_diff_prev)},
                    {"running_rate", optional_number(r.running_rate)}};
        if (r.european) row["european"] = *r.european;
        if (r.risk) row["risk"] = *r.risk;
        rows.push_back(row);
        csv += std::to_string(r.n) + "," + format_number(r.value) + "," + csv_field(r.abs_diff_prev) +
               "," + csv_field(r.running_rate) + "\n";
    }
    write_file(opts, "converge.csv", csv);
    json j;
    j["rows"] = rows;
    j["slope"] = study.fit ? json(study.fit->slope) : json(nullptr);
    j["intercept"] = study.fit ? json(study.fit->intercept) : json(nullptr);
    j["floored"] = study.floored;
    j["mode"] = to_string(co.mode);
    j["convention"] = to_string(*co.convention);
    return j;
}

template <class F>
json per_n(const ExperimentConfig& cfg, F&& one) {
    if (cfg.single_n && cfg.n_list.size() == 1) return one(cfg.n_list.front());
    json results = json::array();
    for (int n : cfg.n_list) results.push_back(one(n));
    return {{"results", results}};
}

}  // namespace

json run_command(const std::string& command, const ExperimentConfig& cfg, const RunOptions& options) {
    if (options.threads < 1) throw ConfigError("threads", "--threads must be >= 1");
    try {
        if (command == "price") return per_n(cfg, [&](int n) { return price_one(cfg, n); });
        if (command == "shortfall") return per_n(cfg, [&](int n) { return shortfall_one(cfg, n); });
        if (command == "hedge") return per_n(cfg, [&](int n) { return hedge_one(cfg, n); });
        if (command == "simulate") {
            const bool single = cfg.single_n && cfg.n_list.size() == 1;
            return per_n(cfg, [&](int n) {
                std::string csv;
                json j = simulate_one(cfg, n, options, csv);
                write_file(options, single ? "simulate.csv" : "simulate_n" + std::to_string(n) + ".csv", csv);
                return j;
            });
        }
        if (command == "converge") return converge(cfg, options);
    } catch (const NotMarkovReducible& e) {
        throw ConfigError("mode", e.what());
    }
    throw ConfigError("command", "unknown command '" + command + "'");
}

std::string render(const json& result) { return result.dump(2) + "\n"; }

}  // namespace gbar
