#include "gbar/config.hpp"

#include "gbar/dynkin.hpp"
#include "gbar/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <set>

namespace gbar {

using nlohmann::json;

std::string to_string(WidenMode mode) {
    switch (mode) {
    case WidenMode::Off: return "off";
    case WidenMode::KnockOut: return "knock-out";
    case WidenMode::KnockIn: return "knock-in";
    }
    return "off";
}

BarrierSpec WidenConfig::apply(const BarrierSpec& barrier, int n) const {
    switch (mode) {
    case WidenMode::Off: return barrier;
    case WidenMode::KnockOut: return widen_barrier(barrier, n, 1.0 / 3.0, 1.0);
    case WidenMode::KnockIn: return widen_barrier(barrier, n, 0.25 - beta, 2.0);
    }
    return barrier;
}

TreeMode ExperimentConfig::resolved_mode() const {
    if (mode) return *mode;
    return payoff.reduction() == Reduction::None ? TreeMode::PathTree : TreeMode::Recombining;
}

Convention ExperimentConfig::resolved_convention() const {
    return convention.value_or(default_convention(barrier.direction));
}

std::string format_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Reads one JSON object, rejecting keys outside `allowed`.
class Section {
public:
    Section(const json& j, std::string path, std::set<std::string> allowed) : j_(j), path_(std::move(path)) {
        if (!j.is_object()) throw ConfigError(path_, path_ + ": expected an object");
        for (const auto& [key, _] : j.items())
            if (!allowed.count(key)) throw ConfigError(field(key), "unknown key '" + field(key) + "'");
    }

    bool has(const std::string& key) const { return j_.contains(key); }
    std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    double number(const std::string& key, std::optional<double> fallback = {}, bool allow_inf = false) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(field(key), "missing required field '" + field(key) + "'");
        }
        const json& v = j_.at(key);
        if (allow_inf && v.is_string() && v.get<std::string>() == "inf") return kInf;
        if (!v.is_number())
            throw ConfigError(field(key), field(key) + ": expected a number" +
                                              (allow_inf ? " or \"inf\"" : ""));
        return v.get<double>();
    }

    long long integer(const std::string& key, long long fallback) const {
        if (!has(key)) return fallback;
        return integer_value(j_.at(key), field(key));
    }

    static long long integer_value(const json& v, const std::string& name) {
        if (v.is_number_integer()) return v.get<long long>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::floor(d) == d && std::abs(d) < 9e15) return static_cast<long long>(d);
        }
        throw ConfigError(name, name + ": expected an integer");
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        if (!j_.at(key).is_boolean()) throw ConfigError(field(key), field(key) + ": expected true or false");
        return j_.at(key).get<bool>();
    }

    std::string string(const std::string& key, std::optional<std::string> fallback = {}) const {
        if (!has(key)) {
            if (fallback) return *fallback;
            throw ConfigError(field(key), "missing required field '" + field(key) + "'");
        }
        if (!j_.at(key).is_string()) throw ConfigError(field(key), field(key) + ": expected a string");
        return j_.at(key).get<std::string>();
    }

    const json& raw(const std::string& key) const { return j_.at(key); }

private:
    const json& j_;
    std::string path_;
};

template <class F>
auto rethrow_as(const std::string& field, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(field, e.what());
    }
}

std::string location(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

int checked_int(long long v, const std::string& name, long long lo) {
    if (v < lo || v > std::numeric_limits<int>::max())
        throw ConfigError(name, name + " must be >= " + std::to_string(lo));
    return static_cast<int>(v);
}

}  // namespace

void validate_config(const ExperimentConfig& cfg) {
    rethrow_as("model", [&] { cfg.model.validate(); });
    rethrow_as("barrier", [&] { cfg.barrier.validate(); });
    rethrow_as("payoff", [&] { cfg.payoff.validate(); });
    rethrow_as("grid", [&] { cfg.grid.validate(); });
    if (cfg.barrier.direction == BarrierDirection::KnockOut && !cfg.barrier.contains(cfg.model.s0))
        throw ConfigError("barrier", "barrier: knock-out runs need L < s0 < R");
    if (cfg.n_list.empty()) throw ConfigError("n", "one of 'n' or 'n_list' is required");
    for (std::size_t i = 0; i < cfg.n_list.size(); ++i) {
        if (cfg.n_list[i] < 1) throw ConfigError("n", "n must be >= 1");
        if (i > 0 && cfg.n_list[i] <= cfg.n_list[i - 1])
            throw ConfigError("n_list", "n_list must be strictly increasing");
    }
    if (cfg.x && !(*cfg.x >= 0.0 && std::isfinite(*cfg.x))) throw ConfigError("x", "x must be >= 0");
    if (cfg.sim.paths < 1) throw ConfigError("sim.paths", "sim.paths must be >= 1");
    if (cfg.sim.dt_divisor < 2) throw ConfigError("sim.dt_divisor", "sim.dt_divisor must be >= 2");
    if (cfg.widen.mode == WidenMode::KnockIn && !(cfg.widen.beta >= 0.0 && cfg.widen.beta < 0.25))
        throw ConfigError("widen.beta", "widen.beta must lie in [0, 1/4)");
    if (cfg.mode == TreeMode::Recombining && cfg.payoff.reduction() == Reduction::None)
        throw ConfigError("mode", "recombining mode does not support " + to_string(cfg.payoff.kind) +
                                      " payoffs; use path-tree");
}

ExperimentConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError("", "malformed JSON at " + location(text, e.byte) + ": " + e.what());
    }
    const Section root(doc, "", {"model", "barrier", "payoff", "n", "n_list", "x", "grid", "sim",
                                 "convention", "widen", "mode", "european"});
    ExperimentConfig cfg;

    if (!root.has("model")) throw ConfigError("model", "missing required field 'model'");
    const Section model(root.raw("model"), "model", {"s0", "r", "mu", "kappa", "T", "b0"});
    cfg.model.s0 = model.number("s0");
    cfg.model.r = model.number("r", 0.0);
    cfg.model.mu = model.number("mu", 0.0);
    cfg.model.kappa = model.number("kappa");
    cfg.model.T = model.number("T");
    cfg.model.b0 = model.number("b0", 1.0);

    if (root.has("barrier")) {
        const Section b(root.raw("barrier"), "barrier", {"L", "R", "direction"});
        cfg.barrier.lower = b.number("L", 0.0);
        const double upper = b.number("R", kInf, true);
        if (std::isinf(upper) && upper > 0)
            cfg.barrier.upper.reset();
        else
            cfg.barrier.upper = upper;
        const std::string dir = b.string("direction", std::string("knock-out"));
        if (dir == "knock-out")
            cfg.barrier.direction = BarrierDirection::KnockOut;
        else if (dir == "knock-in")
            cfg.barrier.direction = BarrierDirection::KnockIn;
        else
            throw ConfigError("barrier.direction", "barrier.direction must be knock-out or knock-in");
    }

    if (!root.has("payoff")) throw ConfigError("payoff", "missing required field 'payoff'");
    const Section p(root.raw("payoff"), "payoff",
                    {"kind", "K", "delta", "m", "delta_rate", "c_f", "c_delta"});
    const std::string kind = p.string("kind");
    rethrow_as("payoff.kind", [&] { cfg.payoff.kind = payoff_kind_from_string(kind); });
    switch (cfg.payoff.kind) {
    case PayoffKind::GamePut:
    case PayoffKind::GameCall:
        for (const char* k : {"m", "delta_rate", "c_f", "c_delta"})
            if (p.has(k)) throw ConfigError(p.field(k), p.field(k) + " does not apply to " + kind);
        cfg.payoff.strike = p.number("K");
        cfg.payoff.penalty = p.number("delta", std::nullopt, true);
        break;
    case PayoffKind::Russian:
        for (const char* k : {"K", "delta", "c_f", "c_delta"})
            if (p.has(k)) throw ConfigError(p.field(k), p.field(k) + " does not apply to " + kind);
        cfg.payoff.floor = p.number("m");
        cfg.payoff.penalty_rate = p.number("delta_rate");
        break;
    case PayoffKind::IntegralPut:
    case PayoffKind::IntegralCall:
        for (const char* k : {"delta", "m", "delta_rate"})
            if (p.has(k)) throw ConfigError(p.field(k), p.field(k) + " does not apply to " + kind);
        cfg.payoff.strike = p.number("K");
        cfg.payoff.integrand_rate = p.number("c_f");
        cfg.payoff.penalty_integrand_rate = p.number("c_delta");
        break;
    }

    if (root.has("n") && root.has("n_list")) throw ConfigError("n_list", "give either 'n' or 'n_list', not both");
    if (root.has("n")) {
        cfg.n_list = {checked_int(root.integer("n", 0), "n", 1)};
        cfg.single_n = true;
    } else if (root.has("n_list")) {
        const json& list = root.raw("n_list");
        if (!list.is_array() || list.empty()) throw ConfigError("n_list", "n_list must be a nonempty array");
        for (const auto& v : list) cfg.n_list.push_back(checked_int(Section::integer_value(v, "n_list"), "n_list", 1));
        cfg.single_n = false;
    }

    if (root.has("x")) cfg.x = root.number("x");

    if (root.has("grid")) {
        const Section g(root.raw("grid"), "grid", {"M", "M_u", "refinement"});
        cfg.grid.M = checked_int(g.integer("M", cfg.grid.M), "grid.M", 2);
        cfg.grid.M_u = checked_int(g.integer("M_u", cfg.grid.M_u), "grid.M_u", 2);
        cfg.grid.refinement = checked_int(g.integer("refinement", cfg.grid.refinement), "grid.refinement", 0);
    }

    if (root.has("sim")) {
        const Section s(root.raw("sim"), "sim", {"paths", "dt_divisor", "seed", "bridge", "candidates"});
        cfg.sim.paths = static_cast<std::size_t>(
            checked_int(s.integer("paths", static_cast<long long>(cfg.sim.paths)), "sim.paths", 1));
        cfg.sim.dt_divisor = checked_int(s.integer("dt_divisor", cfg.sim.dt_divisor), "sim.dt_divisor", 2);
        if (s.has("seed")) {
            const json& v = s.raw("seed");
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
                throw ConfigError("sim.seed", "sim.seed must be a nonnegative integer");
            cfg.sim.seed = v.get<std::uint64_t>();
        }
        cfg.sim.bridge = s.boolean("bridge", cfg.sim.bridge);
        if (s.has("candidates")) {
            const Section c(s.raw("candidates"), "sim.candidates",
                            {"buyer_rule", "deterministic", "barrier_time", "theta"});
            cfg.sim.candidates.buyer_rule = c.boolean("buyer_rule", true);
            cfg.sim.candidates.deterministic = c.boolean("deterministic", true);
            cfg.sim.candidates.barrier_time = c.boolean("barrier_time", true);
            cfg.sim.candidates.theta = c.boolean("theta", true);
        }
    }

    if (root.has("convention")) {
        const std::string c = root.string("convention");
        rethrow_as("convention", [&] { cfg.convention = convention_from_string(c); });
    }

    if (root.has("widen")) {
        const Section w(root.raw("widen"), "widen", {"mode", "beta"});
        const std::string m = w.string("mode", std::string("off"));
        if (m == "off")
            cfg.widen.mode = WidenMode::Off;
        else if (m == "knock-out")
            cfg.widen.mode = WidenMode::KnockOut;
        else if (m == "knock-in")
            cfg.widen.mode = WidenMode::KnockIn;
        else
            throw ConfigError("widen.mode", "widen.mode must be off, knock-out or knock-in");
        cfg.widen.beta = w.number("beta", 0.0);
    }

    if (root.has("mode")) {
        const std::string m = root.string("mode");
        rethrow_as("mode", [&] { cfg.mode = tree_mode_from_string(m); });
    }
    cfg.european = root.boolean("european", false);

    validate_config(cfg);
    return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["model"] = {{"s0", cfg.model.s0}, {"r", cfg.model.r},         {"mu", cfg.model.mu},
                  {"kappa", cfg.model.kappa}, {"T", cfg.model.T}, {"b0", cfg.model.b0}};
    j["barrier"] = {{"L", cfg.barrier.lower},
                    {"direction", cfg.barrier.direction == BarrierDirection::KnockOut ? "knock-out" : "knock-in"}};
    j["barrier"]["R"] = cfg.barrier.upper ? json(*cfg.barrier.upper) : json("inf");

    json p;
    p["kind"] = to_string(cfg.payoff.kind);
    switch (cfg.payoff.kind) {
    case PayoffKind::GamePut:
    case PayoffKind::GameCall:
        p["K"] = cfg.payoff.strike;
        p["delta"] = std::isinf(cfg.payoff.penalty) ? json("inf") : json(cfg.payoff.penalty);
        break;
    case PayoffKind::Russian:
        p["m"] = cfg.payoff.floor;
        p["delta_rate"] = cfg.payoff.penalty_rate;
        break;
    case PayoffKind::IntegralPut:
    case PayoffKind::IntegralCall:
        p["K"] = cfg.payoff.strike;
        p["c_f"] = cfg.payoff.integrand_rate;
        p["c_delta"] = cfg.payoff.penalty_integrand_rate;
        break;
    }
    j["payoff"] = p;

    if (cfg.single_n && cfg.n_list.size() == 1)
        j["n"] = cfg.n_list.front();
    else
        j["n_list"] = cfg.n_list;
    if (cfg.x) j["x"] = *cfg.x;
    j["grid"] = {{"M", cfg.grid.M}, {"M_u", cfg.grid.M_u}, {"refinement", cfg.grid.refinement}};
    j["sim"] = {{"paths", cfg.sim.paths},
                {"dt_divisor", cfg.sim.dt_divisor},
                {"seed", cfg.sim.seed},
                {"bridge", cfg.sim.bridge},
                {"candidates",
                 {{"buyer_rule", cfg.sim.candidates.buyer_rule},
                  {"deterministic", cfg.sim.candidates.deterministic},
                  {"barrier_time", cfg.sim.candidates.barrier_time},
                  {"theta", cfg.sim.candidates.theta}}}};
    if (cfg.convention) j["convention"] = to_string(*cfg.convention);
    j["widen"] = {{"mode", to_string(cfg.widen.mode)}, {"beta", cfg.widen.beta}};
    if (cfg.mode) j["mode"] = to_string(*cfg.mode);
    j["european"] = cfg.european;
    return j;
}

std::string emit_config(const ExperimentConfig& cfg) { return config_to_json(cfg).dump(2); }

}  // namespace gbar
