#include "gbar/embedding.hpp"

#include "gbar/game_tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <thread>

namespace gbar {

std::string to_string(Measure m) { return m == Measure::Objective ? "objective" : "martingale"; }

double drift(const MarketModel& model, Measure m) {
    return m == Measure::Objective ? model.objective_drift() : model.martingale_drift();
}

double EmbeddingConfig::dt(const MarketModel& model) const {
    return model.T / n / dt_divisor;
}

void EmbeddingConfig::validate() const {
    if (n < 1) throw std::invalid_argument("embedding: n must be >= 1");
    if (dt_divisor < 2)
        throw std::invalid_argument("embedding: dt must be smaller than T/n (dt_divisor >= 2)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Probability that a Brownian bridge from x0 to x1 over dt touches +h or -h.
struct BridgeProbs {
    double up;
    double dn;
};

BridgeProbs bridge_probs(double x0, double x1, double h, double dt) {
    return {std::exp(-2.0 * (h - x0) * (h - x1) / dt), std::exp(-2.0 * (h + x0) * (h + x1) / dt)};
}

constexpr double kNegligible = 1e-14;

// Excursion test for one grid step; returns 0, +1 or -1 and the crossing time.
struct StepExit {
    int sign = 0;
    double time = 0.0;
};

template <class Rng>
StepExit detect_exit(double x0, double x1, double h, double t0, double dt, bool bridge, Rng& rng) {
    if (std::abs(x1) >= h) {
        const int sign = x1 > 0.0 ? 1 : -1;
        const double level = sign * h;
        const double frac = std::clamp((level - x0) / (x1 - x0), 0.0, 1.0);
        return {sign, t0 + frac * dt};
    }
    if (!bridge) return {};
    const BridgeProbs pr = bridge_probs(x0, x1, h, dt);
    if (pr.up + pr.dn < kNegligible) return {};
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double u = unif(rng);
    if (u < pr.up) return {1, t0 + 0.5 * dt};
    if (u < pr.up + pr.dn) return {-1, t0 + 0.5 * dt};
    return {};
}

}  // namespace

std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

EmbeddedPath simulate_path(const MarketModel& model, const EmbeddingConfig& cfg, std::uint64_t seed,
                           std::uint64_t index) {
    cfg.validate();
    model.validate();
    const int steps = cfg.n * cfg.dt_divisor;
    const double dt = cfg.dt(model);
    const double sd = std::sqrt(dt);
    const double h = std::sqrt(model.T / cfg.n);
    const double m = drift(model, cfg.measure);

    std::mt19937_64 rng(path_seed(seed, index));
    std::normal_distribution<double> normal(0.0, 1.0);

    EmbeddedPath p;
    p.dt = dt;
    p.b.resize(steps + 1);
    p.b[0] = 0.0;
    p.theta.push_back(0.0);
    p.anchors.push_back(0.0);
    int level = 0;
    for (int i = 1; i <= steps; ++i) {
        p.b[i] = p.b[i - 1] + m * dt + sd * normal(rng);
        if (static_cast<int>(p.signs.size()) >= cfg.n) continue;
        const double anchor = p.anchors.back();
        const StepExit ex =
            detect_exit(p.b[i - 1] - anchor, p.b[i] - anchor, h, (i - 1) * dt, dt, cfg.bridge, rng);
        if (ex.sign == 0) continue;
        level += ex.sign;
        p.signs.push_back(ex.sign);
        p.theta.push_back(std::max(ex.time, std::nextafter(p.theta.back(), 1e300)));
        p.anchors.push_back(level * h);
    }
    return p;
}

std::vector<EmbeddedPath> simulate_embedding(const MarketModel& model, const EmbeddingConfig& cfg,
                                             std::size_t paths, std::uint64_t seed) {
    std::vector<EmbeddedPath> out;
    out.reserve(paths);
    for (std::size_t i = 0; i < paths; ++i) out.push_back(simulate_path(model, cfg, seed, i));
    return out;
}

Estimate summarize_samples(std::span<const double> samples) {
    Estimate e;
    e.count = samples.size();
    if (samples.empty()) return e;
    auto neumaier = [&](auto term) {
        double sum = 0.0, comp = 0.0;
        for (double x : samples) {
            const double v = term(x);
            const double t = sum + v;
            if (std::abs(sum) >= std::abs(v))
                comp += (sum - t) + v;
            else
                comp += (v - t) + sum;
            sum = t;
        }
        return sum + comp;
    };
    e.mean = neumaier([](double x) { return x; }) / static_cast<double>(e.count);
    if (e.count > 1) {
        const double mean = e.mean;
        const double ss = neumaier([mean](double x) { return (x - mean) * (x - mean); });
        e.std_err = std::sqrt(ss / static_cast<double>(e.count - 1) / static_cast<double>(e.count));
    }
    return e;
}

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers =
        std::min<std::size_t>(count, static_cast<std::size_t>(std::max(threads, 1)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    const std::size_t block = (count + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t lo = w * block;
        const std::size_t hi = std::min(count, lo + block);
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

ExitStatistics embedding_statistics(const MarketModel& model, const EmbeddingConfig& cfg,
                                    std::size_t paths, std::uint64_t seed, int threads) {
    cfg.validate();
    model.validate();
    const int steps = cfg.n * cfg.dt_divisor;
    const double dt = cfg.dt(model);
    const double sd = std::sqrt(dt);
    const double h = std::sqrt(model.T / cfg.n);
    const double m = drift(model, cfg.measure);

    std::vector<double> up(paths), theta1(paths), terminal(paths);
    parallel_for(paths, threads, [&](std::size_t idx) {
        std::mt19937_64 rng(path_seed(seed, idx));
        std::normal_distribution<double> normal(0.0, 1.0);
        double b = 0.0;
        double b_T = 0.0;
        bool have_terminal = false;
        for (long i = 1;; ++i) {
            const double prev = b;
            b += m * dt + sd * normal(rng);
            if (i == steps) {
                b_T = b;
                have_terminal = true;
            }
            const StepExit ex = detect_exit(prev, b, h, (i - 1) * dt, dt, cfg.bridge, rng);
            if (ex.sign == 0) continue;
            up[idx] = ex.sign > 0 ? 1.0 : 0.0;
            theta1[idx] = ex.time;
            if (!have_terminal) {
                const double rest = model.T - i * dt;
                b_T = b + m * rest + std::sqrt(rest) * normal(rng);
            }
            break;
        }
        terminal[idx] = model.s0 * std::exp(model.kappa * b_T);
    });
    return {summarize_samples(up), summarize_samples(theta1), summarize_samples(terminal)};
}

double map_stopping(int k, const EmbeddedPath& path, const MarketModel& model, int n) {
    if (k >= n || k >= static_cast<int>(path.theta.size())) return model.T;
    return std::min(model.T, path.theta[k]);
}

PortfolioTrajectory map_strategy(const HedgeStrategy& strategy, const EmbeddedPath& path,
                                 const MarketModel& model) {
    const GameTree& tree = *strategy.tree;
    const int n = tree.steps();
    const PortfolioPath pp = replay(strategy, path.signs);
    PortfolioTrajectory tr;
    tr.n = n;
    tr.kappa = model.kappa;
    tr.s0 = model.s0;
    tr.path = &path;
    tr.theta = path.theta;
    tr.value = pp.value;
    tr.gamma = pp.gamma;
    tr.cancel_index = pp.cancel_index;
    const int m = static_cast<int>(path.signs.size());
    for (int k = 0; k <= m; ++k) tr.s_disc.push_back(model.s0 * std::exp(model.kappa * path.anchors[k]));
    if (m < n) {
        const int idx = tree.locate(path.signs);
        const bool cancelled = pp.cancel_index <= m;
        const double alpha = cancelled && strategy.liquidate_after_cancel
                                 ? 0.0
                                 : strategy.position(m, idx, pp.value.back());
        tr.gamma.push_back(alpha / tree.node(m, idx).s_disc);
    }
    return tr;
}

double PortfolioTrajectory::value_at(double t) const {
    const auto it = std::upper_bound(theta.begin(), theta.end(), t);
    const int k = static_cast<int>(it - theta.begin()) - 1;
    if (k >= n || t == theta[k]) return value[k];
    const auto j = std::min(path->b.size() - 1, static_cast<std::size_t>(t / path->dt + 1e-9));
    const double s_t = s0 * std::exp(kappa * path->b[j]);
    return value[k] + gamma[k] * (s_t - s_disc[k]);
}

PathPayoffs::PathPayoffs(const MarketModel& model, const PayoffFamily& family,
                         const BarrierSpec& barrier, const EmbeddedPath& path)
    : model_(model), family_(family), barrier_(barrier), path_(path) {
    const std::size_t size = path.b.size();
    const double log_s0 = std::log(model.s0);
    const double log_l = barrier.lower > 0.0 ? std::log(barrier.lower)
                                             : -std::numeric_limits<double>::infinity();
    const double log_r = barrier.upper ? std::log(*barrier.upper)
                                       : std::numeric_limits<double>::infinity();
    const bool need_integral =
        family.kind == PayoffKind::IntegralPut || family.kind == PayoffKind::IntegralCall;
    log_price_.resize(size);
    running_max_log_.resize(size);
    if (need_integral) integral_.assign(size, 0.0);
    exit_time_ = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < size; ++j) {
        const double lp = log_s0 + model.r * (j * path.dt) + model.kappa * path.b[j];
        log_price_[j] = lp;
        running_max_log_[j] = j == 0 ? lp : std::max(running_max_log_[j - 1], lp);
        if (need_integral && j > 0)
            integral_[j] = integral_[j - 1] + std::exp(log_price_[j - 1]) * path.dt;
        if (exit_index_ < 0 && (lp <= log_l || lp >= log_r)) {
            exit_index_ = static_cast<int>(j);
            exit_time_ = j * path.dt;
        }
    }
}

std::size_t PathPayoffs::grid_index(double t) const {
    return std::min(log_price_.size() - 1, static_cast<std::size_t>(t / path_.dt + 1e-9));
}

Intrinsic PathPayoffs::at(double t) const {
    const std::size_t j = grid_index(t);
    PathSummary s;
    s.spot = std::exp(log_price_[j]);
    s.running_max = std::exp(running_max_log_[j]);
    if (!integral_.empty()) s.integral = integral_[j] + s.spot * std::max(0.0, t - j * path_.dt);
    return evaluate(family_, s);
}

double PathPayoffs::discounted(double s, double t, Convention convention) const {
    const double u = std::min(s, t);
    const bool crossed = exit_index_ >= 0 && static_cast<std::size_t>(exit_index_) <= grid_index(u);
    const double disc = std::exp(-model_.r * u);
    const Intrinsic v = at(u);
    if (t <= s) return buyer_leg(barrier_.direction, crossed, disc * v.F);
    return seller_leg(barrier_.direction, convention, crossed, disc * v.G);
}

double bs_discounted_payoff(const MarketModel& model, const PayoffFamily& family,
                            const BarrierSpec& barrier, const EmbeddedPath& path, double s,
                            double t, Convention convention) {
    return PathPayoffs(model, family, barrier, path).discounted(s, t, convention);
}

ShortfallEstimate estimate_shortfall_mc(const MarketModel& model, const HedgeStrategy& strategy,
                                        const PayoffFamily& family, const BarrierSpec& barrier,
                                        Convention convention, const BuyerRule& buyer_rule,
                                        const MonteCarloConfig& cfg) {
    if (!strategy.tree) throw std::invalid_argument("estimate_shortfall_mc: strategy has no tree");
    const int n = strategy.tree->steps();
    EmbeddingConfig ecfg{n, Measure::Objective, cfg.dt_divisor, cfg.bridge};
    ecfg.validate();

    // Candidate buyer times as functions of the path.
    using TimeFn = std::function<double(const EmbeddedPath&, const PathPayoffs&)>;
    std::vector<std::pair<std::string, TimeFn>> cands;
    if (cfg.candidates.buyer_rule && buyer_rule)
        cands.emplace_back("tau_star", [&](const EmbeddedPath& p, const PathPayoffs&) {
            return map_stopping(buyer_rule(p.signs), p, model, n);
        });
    if (cfg.candidates.deterministic)
        for (int j = 0; j <= 10; ++j) {
            const double t = model.T * j / 10.0;
            cands.emplace_back("fixed_" + std::to_string(j) + "/10",
                               [t](const EmbeddedPath&, const PathPayoffs&) { return t; });
        }
    if (cfg.candidates.barrier_time)
        cands.emplace_back("barrier_exit", [&](const EmbeddedPath&, const PathPayoffs& pay) {
            return std::min(model.T, pay.exit_time());
        });
    if (cfg.candidates.theta) {
        std::vector<int> ks{1, n / 4, n / 2, 3 * n / 4, n};
        std::sort(ks.begin(), ks.end());
        ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
        for (int k : ks) {
            if (k < 1) continue;
            cands.emplace_back("theta_" + std::to_string(k), [&, k](const EmbeddedPath& p, const PathPayoffs&) {
                return k < static_cast<int>(p.theta.size()) ? std::min(model.T, p.theta[k]) : model.T;
            });
        }
    }
    if (cands.empty()) throw std::invalid_argument("estimate_shortfall_mc: empty candidate set");

    const std::size_t nc = cands.size();
    std::vector<double> results(cfg.paths * nc);
    parallel_for(cfg.paths, cfg.threads, [&](std::size_t i) {
        const EmbeddedPath path = simulate_path(model, ecfg, cfg.seed, i);
        const PortfolioTrajectory traj = map_strategy(strategy, path, model);
        const PathPayoffs pay(model, family, barrier, path);
        const double sigma = map_stopping(traj.cancel_index, path, model, n);
        for (std::size_t c = 0; c < nc; ++c) {
            const double t = cands[c].second(path, pay);
            const double q = pay.discounted(sigma, t, convention);
            const double v = traj.value_at(std::min(sigma, t));
            results[i * nc + c] = std::max(q - v, 0.0);
        }
    });

    ShortfallEstimate out;
    std::vector<double> column(cfg.paths);
    for (std::size_t c = 0; c < nc; ++c) {
        for (std::size_t i = 0; i < cfg.paths; ++i) column[i] = results[i * nc + c];
        out.candidates.push_back({cands[c].first, summarize_samples(column)});
        if (out.candidates[c].estimate.mean > out.candidates[out.argmax].estimate.mean)
            out.argmax = c;
    }
    return out;
}

}  // namespace gbar
