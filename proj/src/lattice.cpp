#include "gbar/lattice.hpp"

#include "gbar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gbar {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

}  // namespace

void MarketModel::validate() const {
    if (!positive_finite(s0)) throw std::invalid_argument("model: s0 must be > 0");
    if (!positive_finite(kappa)) throw std::invalid_argument("model: kappa must be > 0");
    if (!positive_finite(T)) throw std::invalid_argument("model: T must be > 0");
    if (!positive_finite(b0)) throw std::invalid_argument("model: b0 must be > 0");
    if (!std::isfinite(r)) throw std::invalid_argument("model: r must be finite");
    if (!std::isfinite(mu)) throw std::invalid_argument("model: mu must be finite");
}

StepParams step_params(const MarketModel& model, int n) {
    model.validate();
    if (n < 1) throw std::invalid_argument("step count must be >= 1, got " + std::to_string(n));

    StepParams sp;
    sp.n = n;
    sp.s0 = model.s0;
    sp.b0 = model.b0;
    sp.dt = model.T / n;
    sp.h = std::sqrt(sp.dt);
    sp.log_drift = model.r * sp.dt;
    sp.log_vol = model.kappa * sp.h;
    sp.r_n = std::expm1(sp.log_drift);
    sp.a1 = std::expm1(sp.log_vol);
    sp.a2 = std::expm1(-sp.log_vol);
    sp.rho_up = std::expm1(sp.log_drift + sp.log_vol);
    sp.rho_dn = std::expm1(sp.log_drift - sp.log_vol);
    sp.p = 1.0 / (std::exp((model.kappa - 2.0 * model.mu / model.kappa) * sp.h) + 1.0);
    sp.p_tilde = 1.0 / (std::exp(sp.log_vol) + 1.0);
    return sp;
}

double StepParams::price(int step, int level) const {
    return s0 * std::exp(log_drift * step + log_vol * level);
}

double StepParams::discounted_price(int level) const { return s0 * std::exp(log_vol * level); }

double StepParams::discount(int step) const { return std::exp(-log_drift * step); }

PricePath prices_along(const StepParams& sp, std::span<const int> signs) {
    if (static_cast<int>(signs.size()) > sp.n)
        throw std::invalid_argument("sign prefix longer than the step count");
    PricePath out;
    out.prices.reserve(signs.size() + 1);
    out.discounted.reserve(signs.size() + 1);
    int level = 0;
    out.prices.push_back(sp.price(0, 0));
    out.discounted.push_back(sp.discounted_price(0));
    for (std::size_t i = 0; i < signs.size(); ++i) {
        if (signs[i] != 1 && signs[i] != -1) throw std::invalid_argument("signs must be +1 or -1");
        level += signs[i];
        out.prices.push_back(sp.price(static_cast<int>(i) + 1, level));
        out.discounted.push_back(sp.discounted_price(level));
    }
    return out;
}

void BarrierSpec::validate() const {
    if (!(lower >= 0.0) || !std::isfinite(lower))
        throw std::invalid_argument("barrier: L must be finite and >= 0");
    if (upper) {
        if (std::isnan(*upper)) throw std::invalid_argument("barrier: R is NaN");
        if (!(lower < *upper)) throw std::invalid_argument("barrier: L < R violated");
    }
}

std::optional<int> barrier_exit_index(std::span<const double> prices, const BarrierSpec& barrier) {
    for (std::size_t k = 0; k < prices.size(); ++k)
        if (!barrier.contains(prices[k])) return static_cast<int>(k);
    return std::nullopt;
}

LatticeState advance(const StepParams& sp, Reduction reduction, const LatticeState& state,
                     int step, int sign) {
    LatticeState next = state;
    next.level += sign;
    if (reduction == Reduction::LevelMax) {
        const double candidate = sp.price(step + 1, next.level);
        if (candidate > sp.price(state.max_step, state.max_level)) {
            next.max_step = sp.log_drift == 0.0 ? 0 : step + 1;
            next.max_level = next.level;
        }
    }
    return next;
}

std::vector<LatticeState> state_space(const StepParams& sp, Reduction reduction, int k) {
    if (reduction == Reduction::None)
        throw NotMarkovReducible("running-integral payoffs do not recombine; use the path tree");
    if (k < 0 || k > sp.n) throw std::invalid_argument("state_space: step out of range");

    std::vector<LatticeState> level{LatticeState{}};
    for (int step = 0; step < k; ++step) {
        std::vector<LatticeState> next;
        next.reserve(level.size() * 2);
        for (const auto& s : level) {
            next.push_back(advance(sp, reduction, s, step, -1));
            next.push_back(advance(sp, reduction, s, step, +1));
        }
        std::sort(next.begin(), next.end());
        next.erase(std::unique(next.begin(), next.end()), next.end());
        level = std::move(next);
    }
    return level;
}

}  // namespace gbar
