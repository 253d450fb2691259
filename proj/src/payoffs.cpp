#include "gbar/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gbar {

std::string to_string(PayoffKind kind) {
    switch (kind) {
        case PayoffKind::GamePut: return "game-put";
        case PayoffKind::GameCall: return "game-call";
        case PayoffKind::Russian: return "russian";
        case PayoffKind::IntegralPut: return "integral-put";
        case PayoffKind::IntegralCall: return "integral-call";
    }
    return "unknown";
}

PayoffKind payoff_kind_from_string(const std::string& name) {
    for (auto k : {PayoffKind::GamePut, PayoffKind::GameCall, PayoffKind::Russian,
                   PayoffKind::IntegralPut, PayoffKind::IntegralCall})
        if (to_string(k) == name) return k;
    throw std::invalid_argument("unknown payoff kind '" + name + "'");
}

PayoffFamily PayoffFamily::game_put(double strike, double penalty) {
    PayoffFamily f;
    f.kind = PayoffKind::GamePut;
    f.strike = strike;
    f.penalty = penalty;
    return f;
}

PayoffFamily PayoffFamily::game_call(double strike, double penalty) {
    PayoffFamily f = game_put(strike, penalty);
    f.kind = PayoffKind::GameCall;
    return f;
}

PayoffFamily PayoffFamily::russian(double floor, double penalty_rate) {
    PayoffFamily f;
    f.kind = PayoffKind::Russian;
    f.floor = floor;
    f.penalty_rate = penalty_rate;
    return f;
}

PayoffFamily PayoffFamily::integral_put(double strike, double c_f, double c_delta) {
    PayoffFamily f;
    f.kind = PayoffKind::IntegralPut;
    f.strike = strike;
    f.integrand_rate = c_f;
    f.penalty_integrand_rate = c_delta;
    return f;
}

PayoffFamily PayoffFamily::integral_call(double strike, double c_f, double c_delta) {
    PayoffFamily f = integral_put(strike, c_f, c_delta);
    f.kind = PayoffKind::IntegralCall;
    return f;
}

void PayoffFamily::validate() const {
    auto nonneg = [](double v, const char* name) {
        if (std::isnan(v) || v < 0.0)
            throw std::invalid_argument(std::string("payoff: ") + name + " must be >= 0");
    };
    auto finite = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string("payoff: ") + name + " must be finite");
    };
    nonneg(strike, "K");
    finite(strike, "K");
    // An infinite constant penalty is allowed: it turns the game into an American option.
    nonneg(penalty, "delta");
    nonneg(floor, "m");
    finite(floor, "m");
    nonneg(penalty_rate, "delta_rate");
    finite(penalty_rate, "delta_rate");
    nonneg(integrand_rate, "c_f");
    finite(integrand_rate, "c_f");
    nonneg(penalty_integrand_rate, "c_delta");
    finite(penalty_integrand_rate, "c_delta");
}

double PayoffFamily::lipschitz_constant() const {
    switch (kind) {
        case PayoffKind::GamePut:
        case PayoffKind::GameCall: return 1.0;
        case PayoffKind::Russian: return 1.0 + penalty_rate;
        case PayoffKind::IntegralPut:
        case PayoffKind::IntegralCall:
            return std::max(1.0, integrand_rate + penalty_integrand_rate);
    }
    return 1.0;
}

Reduction PayoffFamily::reduction() const {
    switch (kind) {
        case PayoffKind::GamePut:
        case PayoffKind::GameCall: return Reduction::Level;
        case PayoffKind::Russian: return Reduction::LevelMax;
        default: return Reduction::None;
    }
}

Intrinsic evaluate(const PayoffFamily& family, const PathSummary& summary) {
    Intrinsic out;
    switch (family.kind) {
        case PayoffKind::GamePut:
            out.F = std::max(family.strike - summary.spot, 0.0);
            out.Delta = family.penalty;
            break;
        case PayoffKind::GameCall:
            out.F = std::max(summary.spot - family.strike, 0.0);
            out.Delta = family.penalty;
            break;
        case PayoffKind::Russian:
            out.F = std::max(family.floor, summary.running_max);
            out.Delta = family.penalty_rate * summary.spot;
            break;
        case PayoffKind::IntegralPut:
            out.F = std::max(family.strike - family.integrand_rate * summary.integral, 0.0);
            out.Delta = family.penalty_integrand_rate * summary.integral;
            break;
        case PayoffKind::IntegralCall:
            out.F = std::max(family.integrand_rate * summary.integral - family.strike, 0.0);
            out.Delta = family.penalty_integrand_rate * summary.integral;
            break;
    }
    out.G = out.F + out.Delta;
    return out;
}

PathSummary summarize(std::span<const double> prices, double step_width) {
    if (prices.empty()) throw std::invalid_argument("summarize: empty price path");
    PathSummary s;
    s.spot = prices.back();
    s.running_max = *std::max_element(prices.begin(), prices.end());
    for (std::size_t j = 0; j + 1 < prices.size(); ++j) s.integral += prices[j] * step_width;
    return s;
}

Intrinsic intrinsic(const PayoffFamily& family, std::span<const double> prices, double step_width) {
    return evaluate(family, summarize(prices, step_width));
}

std::string to_string(Convention c) { return c == Convention::PerLeg ? "per-leg" : "min-time"; }

Convention convention_from_string(const std::string& name) {
    if (name == "per-leg") return Convention::PerLeg;
    if (name == "min-time") return Convention::MinTime;
    throw std::invalid_argument("unknown convention '" + name + "'");
}

Convention default_convention(BarrierDirection dir) {
    return dir == BarrierDirection::KnockOut ? Convention::PerLeg : Convention::MinTime;
}

GatedPayoffs gated_discounted(const PayoffFamily& family, const StepParams& sp,
                              std::span<const int> signs, const BarrierSpec& barrier) {
    const PricePath path = prices_along(sp, signs);
    GatedPayoffs g;
    g.direction = barrier.direction;
    g.tau = barrier_exit_index(path.prices, barrier);
    const std::size_t len = path.prices.size();
    g.discount.resize(len);
    g.y.resize(len);
    g.x.resize(len);
    g.x_ungated.resize(len);
    g.y_tilde.resize(len);
    g.x_tilde.resize(len);
    const std::span<const double> all(path.prices);
    for (std::size_t k = 0; k < len; ++k) {
        const Intrinsic v = intrinsic(family, all.first(k + 1), sp.dt);
        const bool crossed = g.tau && static_cast<int>(k) >= *g.tau;
        const bool knock_out = barrier.direction == BarrierDirection::KnockOut;
        g.discount[k] = sp.discount(static_cast<int>(k));
        g.x_ungated[k] = v.G;
        if (knock_out) {
            g.y[k] = crossed ? 0.0 : v.F;
            g.x[k] = crossed ? 0.0 : v.G;
        } else {
            g.y[k] = crossed ? v.F : 0.0;
            g.x[k] = v.G;
        }
        g.y_tilde[k] = g.discount[k] * g.y[k];
        g.x_tilde[k] = g.discount[k] * g.x[k];
    }
    return g;
}

double dynkin_kernel(const GatedPayoffs& g, int s, int k, Convention convention) {
    const int last = static_cast<int>(g.y.size()) - 1;
    if (s < 0 || k < 0 || s > last || k > last)
        throw std::invalid_argument("dynkin_kernel: stopping index out of range");
    if (k <= s) return g.y_tilde[k];
    if (convention == Convention::PerLeg) return g.x_tilde[s];
    return g.discount[std::min(s, k)] * g.x_ungated[s];
}

}  // namespace gbar
