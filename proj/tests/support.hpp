#pragma once

// Shared fixtures and independent oracles for the test suites.

#include "gbar/dynkin.hpp"
#include "gbar/lattice.hpp"
#include "gbar/payoffs.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace gbar::fixtures {

inline MarketModel one_step_model() {
    MarketModel m;
    m.s0 = 100.0;
    m.r = 0.0;
    m.mu = 0.0;
    m.kappa = std::log(1.1);
    m.T = 1.0;
    return m;
}

inline MarketModel standard_model() {
    MarketModel m;
    m.s0 = 100.0;
    m.r = 0.02;
    m.mu = 0.05;
    m.kappa = 0.25;
    m.T = 1.0;
    return m;
}

inline BarrierSpec double_barrier(BarrierDirection dir, double lo = 85.0, double hi = 125.0) {
    return BarrierSpec{lo, hi, dir};
}

/// Sign vector of path index `idx` at depth n (first move is the most significant bit).
inline std::vector<int> signs_of(std::uint64_t idx, int n) {
    std::vector<int> s(n);
    for (int i = 0; i < n; ++i) s[i] = (idx >> (n - 1 - i)) & 1U ? 1 : -1;
    return s;
}

inline double path_probability(const std::vector<int>& signs, double up) {
    double pr = 1.0;
    for (int s : signs) pr *= s > 0 ? up : 1.0 - up;
    return pr;
}

/// Game value by direct recursion over sign prefixes, reading the gated payoffs
/// from gated_discounted on a padded full path. Shares no code with the solvers
/// beyond the payoff definitions.
class OracleGame {
public:
    OracleGame(const MarketModel& model, int n, const PayoffFamily& family, const BarrierSpec& barrier,
               Convention conv)
        : sp_(step_params(model, n)), family_(family), barrier_(barrier), conv_(conv) {}

    double value() {
        std::vector<int> prefix;
        return visit(prefix, false);
    }
    double european() {
        std::vector<int> prefix;
        return visit(prefix, true);
    }

private:
    StepParams sp_;
    PayoffFamily family_;
    BarrierSpec barrier_;
    Convention conv_;

    double visit(std::vector<int>& prefix, bool european) {
        const int k = static_cast<int>(prefix.size());
        std::vector<int> full = prefix;
        full.resize(sp_.n, 1);
        const GatedPayoffs g = gated_discounted(family_, sp_, full, barrier_);
        const double y = g.y_tilde[k];
        if (k == sp_.n) return y;
        prefix.push_back(1);
        const double up = visit(prefix, european);
        prefix.back() = -1;
        const double dn = visit(prefix, european);
        prefix.pop_back();
        const double cont = sp_.p_tilde * up + (1.0 - sp_.p_tilde) * dn;
        if (european) return cont;
        // Seller leg at k for a cancellation now and exercise later (s = k < k + 1).
        const double x = dynkin_kernel(g, k, k + 1 > sp_.n ? sp_.n : k + 1, conv_);
        return std::min(x, std::max(y, cont));
    }
};

/// Standard payoff battery (recombining families).
inline std::vector<PayoffFamily> markov_families() {
    return {PayoffFamily::game_put(100.0, 5.0), PayoffFamily::game_call(100.0, 5.0),
            PayoffFamily::russian(100.0, 0.05)};
}

}  // namespace gbar::fixtures
