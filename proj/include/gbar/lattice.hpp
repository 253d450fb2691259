#pragma once

#include <optional>
#include <span>
#include <vector>

namespace gbar {

/// Black-Scholes market: bond b_t = b0 e^{rt}, stock S_t = s0 e^{rt + kappa B*_t}
/// with B*_t = (mu/kappa - kappa/2) t + B_t.
struct MarketModel {
    double s0 = 100.0;
    double r = 0.0;
    double mu = 0.0;
    double kappa = 0.2;
    double T = 1.0;
    double b0 = 1.0;

    /// Throws std::invalid_argument unless s0, kappa, T, b0 are positive and finite.
    void validate() const;
    bool operator==(const MarketModel&) const = default;

    /// Drift of B* under the objective measure.
    double objective_drift() const { return mu / kappa - kappa / 2.0; }
    /// Drift of B* under the martingale measure.
    double martingale_drift() const { return -kappa / 2.0; }
};

/// Per-step quantities of the n-step CRR market approximating a MarketModel.
struct StepParams {
    int n = 0;
    double s0 = 0.0;
    double b0 = 1.0;
    double dt = 0.0;       ///< T / n
    double h = 0.0;        ///< sqrt(T / n)
    double r_n = 0.0;      ///< e^{rT/n} - 1
    double a1 = 0.0;       ///< e^{kappa h} - 1, discounted up return
    double a2 = 0.0;       ///< e^{-kappa h} - 1, discounted down return
    double rho_up = 0.0;   ///< e^{rT/n + kappa h} - 1
    double rho_dn = 0.0;   ///< e^{rT/n - kappa h} - 1
    double p = 0.0;        ///< objective up-probability
    double p_tilde = 0.0;  ///< martingale up-probability
    double log_drift = 0.0;  ///< rT/n
    double log_vol = 0.0;    ///< kappa h

    /// Undiscounted price after `step` moves with signed sum `level`.
    /// Computed from the exponent sum so equal (step, level) pairs agree bitwise.
    double price(int step, int level) const;
    /// Discounted price s0 e^{kappa h level}.
    double discounted_price(int level) const;
    /// (1 + r_n)^{-step}.
    double discount(int step) const;
};

StepParams step_params(const MarketModel& model, int n);

/// Undiscounted and discounted prices along a sign prefix xi_1..xi_k.
struct PricePath {
    std::vector<double> prices;
    std::vector<double> discounted;
};

/// Signs must be +1 or -1; the prefix may not be longer than sp.n.
PricePath prices_along(const StepParams& sp, std::span<const int> signs);

enum class BarrierDirection { KnockOut, KnockIn };

/// Open interval (L, R) with R = +inf represented by an empty optional.
struct BarrierSpec {
    double lower = 0.0;
    std::optional<double> upper;
    BarrierDirection direction = BarrierDirection::KnockOut;

    static BarrierSpec none(BarrierDirection dir = BarrierDirection::KnockOut) {
        return BarrierSpec{0.0, std::nullopt, dir};
    }

    void validate() const;
    bool operator==(const BarrierSpec&) const = default;
    bool contains(double price) const {
        return price > lower && (!upper || price < *upper);
    }
    bool is_unbounded() const { return lower == 0.0 && !upper; }
};

/// Smallest k with prices[k] outside the open interval, or nullopt.
std::optional<int> barrier_exit_index(std::span<const double> prices, const BarrierSpec& barrier);

/// How much path information a payoff family needs at each lattice node.
enum class Reduction {
    Level,     ///< spot only (put / call)
    LevelMax,  ///< spot and running maximum (Russian)
    None,      ///< full path (integral families); path tree only
};

/// A recombining lattice state. For LevelMax, the running maximum is identified by
/// the node (max_step, max_level) where it was attained; when r = 0 the step is
/// irrelevant and is canonicalised to 0, so the key reduces to the maximal partial sum.
struct LatticeState {
    int level = 0;
    int max_step = 0;
    int max_level = 0;

    auto operator<=>(const LatticeState&) const = default;
};

/// Successor of `state` at `step` after one move of sign `sign`.
LatticeState advance(const StepParams& sp, Reduction reduction, const LatticeState& state,
                     int step, int sign);

/// Reachable recombining states after k steps, sorted. Throws NotMarkovReducible
/// for Reduction::None.
std::vector<LatticeState> state_space(const StepParams& sp, Reduction reduction, int k);

}  // namespace gbar
