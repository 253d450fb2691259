#pragma once

#include "gbar/lattice.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gbar {

enum class PayoffKind { GamePut, GameCall, Russian, IntegralPut, IntegralCall };

std::string to_string(PayoffKind kind);
PayoffKind payoff_kind_from_string(const std::string& name);

/// A payoff pair (F_t, Delta_t) with G_t = F_t + Delta_t.
///
/// - game put / call:   F = (K - v_t)^+ or (v_t - K)^+,  Delta = penalty
/// - russian:           F = max(floor, sup_{[0,t]} v),   Delta = penalty_rate * v_t
/// - integral put/call: F = (K - c_f I_t)^+ or (c_f I_t - K)^+,  Delta = c_delta I_t,
///                      with I_t = int_0^t v_u du over the piecewise-constant path
///
/// The integral families use the linear integrands f_u(x) = c_f x and
/// delta_u(x) = c_delta x.
struct PayoffFamily {
    PayoffKind kind = PayoffKind::GamePut;
    double strike = 0.0;
    double penalty = 0.0;
    double floor = 0.0;
    double penalty_rate = 0.0;
    double integrand_rate = 0.0;
    double penalty_integrand_rate = 0.0;

    static PayoffFamily game_put(double strike, double penalty);
    static PayoffFamily game_call(double strike, double penalty);
    static PayoffFamily russian(double floor, double penalty_rate);
    static PayoffFamily integral_put(double strike, double c_f, double c_delta);
    static PayoffFamily integral_call(double strike, double c_f, double c_delta);

    void validate() const;
    bool operator==(const PayoffFamily&) const = default;

    /// Constant L >= 1 for which the family satisfies
    ///   |F_s(v) - F_s(w)| + |D_s(v) - D_s(w)| <= L (s + 1) sup|v - w|
    ///   |F_t(v) - F_s(v)| + |D_t(v) - D_s(v)| <= L (|t - s| (1 + sup|v|) + sup_{[s,t]} |v_u - v_s|).
    double lipschitz_constant() const;

    Reduction reduction() const;
};

/// Sufficient statistics of a piecewise-constant path on [0, t].
struct PathSummary {
    double spot = 0.0;
    double running_max = 0.0;
    double integral = 0.0;
};

struct Intrinsic {
    double F = 0.0;
    double Delta = 0.0;
    double G = 0.0;
};

Intrinsic evaluate(const PayoffFamily& family, const PathSummary& summary);

/// Summary of the lattice path S_0..S_k, each price held for `step_width` time units
/// (left-endpoint rule, exact for the piecewise-constant path).
PathSummary summarize(std::span<const double> prices, double step_width);

/// (F_k, Delta_k, G_k) at the last index of `prices`.
Intrinsic intrinsic(const PayoffFamily& family, std::span<const double> prices, double step_width);

/// Which leg the seller pays on cancellation and how a settlement is discounted.
///  - PerLeg:  each leg carries its own gating and discount.
///  - MinTime: the seller leg is the ungated G, discounted at s ^ k.
/// For knock-in options the seller leg is ungated under both conventions.
enum class Convention { PerLeg, MinTime };

std::string to_string(Convention c);
Convention convention_from_string(const std::string& name);
Convention default_convention(BarrierDirection dir);

/// Barrier-gated payoffs along a full lattice path.
struct GatedPayoffs {
    BarrierDirection direction = BarrierDirection::KnockOut;
    std::optional<int> tau;         ///< first exit index, if any
    std::vector<double> discount;   ///< (1 + r_n)^{-k}
    std::vector<double> y;          ///< gated buyer payoff (undiscounted)
    std::vector<double> x;          ///< seller payoff: gated for knock-out, ungated for knock-in
    std::vector<double> x_ungated;  ///< G_k
    std::vector<double> y_tilde;    ///< discounted y
    std::vector<double> x_tilde;    ///< discounted x
};

GatedPayoffs gated_discounted(const PayoffFamily& family, const StepParams& sp,
                              std::span<const int> signs, const BarrierSpec& barrier);

/// Discounted settlement when the seller cancels at s and the buyer exercises at k.
/// Ties go to the buyer leg.
double dynkin_kernel(const GatedPayoffs& g, int s, int k, Convention convention);

}  // namespace gbar
