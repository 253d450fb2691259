#pragma once

#include "gbar/dynkin.hpp"
#include "gbar/shortfall.hpp"

#include <functional>
#include <optional>
#include <utility>
#include <vector>

namespace gbar {

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares of log(error) on log(n). Needs >= 2 pairs with distinct n
/// and strictly positive errors.
RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs);

struct ConvergenceOptions {
    TreeMode mode = TreeMode::Recombining;
    std::optional<Convention> convention;
    bool european = false;            ///< also report the European (maturity-only) value
    std::optional<double> capital;    ///< also report the shortfall risk at this x
    GridConfig grid;
    /// Barrier used at step count n (e.g. a widening schedule); identity when empty.
    std::function<BarrierSpec(const BarrierSpec&, int)> barrier_at;
};

struct ConvergenceRow {
    int n = 0;
    double value = 0.0;
    std::optional<double> european;
    std::optional<double> risk;
    std::optional<double> abs_diff_prev;  ///< |V_n - V_prev|
    std::optional<double> running_rate;   ///< slope over the differences so far
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    std::optional<RateFit> fit;  ///< over (n_prev, |V_n - V_prev|)
    bool floored = false;        ///< a zero difference was replaced by machine epsilon
};

ConvergenceStudy convergence_study(const MarketModel& model, const PayoffFamily& family,
                                   const BarrierSpec& barrier, const std::vector<int>& n_list,
                                   const ConvergenceOptions& options = {});

}  // namespace gbar
