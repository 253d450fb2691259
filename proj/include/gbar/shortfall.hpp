#pragma once

#include "gbar/game_tree.hpp"
#include "gbar/hedge.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace gbar {

/// Portfolio-value grid and the inner search over hedge positions.
struct GridConfig {
    int M = 513;          ///< grid points on [0, Y_max]
    int M_u = 129;        ///< equally spaced candidates on K_n(y)
    int refinement = 20;  ///< bisection steps around the best candidate

    void validate() const;
    bool operator==(const GridConfig&) const = default;
};

/// K_n(y) = [-y/a1, -y/a2]: positions keeping both one-step outcomes nonnegative.
struct AdmissibleInterval {
    double lo = 0.0;
    double hi = 0.0;
};

AdmissibleInterval admissible_interval(double y, const StepParams& sp);

struct ShortfallOptions {
    TreeMode mode = TreeMode::Recombining;
    std::optional<Convention> convention;
    /// Keep every level's tables (needed for hedge extraction). When false only
    /// two levels are alive at a time and the surface holds J_0 alone.
    bool keep_tables = true;
    bool keep_selectors = true;
};

/// Per-node shortfall functions J_k(y) sampled on a uniform grid of [0, Y_max],
/// J = 0 beyond Y_max. An empty table marks a knocked-out node (J = 0).
struct RiskSurface {
    std::shared_ptr<const GameTree> tree;
    Convention convention = Convention::PerLeg;
    GridConfig grid;
    double y_max = 1.0;
    double dy = 0.0;
    std::vector<double> y;
    std::vector<std::vector<std::vector<double>>> j_values;
    std::vector<std::vector<std::vector<double>>> selectors;

    /// Linear interpolation of J at (step, node).
    double J(int step, int node, double value) const;
    /// Grid accuracy contract: 4 Y_max / M.
    double tolerance() const { return 4.0 * y_max / grid.M; }
};

struct ShortfallResult {
    double risk = 0.0;
    std::shared_ptr<const RiskSurface> surface;
};

/// J_k(y) = min((X~_k - y)^+, max((Y~_k - y)^+, inf_{u in K_n(y)} p J_{k+1}(y + u a1)
///          + (1 - p) J_{k+1}(y + u a2))),  J_n(y) = (Y~_n - y)^+,
/// with p the objective up-probability. The seller leg follows the convention
/// (ungated for knock-in), the buyer leg is gated.
ShortfallResult solve_shortfall(const MarketModel& model, int n, const PayoffFamily& family,
                                const BarrierSpec& barrier, double x, const GridConfig& grid = {},
                                const ShortfallOptions& options = {});

/// Best inner position at portfolio value y for node (step, node): the smallest
/// minimiser found by the candidate search, and the minimum.
struct InnerMin {
    double u = 0.0;
    double value = 0.0;
};
InnerMin inner_minimum(const RiskSurface& surface, int step, int node, double y);

/// The risk-minimising hedge read off the surface. Positions are recomputed at the
/// running portfolio value; the seller cancels at the first node where the cancel
/// shortfall (X~ - V~)^+ attains the node's risk.
HedgeStrategy extract_optimal_hedge(std::shared_ptr<const RiskSurface> surface, double x);

/// Exact risk of a hedge, by full enumeration of the 2^n sign paths under the
/// objective measure.
struct RiskAudit {
    double w0 = 0.0;           ///< min over cancellation times (the W recursion)
    double with_cancel = 0.0;  ///< buyer's best response to the strategy's own cancel rule
    double min_value = 0.0;    ///< smallest portfolio value seen (admissibility)
};
RiskAudit portfolio_risk(const HedgeStrategy& strategy);

}  // namespace gbar
