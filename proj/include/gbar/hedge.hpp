#pragma once

#include "gbar/game_tree.hpp"

#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace gbar {

/// A seller hedge (pi, sigma) on a GameTree.
///
/// The stock position is expressed as alpha = gamma_{k+1} * S~_k, the discounted money
/// held in stock over (k, k+1]; the discounted portfolio then moves by alpha * a1 or
/// alpha * a2. Both the position and the cancellation decision may depend on the
/// current discounted portfolio value, which lets feedback hedges (the shortfall
/// optimiser) and tabulated hedges (the Doob replication) share one type.
struct HedgeStrategy {
    std::shared_ptr<const GameTree> tree;
    Convention convention = Convention::PerLeg;
    double initial_capital = 0.0;
    std::function<double(int step, int node, double value)> position;
    std::function<bool(int step, int node, double value)> cancel;
    /// Once cancelled, move everything into the bond (gamma = 0) for the rest of the path.
    bool liquidate_after_cancel = false;
};

/// Portfolio bookkeeping along one sign path.
struct PortfolioPath {
    std::vector<double> value;     ///< discounted portfolio value V~_0..V~_k
    std::vector<double> position;  ///< alpha_1..alpha_k (alpha_{i+1} chosen at i)
    std::vector<double> gamma;     ///< stock units gamma_1..gamma_k
    std::vector<double> beta;      ///< bond units beta_1..beta_k
    int cancel_index = 0;          ///< first i < n where the cancel rule fires, else n
};

/// Forward-simulates the strategy along `signs` (any prefix length <= n).
PortfolioPath replay(const HedgeStrategy& strategy, std::span<const int> signs);

}  // namespace gbar
