#pragma once

#include "gbar/game_tree.hpp"
#include "gbar/hedge.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace gbar {

struct SolveOptions {
    TreeMode mode = TreeMode::Recombining;
    /// Defaults to per-leg for knock-out and min-time for knock-in.
    std::optional<Convention> convention;
    /// When false only V_0 is computed, using the streaming level sweep (level
    /// families, recombining) or a depth-first walk (path tree, n <= 24).
    bool keep_process = true;
};

/// Value of the discrete Dynkin game and the saddle stopping rules.
///
/// V_n = Y~_n and V_k = min(X~_k, max(Y~_k, p~ V_{k+1}^up + (1 - p~) V_{k+1}^dn)).
/// The seller stops at the first node where V = X~ (always at n), the buyer at
/// the first node where V = Y~.
struct GameSolution {
    double value = 0.0;
    TreeMode mode = TreeMode::Recombining;
    Convention convention = Convention::PerLeg;
    std::shared_ptr<const GameTree> tree;  ///< null for value-only solves
    std::vector<std::vector<double>> values;
    std::vector<std::vector<double>> continuation;
    std::vector<std::vector<std::uint8_t>> seller_stops;
    std::vector<std::vector<std::uint8_t>> buyer_stops;

    bool has_process() const { return tree != nullptr; }
    double value_at(int step, int node) const { return values[step][node]; }
    /// sigma* along a full (or partial) sign path; n when it never fires.
    int sigma_star(std::span<const int> signs) const;
    int tau_star(std::span<const int> signs) const;
};

GameSolution solve_game(const MarketModel& model, int n, const PayoffFamily& family,
                        const BarrierSpec& barrier, const SolveOptions& options = {});

/// Law of a node-defined stopping rule under up-probability `up_prob`.
struct StoppingLaw {
    std::vector<double> probability;  ///< P(rule = k), k = 0..n
    double mean = 0.0;
    int earliest = 0;  ///< smallest k with positive probability
    int latest = 0;
};

enum class Player { Seller, Buyer };
StoppingLaw stopping_law(const GameSolution& solution, Player player, double up_prob);

/// E~[Y~_n]: the game with both players forced to wait until maturity.
double european_value(const MarketModel& model, int n, const PayoffFamily& family,
                      const BarrierSpec& barrier, TreeMode mode = TreeMode::Recombining);

/// Replicating superhedge from the Doob decomposition of the value process:
/// alpha = (V_{k+1}^up - V_{k+1}^dn) / (a1 - a2), cancel at sigma*, bond-only after
/// cancellation. Requires x >= V_0 and a solution that kept its process.
HedgeStrategy perfect_hedge(const GameSolution& solution, double initial_capital);

/// (L e^{-scale n^{-exponent}}, R e^{scale n^{-exponent}}); an infinite R stays infinite.
BarrierSpec widen_barrier(const BarrierSpec& barrier, int n, double exponent = 1.0 / 3.0,
                          double scale = 1.0);

}  // namespace gbar
