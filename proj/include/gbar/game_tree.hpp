#pragma once

#include "gbar/lattice.hpp"
#include "gbar/payoffs.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace gbar {

enum class TreeMode { PathTree, Recombining };

std::string to_string(TreeMode mode);
TreeMode tree_mode_from_string(const std::string& name);

/// Deepest path tree that may be materialised (2^(n+1) nodes).
inline constexpr int kPathTreeMaxSteps = 16;
/// Deepest path tree that may be traversed depth-first without materialising.
inline constexpr int kPathTreeMaxStepsDfs = 24;
/// Upper bound on materialised recombining nodes.
inline constexpr std::size_t kMaxRecombiningNodes = 20'000'000;

/// Discounted buyer payoff given the crossing state (gating by direction).
double buyer_leg(BarrierDirection dir, bool crossed, double f_disc);
/// Discounted seller payoff given the crossing state and settlement convention.
double seller_leg(BarrierDirection dir, Convention convention, bool crossed, double g_disc);

struct TreeNode {
    int level = 0;     ///< sum of signs
    int up = -1;       ///< child index in the next step, -1 at maturity
    int dn = -1;
    double s_disc = 0.0;  ///< discounted stock price
    double f_disc = 0.0;  ///< discounted F, ungated
    double g_disc = 0.0;  ///< discounted G, ungated
    bool crossed = false; ///< barrier exited at or before this step
};

/// The n-step CRR market as an explicit graph of nodes, with the ungated payoffs and
/// barrier-crossing flag stored per node. In path-tree mode node i at step k
/// encodes the signs of its prefix in binary (bit set = up move, first move is the
/// most significant bit); in recombining mode nodes are sorted lattice states
/// extended with the crossing flag.
class GameTree {
public:
    static GameTree build(const MarketModel& model, int n, const PayoffFamily& family,
                          const BarrierSpec& barrier, TreeMode mode);

    const StepParams& params() const { return sp_; }
    const PayoffFamily& family() const { return family_; }
    const BarrierSpec& barrier() const { return barrier_; }
    TreeMode mode() const { return mode_; }
    int steps() const { return sp_.n; }

    std::span<const TreeNode> level(int step) const { return levels_[step]; }
    const TreeNode& node(int step, int index) const { return levels_[step][index]; }
    std::size_t node_count() const;

    int child(int step, int index, int sign) const {
        const TreeNode& nd = levels_[step][index];
        return sign > 0 ? nd.up : nd.dn;
    }
    /// Node index reached by following `signs` from the root.
    int locate(std::span<const int> signs) const;

    bool alive(const TreeNode& nd) const;
    /// Discounted buyer payoff at the node (gated).
    double buyer_leg(const TreeNode& nd) const;
    /// Discounted seller payoff at the node under `convention`.
    double seller_leg(const TreeNode& nd, Convention convention) const;
    /// Knock-out node past the barrier: every payoff from here on is zero.
    bool dead(const TreeNode& nd) const {
        return barrier_.direction == BarrierDirection::KnockOut && nd.crossed;
    }

private:
    StepParams sp_;
    PayoffFamily family_;
    BarrierSpec barrier_;
    TreeMode mode_ = TreeMode::Recombining;
    std::vector<std::vector<TreeNode>> levels_;

    void build_path_tree();
    void build_recombining();
};

}  // namespace gbar
