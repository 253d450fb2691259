#include "gbar/game_tree.hpp"

#include "gbar/errors.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <tuple>

namespace gbar {

std::string to_string(TreeMode mode) {
    return mode == TreeMode::PathTree ? "path-tree" : "recombining";
}

TreeMode tree_mode_from_string(const std::string& name) {
    if (name == "path-tree") return TreeMode::PathTree;
    if (name == "recombining") return TreeMode::Recombining;
    throw std::invalid_argument("unknown mode '" + name + "'");
}

GameTree GameTree::build(const MarketModel& model, int n, const PayoffFamily& family,
                         const BarrierSpec& barrier, TreeMode mode) {
    family.validate();
    barrier.validate();
    GameTree tree;
    tree.sp_ = step_params(model, n);
    tree.family_ = family;
    tree.barrier_ = barrier;
    tree.mode_ = mode;
    if (mode == TreeMode::PathTree) {
        if (n > kPathTreeMaxSteps)
            throw BudgetError("path tree limited to n <= " + std::to_string(kPathTreeMaxSteps) +
                              " steps, got " + std::to_string(n));
        tree.build_path_tree();
    } else {
        if (family.reduction() == Reduction::None)
            throw NotMarkovReducible(to_string(family.kind) +
                                     " payoffs require the path tree");
        tree.build_recombining();
    }
    return tree;
}

std::size_t GameTree::node_count() const {
    std::size_t total = 0;
    for (const auto& lv : levels_) total += lv.size();
    return total;
}

int GameTree::locate(std::span<const int> signs) const {
    if (static_cast<int>(signs.size()) > sp_.n)
        throw std::invalid_argument("locate: prefix longer than the tree");
    int idx = 0;
    for (std::size_t k = 0; k < signs.size(); ++k) idx = child(static_cast<int>(k), idx, signs[k]);
    return idx;
}

double buyer_leg(BarrierDirection dir, bool crossed, double f_disc) {
    const bool active = dir == BarrierDirection::KnockOut ? !crossed : crossed;
    return active ? f_disc : 0.0;
}

double seller_leg(BarrierDirection dir, Convention convention, bool crossed, double g_disc) {
    if (dir == BarrierDirection::KnockIn || convention == Convention::MinTime) return g_disc;
    return crossed ? 0.0 : g_disc;
}

bool GameTree::alive(const TreeNode& nd) const {
    return barrier_.direction == BarrierDirection::KnockOut ? !nd.crossed : nd.crossed;
}

double GameTree::buyer_leg(const TreeNode& nd) const {
    return gbar::buyer_leg(barrier_.direction, nd.crossed, nd.f_disc);
}

double GameTree::seller_leg(const TreeNode& nd, Convention convention) const {
    return gbar::seller_leg(barrier_.direction, convention, nd.crossed, nd.g_disc);
}

void GameTree::build_path_tree() {
    const int n = sp_.n;
    levels_.assign(n + 1, {});
    std::vector<int> signs;
    for (int k = 0; k <= n; ++k) {
        const std::size_t width = std::size_t{1} << k;
        auto& lv = levels_[k];
        lv.resize(width);
        signs.resize(k);
        for (std::size_t idx = 0; idx < width; ++idx) {
            for (int i = 0; i < k; ++i) signs[i] = (idx >> (k - 1 - i)) & 1U ? 1 : -1;
            const PricePath path = prices_along(sp_, signs);
            const Intrinsic v = intrinsic(family_, path.prices, sp_.dt);
            const auto tau = barrier_exit_index(path.prices, barrier_);
            TreeNode& nd = lv[idx];
            nd.level = 0;
            for (int s : signs) nd.level += s;
            nd.s_disc = path.discounted.back();
            nd.f_disc = sp_.discount(k) * v.F;
            nd.g_disc = sp_.discount(k) * v.G;
            nd.crossed = tau.has_value();
            if (k < n) {
                nd.dn = static_cast<int>(2 * idx);
                nd.up = static_cast<int>(2 * idx + 1);
            }
        }
    }
}

namespace {

struct StateKey {
    LatticeState state;
    bool crossed = false;
    auto operator<=>(const StateKey&) const = default;
};

}  // namespace

void GameTree::build_recombining() {
    const int n = sp_.n;
    const Reduction reduction = family_.reduction();
    levels_.assign(n + 1, {});

    auto make_node = [&](const StateKey& key, int step) {
        TreeNode nd;
        nd.level = key.state.level;
        nd.crossed = key.crossed;
        PathSummary summary;
        summary.spot = sp_.price(step, key.state.level);
        summary.running_max = reduction == Reduction::LevelMax
                                  ? sp_.price(key.state.max_step, key.state.max_level)
                                  : summary.spot;
        const Intrinsic v = evaluate(family_, summary);
        nd.s_disc = sp_.discounted_price(key.state.level);
        nd.f_disc = sp_.discount(step) * v.F;
        nd.g_disc = sp_.discount(step) * v.G;
        return nd;
    };

    std::vector<StateKey> keys{StateKey{LatticeState{}, !barrier_.contains(sp_.price(0, 0))}};
    levels_[0].push_back(make_node(keys[0], 0));
    std::size_t total = 1;

    for (int k = 0; k < n; ++k) {
        std::map<StateKey, int> next_index;
        std::vector<std::pair<StateKey, StateKey>> children(keys.size());
        for (std::size_t i = 0; i < keys.size(); ++i) {
            for (int sign : {-1, 1}) {
                StateKey child;
                child.state = advance(sp_, reduction, keys[i].state, k, sign);
                child.crossed = keys[i].crossed ||
                                !barrier_.contains(sp_.price(k + 1, child.state.level));
                next_index.emplace(child, 0);
                (sign < 0 ? children[i].first : children[i].second) = child;
            }
        }
        total += next_index.size();
        if (total > kMaxRecombiningNodes)
            throw BudgetError("recombining lattice exceeds " +
                              std::to_string(kMaxRecombiningNodes) + " nodes");
        std::vector<StateKey> next_keys;
        next_keys.reserve(next_index.size());
        int pos = 0;
        for (auto& [key, idx] : next_index) {
            idx = pos++;
            next_keys.push_back(key);
        }
        for (std::size_t i = 0; i < keys.size(); ++i) {
            levels_[k][i].dn = next_index.at(children[i].first);
            levels_[k][i].up = next_index.at(children[i].second);
        }
        auto& lv = levels_[k + 1];
        lv.reserve(next_keys.size());
        for (const auto& key : next_keys) lv.push_back(make_node(key, k + 1));
        keys = std::move(next_keys);
    }
}

}  // namespace gbar
