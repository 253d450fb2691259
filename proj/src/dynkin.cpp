#include "gbar/dynkin.hpp"

#include "gbar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gbar {

namespace {

// Backward induction on one node given its continuation value.
struct NodeStep {
    double value;
    bool seller_stop;
    bool buyer_stop;
};

NodeStep game_step(double y, double x, double cont) {
    const double inner = std::max(y, cont);
    const double v = std::min(x, inner);
    return {v, x <= inner, y == v};
}

// V_0 for level-only families with O(n) memory. State index at step k is
// 2j + c with j = (level + k) / 2 and c the crossed flag.
double level_sweep(const StepParams& sp, const PayoffFamily& family, const BarrierSpec& barrier,
                   Convention convention, bool european) {
    const int n = sp.n;
    auto legs = [&](int k, int level, bool crossed, double& y, double& x) {
        PathSummary summary;
        summary.spot = sp.price(k, level);
        summary.running_max = summary.spot;
        const Intrinsic v = evaluate(family, summary);
        y = buyer_leg(barrier.direction, crossed, sp.discount(k) * v.F);
        x = seller_leg(barrier.direction, convention, crossed, sp.discount(k) * v.G);
    };

    std::vector<double> next(2 * static_cast<std::size_t>(n + 1));
    for (int j = 0; j <= n; ++j)
        for (int c = 0; c < 2; ++c) {
            double y = 0.0, x = 0.0;
            legs(n, 2 * j - n, c != 0, y, x);
            next[2 * j + c] = y;
        }
    std::vector<double> cur;
    const double pt = sp.p_tilde;
    for (int k = n - 1; k >= 0; --k) {
        cur.assign(2 * static_cast<std::size_t>(k + 1), 0.0);
        for (int j = 0; j <= k; ++j) {
            const int level = 2 * j - k;
            const bool out_up = !barrier.contains(sp.price(k + 1, level + 1));
            const bool out_dn = !barrier.contains(sp.price(k + 1, level - 1));
            for (int c = 0; c < 2; ++c) {
                const int cu = (c != 0 || out_up) ? 1 : 0;
                const int cd = (c != 0 || out_dn) ? 1 : 0;
                const double cont = pt * next[2 * (j + 1) + cu] + (1.0 - pt) * next[2 * j + cd];
                if (european) {
                    cur[2 * j + c] = cont;
                } else {
                    double y = 0.0, x = 0.0;
                    legs(k, level, c != 0, y, x);
                    cur[2 * j + c] = game_step(y, x, cont).value;
                }
            }
        }
        next.swap(cur);
    }
    return next[barrier.contains(sp.price(0, 0)) ? 0 : 1];
}

// Depth-first value over the path tree without materialising it.
struct PathWalker {
    const StepParams& sp;
    const PayoffFamily& family;
    const BarrierSpec& barrier;
    Convention convention;
    bool european;

    double visit(int k, int level, bool crossed, double running_max, double integral) const {
        const double spot = sp.price(k, level);
        crossed = crossed || !barrier.contains(spot);
        running_max = k == 0 ? spot : std::max(running_max, spot);
        const Intrinsic v = evaluate(family, PathSummary{spot, running_max, integral});
        const double y = buyer_leg(barrier.direction, crossed, sp.discount(k) * v.F);
        if (k == sp.n) return y;
        const double next_integral = integral + spot * sp.dt;
        const double up = visit(k + 1, level + 1, crossed, running_max, next_integral);
        const double dn = visit(k + 1, level - 1, crossed, running_max, next_integral);
        const double cont = sp.p_tilde * up + (1.0 - sp.p_tilde) * dn;
        if (european) return cont;
        const double x = seller_leg(barrier.direction, convention, crossed, sp.discount(k) * v.G);
        return game_step(y, x, cont).value;
    }
};

GameSolution solve_on_tree(std::shared_ptr<const GameTree> tree, Convention convention) {
    const StepParams& sp = tree->params();
    const int n = sp.n;
    GameSolution sol;
    sol.mode = tree->mode();
    sol.convention = convention;
    sol.values.resize(n + 1);
    sol.continuation.resize(n + 1);
    sol.seller_stops.resize(n + 1);
    sol.buyer_stops.resize(n + 1);
    for (int k = n; k >= 0; --k) {
        const auto lv = tree->level(k);
        auto& vals = sol.values[k];
        auto& conts = sol.continuation[k];
        auto& ss = sol.seller_stops[k];
        auto& bs = sol.buyer_stops[k];
        vals.resize(lv.size());
        conts.resize(lv.size());
        ss.resize(lv.size());
        bs.resize(lv.size());
        for (std::size_t i = 0; i < lv.size(); ++i) {
            const TreeNode& nd = lv[i];
            const double y = tree->buyer_leg(nd);
            if (k == n) {
                vals[i] = y;
                conts[i] = y;
                ss[i] = 1;
                bs[i] = 1;
                continue;
            }
            const auto& nv = sol.values[k + 1];
            const double cont = sp.p_tilde * nv[nd.up] + (1.0 - sp.p_tilde) * nv[nd.dn];
            const NodeStep st = game_step(y, tree->seller_leg(nd, convention), cont);
            vals[i] = st.value;
            conts[i] = cont;
            ss[i] = st.seller_stop;
            bs[i] = st.buyer_stop;
        }
    }
    sol.value = sol.values[0][0];
    sol.tree = std::move(tree);
    return sol;
}

int first_stop(const GameSolution& sol, const std::vector<std::vector<std::uint8_t>>& stops,
               std::span<const int> signs) {
    if (!sol.has_process()) throw std::logic_error("solution has no value process");
    const int n = sol.tree->steps();
    int idx = 0;
    for (int k = 0; k <= n; ++k) {
        if (stops[k][idx]) return k;
        if (k == static_cast<int>(signs.size())) break;
        idx = sol.tree->child(k, idx, signs[k]);
    }
    return n;
}

}  // namespace

int GameSolution::sigma_star(std::span<const int> signs) const {
    return first_stop(*this, seller_stops, signs);
}

int GameSolution::tau_star(std::span<const int> signs) const {
    return first_stop(*this, buyer_stops, signs);
}

GameSolution solve_game(const MarketModel& model, int n, const PayoffFamily& family,
                        const BarrierSpec& barrier, const SolveOptions& options) {
    family.validate();
    barrier.validate();
    const Convention convention = options.convention.value_or(default_convention(barrier.direction));
    const StepParams sp = step_params(model, n);

    if (!options.keep_process) {
        if (options.mode == TreeMode::Recombining && family.reduction() == Reduction::Level) {
            GameSolution sol;
            sol.mode = options.mode;
            sol.convention = convention;
            sol.value = level_sweep(sp, family, barrier, convention, false);
            return sol;
        }
        if (options.mode == TreeMode::PathTree) {
            if (n > kPathTreeMaxStepsDfs)
                throw BudgetError("path-tree walk limited to n <= " +
                                  std::to_string(kPathTreeMaxStepsDfs) + " steps, got " +
                                  std::to_string(n));
            GameSolution sol;
            sol.mode = options.mode;
            sol.convention = convention;
            sol.value = PathWalker{sp, family, barrier, convention, false}.visit(0, 0, false, 0.0, 0.0);
            return sol;
        }
    }
    auto tree = std::make_shared<const GameTree>(GameTree::build(model, n, family, barrier, options.mode));
    return solve_on_tree(std::move(tree), convention);
}

StoppingLaw stopping_law(const GameSolution& solution, Player player, double up_prob) {
    if (!solution.has_process()) throw std::logic_error("solution has no value process");
    const GameTree& tree = *solution.tree;
    const int n = tree.steps();
    const auto& stops = player == Player::Seller ? solution.seller_stops : solution.buyer_stops;
    StoppingLaw law;
    law.probability.assign(n + 1, 0.0);
    std::vector<double> mass{1.0};
    for (int k = 0; k <= n; ++k) {
        std::vector<double> next(k < n ? tree.level(k + 1).size() : 0, 0.0);
        for (std::size_t i = 0; i < mass.size(); ++i) {
            if (mass[i] == 0.0) continue;
            if (stops[k][i]) {
                law.probability[k] += mass[i];
                continue;
            }
            const TreeNode& nd = tree.node(k, static_cast<int>(i));
            next[nd.up] += up_prob * mass[i];
            next[nd.dn] += (1.0 - up_prob) * mass[i];
        }
        mass = std::move(next);
    }
    law.earliest = n;
    law.latest = 0;
    for (int k = 0; k <= n; ++k) {
        law.mean += k * law.probability[k];
        if (law.probability[k] > 0.0) {
            law.earliest = std::min(law.earliest, k);
            law.latest = std::max(law.latest, k);
        }
    }
    return law;
}

double european_value(const MarketModel& model, int n, const PayoffFamily& family,
                      const BarrierSpec& barrier, TreeMode mode) {
    family.validate();
    barrier.validate();
    const StepParams sp = step_params(model, n);
    const Convention convention = default_convention(barrier.direction);
    if (mode == TreeMode::Recombining && family.reduction() == Reduction::Level)
        return level_sweep(sp, family, barrier, convention, true);
    if (mode == TreeMode::PathTree) {
        if (n > kPathTreeMaxStepsDfs)
            throw BudgetError("path-tree walk limited to n <= " +
                              std::to_string(kPathTreeMaxStepsDfs) + " steps, got " +
                              std::to_string(n));
        return PathWalker{sp, family, barrier, convention, true}.visit(0, 0, false, 0.0, 0.0);
    }
    const GameTree tree = GameTree::build(model, n, family, barrier, mode);
    std::vector<double> next;
    for (const TreeNode& nd : tree.level(n)) next.push_back(tree.buyer_leg(nd));
    for (int k = n - 1; k >= 0; --k) {
        std::vector<double> cur;
        for (const TreeNode& nd : tree.level(k))
            cur.push_back(sp.p_tilde * next[nd.up] + (1.0 - sp.p_tilde) * next[nd.dn]);
        next = std::move(cur);
    }
    return next[0];
}

HedgeStrategy perfect_hedge(const GameSolution& solution, double initial_capital) {
    if (!solution.has_process())
        throw std::invalid_argument("perfect_hedge needs a solution with its value process");
    if (!(initial_capital >= solution.value))
        throw std::invalid_argument("perfect_hedge: initial capital below the option price");
    auto sol = std::make_shared<const GameSolution>(solution);
    const StepParams& sp = sol->tree->params();
    const double spread = sp.a1 - sp.a2;
    HedgeStrategy h;
    h.tree = sol->tree;
    h.convention = sol->convention;
    h.initial_capital = initial_capital;
    h.liquidate_after_cancel = true;
    h.position = [sol, spread](int step, int node, double) {
        const TreeNode& nd = sol->tree->node(step, node);
        const auto& next = sol->values[step + 1];
        return (next[nd.up] - next[nd.dn]) / spread;
    };
    h.cancel = [sol](int step, int node, double) { return sol->seller_stops[step][node] != 0; };
    return h;
}

BarrierSpec widen_barrier(const BarrierSpec& barrier, int n, double exponent, double scale) {
    if (n < 1) throw std::invalid_argument("widen_barrier: n must be >= 1");
    const double shift = scale * std::pow(static_cast<double>(n), -exponent);
    BarrierSpec out = barrier;
    out.lower = barrier.lower * std::exp(-shift);
    if (barrier.upper) out.upper = *barrier.upper * std::exp(shift);
    return out;
}

}  // namespace gbar
