#include "gbar/shortfall.hpp"

#include "gbar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gbar {

void GridConfig::validate() const {
    if (M < 2) throw std::invalid_argument("grid: M must be >= 2");
    if (M_u < 2) throw std::invalid_argument("grid: M_u must be >= 2");
    if (refinement < 0) throw std::invalid_argument("grid: refinement must be >= 0");
}

AdmissibleInterval admissible_interval(double y, const StepParams& sp) {
    if (!(y >= 0.0)) throw std::invalid_argument("admissible_interval: y must be >= 0");
    if (y == 0.0) return {0.0, 0.0};
    return {-y / sp.a1, -y / sp.a2};
}

namespace {

using Table = std::vector<double>;

double interp(const Table& tab, double dy, double y_max, double v) {
    if (tab.empty() || v >= y_max) return 0.0;
    if (v <= 0.0) return tab.front();
    const double pos = v / dy;
    const auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= tab.size()) return tab.back();
    const double w = pos - static_cast<double>(i);
    return tab[i] + w * (tab[i + 1] - tab[i]);
}

double nonneg(double v) {
    return v < 0.0 && v > -1e-12 ? 0.0 : v;
}

InnerMin search(const Table& up, const Table& dn, double dy, double y_max, const StepParams& sp,
                const GridConfig& grid, double y) {
    const double p = sp.p;
    auto f = [&](double u) {
        return p * interp(up, dy, y_max, y + u * sp.a1) +
               (1.0 - p) * interp(dn, dy, y_max, y + u * sp.a2);
    };
    if (y <= 0.0) return {0.0, f(0.0)};
    const AdmissibleInterval k = admissible_interval(y, sp);
    if (up.empty() && dn.empty()) return {k.lo, 0.0};

    InnerMin best{k.lo, f(k.lo)};
    auto consider = [&](double u) {
        const double fu = f(u);
        if (fu < best.value || (fu == best.value && u < best.u)) best = {u, fu};
    };
    const double step = (k.hi - k.lo) / (grid.M_u - 1);
    for (int i = 1; i < grid.M_u; ++i) consider(i == grid.M_u - 1 ? k.hi : k.lo + i * step);
    consider(0.0);
    double width = step;
    for (int r = 0; r < grid.refinement; ++r) {
        width *= 0.5;
        const double centre = best.u;
        consider(std::max(k.lo, centre - width));
        consider(std::min(k.hi, centre + width));
    }
    return best;
}

bool all_zero(const Table& t) {
    return std::all_of(t.begin(), t.end(), [](double v) { return v == 0.0; });
}

}  // namespace

double RiskSurface::J(int step, int node, double value) const {
    return interp(j_values[step][node], dy, y_max, value);
}

InnerMin inner_minimum(const RiskSurface& surface, int step, int node, double y) {
    const GameTree& tree = *surface.tree;
    if (step >= tree.steps()) throw std::invalid_argument("inner_minimum: no step after maturity");
    const TreeNode& nd = tree.node(step, node);
    const auto& next = surface.j_values[step + 1];
    if (next.empty()) throw std::logic_error("inner_minimum: surface tables were not kept");
    return search(next[nd.up], next[nd.dn], surface.dy, surface.y_max, tree.params(),
                  surface.grid, y);
}

ShortfallResult solve_shortfall(const MarketModel& model, int n, const PayoffFamily& family,
                                const BarrierSpec& barrier, double x, const GridConfig& grid,
                                const ShortfallOptions& options) {
    grid.validate();
    if (!(x >= 0.0)) throw std::invalid_argument("shortfall: initial capital x must be >= 0");
    auto tree = std::make_shared<const GameTree>(
        GameTree::build(model, n, family, barrier, options.mode));
    const Convention convention = options.convention.value_or(default_convention(barrier.direction));
    const StepParams& sp = tree->params();

    auto surface = std::make_shared<RiskSurface>();
    surface->tree = tree;
    surface->convention = convention;
    surface->grid = grid;

    double y_max = 0.0;
    for (int k = 0; k <= n; ++k)
        for (const TreeNode& nd : tree->level(k)) {
            if (tree->dead(nd)) continue;
            for (double v : {tree->buyer_leg(nd), tree->seller_leg(nd, convention)})
                if (std::isfinite(v)) y_max = std::max(y_max, v);
        }
    if (!(y_max > 0.0)) y_max = 1.0;
    surface->y_max = y_max;
    surface->dy = y_max / (grid.M - 1);
    surface->y.resize(grid.M);
    for (int i = 0; i < grid.M; ++i)
        surface->y[i] = i == grid.M - 1 ? y_max : i * surface->dy;

    surface->j_values.assign(n + 1, {});
    surface->selectors.assign(n + 1, {});
    for (int k = n; k >= 0; --k) {
        const auto lv = tree->level(k);
        auto& tables = surface->j_values[k];
        tables.assign(lv.size(), {});
        if (options.keep_selectors && options.keep_tables && k < n)
            surface->selectors[k].assign(lv.size(), {});
        for (std::size_t i = 0; i < lv.size(); ++i) {
            const TreeNode& nd = lv[i];
            if (tree->dead(nd)) continue;
            const double yb = tree->buyer_leg(nd);
            Table tab(grid.M);
            if (k == n) {
                for (int g = 0; g < grid.M; ++g) tab[g] = std::max(yb - surface->y[g], 0.0);
            } else {
                const double xs = tree->seller_leg(nd, convention);
                const auto& next = surface->j_values[k + 1];
                Table* sel = surface->selectors[k].empty() ? nullptr : &surface->selectors[k][i];
                if (sel) sel->resize(grid.M);
                for (int g = 0; g < grid.M; ++g) {
                    const double yg = surface->y[g];
                    const InnerMin in =
                        search(next[nd.up], next[nd.dn], surface->dy, y_max, sp, grid, yg);
                    const double cancel = std::max(xs - yg, 0.0);
                    const double stop = std::max(yb - yg, 0.0);
                    tab[g] = std::min(cancel, std::max(stop, in.value));
                    if (sel) (*sel)[g] = in.u;
                }
            }
            if (!all_zero(tab)) tables[i] = std::move(tab);
        }
        if (!options.keep_tables && k < n && k > 0) surface->j_values[k + 1].clear();
    }

    // The root is evaluated at the exact capital rather than interpolated.
    ShortfallResult out;
    const TreeNode& root = tree->node(0, 0);
    if (tree->dead(root)) {
        out.risk = 0.0;
    } else if (n == 0 || surface->j_values[1].empty()) {
        out.risk = surface->J(0, 0, x);
    } else {
        const double stop = std::max(tree->buyer_leg(root) - x, 0.0);
        const double cancel = std::max(tree->seller_leg(root, convention) - x, 0.0);
        const double inner = search(surface->j_values[1][root.up], surface->j_values[1][root.dn],
                                    surface->dy, y_max, sp, grid, std::min(x, y_max)).value;
        out.risk = std::min(cancel, std::max(stop, inner));
    }
    out.surface = std::move(surface);
    return out;
}

HedgeStrategy extract_optimal_hedge(std::shared_ptr<const RiskSurface> surface, double x) {
    if (!surface) throw std::invalid_argument("extract_optimal_hedge: null surface");
    if (!(x >= 0.0)) throw std::invalid_argument("extract_optimal_hedge: x must be >= 0");
    HedgeStrategy h;
    h.tree = surface->tree;
    h.convention = surface->convention;
    h.initial_capital = x;
    h.liquidate_after_cancel = true;
    h.position = [surface](int step, int node, double v) {
        return inner_minimum(*surface, step, node, std::max(v, 0.0)).u;
    };
    h.cancel = [surface](int step, int node, double v) {
        const GameTree& tree = *surface->tree;
        const TreeNode& nd = tree.node(step, node);
        const double cancel = std::max(tree.seller_leg(nd, surface->convention) - v, 0.0);
        const double stop = std::max(tree.buyer_leg(nd) - v, 0.0);
        const double inner = inner_minimum(*surface, step, node, std::max(v, 0.0)).value;
        return cancel <= std::max(stop, inner);
    };
    return h;
}

namespace {

struct AuditWalk {
    const HedgeStrategy& s;
    const GameTree& tree;
    const StepParams& sp;
    double min_value;

    struct Out {
        double w;
        double with_cancel;
    };

    Out visit(int k, int idx, double v, bool cancelled) {
        min_value = std::min(min_value, v);
        const TreeNode& nd = tree.node(k, idx);
        const double stop = std::max(tree.buyer_leg(nd) - v, 0.0);
        if (k == sp.n) return {stop, stop};
        const double cancel = std::max(tree.seller_leg(nd, s.convention) - v, 0.0);
        const bool fires = !cancelled && s.cancel && s.cancel(k, idx, v);
        const double alpha = s.position(k, idx, v);
        const Out up = visit(k + 1, nd.up, nonneg(v + alpha * sp.a1), cancelled || fires);
        const Out dn = visit(k + 1, nd.dn, nonneg(v + alpha * sp.a2), cancelled || fires);
        Out out;
        out.w = std::min(cancel, std::max(stop, sp.p * up.w + (1.0 - sp.p) * dn.w));
        if (fires)
            out.with_cancel = std::max(stop, cancel);
        else
            out.with_cancel = std::max(stop, sp.p * up.with_cancel + (1.0 - sp.p) * dn.with_cancel);
        return out;
    }
};

}  // namespace

RiskAudit portfolio_risk(const HedgeStrategy& strategy) {
    if (!strategy.tree || !strategy.position)
        throw std::invalid_argument("portfolio_risk: incomplete strategy");
    const GameTree& tree = *strategy.tree;
    if (tree.steps() > kPathTreeMaxStepsDfs)
        throw BudgetError("portfolio audit limited to n <= " + std::to_string(kPathTreeMaxStepsDfs));
    AuditWalk walk{strategy, tree, tree.params(), strategy.initial_capital};
    const AuditWalk::Out out = walk.visit(0, 0, strategy.initial_capital, false);
    return {out.w, out.with_cancel, walk.min_value};
}

}  // namespace gbar
