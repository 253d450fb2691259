#include "gbar/hedge.hpp"

#include <cmath>
#include <stdexcept>

namespace gbar {

PortfolioPath replay(const HedgeStrategy& strategy, std::span<const int> signs) {
    if (!strategy.tree) throw std::invalid_argument("replay: strategy has no tree");
    const GameTree& tree = *strategy.tree;
    const StepParams& sp = tree.params();
    const int n = sp.n;
    const int len = static_cast<int>(signs.size());
    if (len > n) throw std::invalid_argument("replay: path longer than the tree");

    PortfolioPath out;
    out.cancel_index = n;
    out.value.push_back(strategy.initial_capital);
    bool cancelled = false;
    int idx = 0;
    for (int k = 0; k <= len && k < n; ++k) {
        const double v = out.value.back();
        if (!cancelled && strategy.cancel && strategy.cancel(k, idx, v)) {
            cancelled = true;
            out.cancel_index = k;
        }
        if (k == len) break;
        const double alpha =
            cancelled && strategy.liquidate_after_cancel ? 0.0 : strategy.position(k, idx, v);
        const double s_disc = tree.node(k, idx).s_disc;
        const double gamma = alpha / s_disc;
        out.position.push_back(alpha);
        out.gamma.push_back(gamma);
        out.beta.push_back((v - gamma * s_disc) / sp.b0);
        double next = v + alpha * (signs[k] > 0 ? sp.a1 : sp.a2);
        // Moves on the edge of the admissible interval land on zero up to rounding.
        if (next < 0.0 && next > -1e-12 * (1.0 + std::abs(v))) next = 0.0;
        out.value.push_back(next);
        idx = tree.child(k, idx, signs[k]);
    }
    return out;
}

}  // namespace gbar
