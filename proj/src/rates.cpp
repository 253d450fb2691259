#include "gbar/rates.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gbar {

RateFit fit_rate(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 2) throw std::invalid_argument("fit_rate: need at least 2 pairs");
    double sx = 0.0, sy = 0.0;
    for (const auto& [n, err] : pairs) {
        if (!(n > 0.0)) throw std::invalid_argument("fit_rate: n must be > 0");
        if (!(err > 0.0)) throw std::invalid_argument("fit_rate: errors must be > 0");
        sx += std::log(n);
        sy += std::log(err);
    }
    const double count = static_cast<double>(pairs.size());
    const double mx = sx / count, my = sy / count;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [n, err] : pairs) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(err) - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("fit_rate: all n are equal");
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

ConvergenceStudy convergence_study(const MarketModel& model, const PayoffFamily& family,
                                   const BarrierSpec& barrier, const std::vector<int>& n_list,
                                   const ConvergenceOptions& options) {
    if (n_list.empty()) throw std::invalid_argument("converge: n_list is empty");
    for (std::size_t i = 1; i < n_list.size(); ++i)
        if (n_list[i] <= n_list[i - 1])
            throw std::invalid_argument("converge: n_list must be increasing");

    ConvergenceStudy study;
    std::vector<std::pair<double, double>> diffs;
    for (int n : n_list) {
        const BarrierSpec bar = options.barrier_at ? options.barrier_at(barrier, n) : barrier;
        SolveOptions so;
        so.mode = options.mode;
        so.convention = options.convention;
        so.keep_process = false;
        ConvergenceRow row;
        row.n = n;
        row.value = solve_game(model, n, family, bar, so).value;
        if (options.european) row.european = european_value(model, n, family, bar, options.mode);
        if (options.capital) {
            ShortfallOptions sf;
            sf.mode = options.mode;
            sf.convention = options.convention;
            sf.keep_tables = false;
            sf.keep_selectors = false;
            row.risk = solve_shortfall(model, n, family, bar, *options.capital, options.grid, sf).risk;
        }
        if (!study.rows.empty()) {
            const ConvergenceRow& prev = study.rows.back();
            double d = std::abs(row.value - prev.value);
            row.abs_diff_prev = d;
            if (d == 0.0) {
                d = std::numeric_limits<double>::epsilon();
                study.floored = true;
            }
            diffs.emplace_back(prev.n, d);
            if (diffs.size() >= 2) row.running_rate = fit_rate(diffs).slope;
        }
        study.rows.push_back(row);
    }
    if (diffs.size() >= 2) study.fit = fit_rate(diffs);
    return study;
}

}  // namespace gbar
