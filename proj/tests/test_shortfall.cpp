#include "gbar/dynkin.hpp"
#include "gbar/shortfall.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace gbar;

namespace {

ShortfallOptions mode_opts(TreeMode mode, std::optional<Convention> conv = std::nullopt) {
    ShortfallOptions o;
    o.mode = mode;
    o.convention = conv;
    return o;
}

MarketModel driftless() {
    MarketModel m = fixtures::standard_model();
    m.mu = 0.0;
    return m;
}

}  // namespace

TEST(AdmissibleInterval, Examples) {
    const StepParams sp = step_params(fixtures::one_step_model(), 1);
    const AdmissibleInterval k = admissible_interval(1.0, sp);
    EXPECT_NEAR(k.lo, -10.0, 1e-12);
    EXPECT_NEAR(k.hi, 11.0, 1e-12);
    EXPECT_NEAR(1.0 + k.lo * sp.a1, 0.0, 1e-15);
    const AdmissibleInterval z = admissible_interval(0.0, sp);
    EXPECT_EQ(z.lo, 0.0);
    EXPECT_EQ(z.hi, 0.0);
    EXPECT_THROW(admissible_interval(-1.0, sp), std::invalid_argument);
}

TEST(AdmissibleInterval, EndpointsKeepPortfolioNonnegative) {
    const StepParams sp = step_params(fixtures::standard_model(), 37);
    for (double y : {0.0, 0.3, 1.0, 17.0, 250.0}) {
        const AdmissibleInterval k = admissible_interval(y, sp);
        for (double u : {k.lo, k.hi, 0.5 * (k.lo + k.hi)}) {
            EXPECT_GE(y + u * sp.a1, -1e-12);
            EXPECT_GE(y + u * sp.a2, -1e-12);
        }
    }
}

TEST(Shortfall, OneStepExamples) {
    const MarketModel m = fixtures::one_step_model();
    const auto f = PayoffFamily::game_put(100, 2);
    const auto r0 = solve_shortfall(m, 1, f, BarrierSpec::none(), 0.0);
    const double tol = 2 * r0.surface->y_max / 513;
    EXPECT_NEAR(r0.risk, 2.0, tol);
    const auto r1 = solve_shortfall(m, 1, f, BarrierSpec::none(), 1.0);
    EXPECT_NEAR(r1.risk, 1.0, tol);
    EXPECT_EQ(solve_shortfall(m, 1, f, BarrierSpec::none(), 2.0).risk, 0.0);
    EXPECT_EQ(solve_shortfall(m, 1, f, BarrierSpec::none(), 50.0).risk, 0.0);

    const HedgeStrategy h = extract_optimal_hedge(r1.surface, 1.0);
    EXPECT_EQ(replay(h, std::vector<int>{1}).cancel_index, 0);
    const RiskAudit audit = portfolio_risk(h);
    EXPECT_NEAR(audit.with_cancel, 1.0, tol);
    EXPECT_NEAR(audit.w0, 1.0, tol);
}

TEST(Shortfall, RejectsBadGrid) {
    GridConfig g;
    g.M = 1;
    EXPECT_THROW(solve_shortfall(fixtures::one_step_model(), 1, PayoffFamily::game_put(100, 2),
                                 BarrierSpec::none(), 0.0, g),
                 std::invalid_argument);
    EXPECT_THROW(solve_shortfall(fixtures::one_step_model(), 1, PayoffFamily::game_put(100, 2),
                                 BarrierSpec::none(), -1.0),
                 std::invalid_argument);
}

TEST(Shortfall, TablesAreNonincreasingAndBounded) {
    const MarketModel m = fixtures::standard_model();
    for (const auto& f : fixtures::markov_families())
        for (auto dir : {BarrierDirection::KnockOut, BarrierDirection::KnockIn}) {
            const auto res = solve_shortfall(m, 10, f, fixtures::double_barrier(dir), 1.0);
            const RiskSurface& s = *res.surface;
            for (const auto& level : s.j_values)
                for (const auto& tab : level) {
                    for (std::size_t i = 0; i < tab.size(); ++i) {
                        EXPECT_GE(tab[i], 0.0);
                        EXPECT_LE(tab[i], s.y_max);
                        if (i > 0) EXPECT_LE(tab[i], tab[i - 1]);
                    }
                    if (!tab.empty()) EXPECT_EQ(tab.back(), 0.0);
                }
        }
}

TEST(Shortfall, ZeroCapitalDriftlessMatchesGameValue) {
    const MarketModel m = driftless();
    for (const auto& f : fixtures::markov_families())
        for (auto dir : {BarrierDirection::KnockOut, BarrierDirection::KnockIn})
            for (int n : {1, 4, 9}) {
                const BarrierSpec b = fixtures::double_barrier(dir, 88, 116);
                const auto res = solve_shortfall(m, n, f, b, 0.0);
                EXPECT_NEAR(res.risk, solve_game(m, n, f, b).value, 2 * res.surface->y_max / 513);
            }
}

TEST(Shortfall, NonincreasingInCapitalAndZeroAbovePrice) {
    const MarketModel m = fixtures::standard_model();
    const auto f = PayoffFamily::game_put(100, 5);
    const BarrierSpec b = fixtures::double_barrier(BarrierDirection::KnockOut);
    const auto res = solve_shortfall(m, 12, f, b, 0.0);
    const double v = solve_game(m, 12, f, b).value;
    double prev = 1e300;
    for (int i = 0; i <= 40; ++i) {
        const double x = 1.5 * v * i / 40;
        const double r = res.surface->J(0, 0, x);
        EXPECT_LE(r, prev);
        prev = r;
    }
    EXPECT_LE(res.surface->J(0, 0, v), res.surface->tolerance());
    EXPECT_EQ(res.surface->J(0, 0, res.surface->y_max), 0.0);
}

TEST(Shortfall, ExactZeroAboveEveryPayoff) {
    const MarketModel m = fixtures::standard_model();
    for (const auto& f : fixtures::markov_families()) {
        const auto b = fixtures::double_barrier(BarrierDirection::KnockOut);
        const auto res = solve_shortfall(m, 8, f, b, 0.0);
        EXPECT_EQ(res.surface->J(0, 0, res.surface->y_max), 0.0);
        EXPECT_EQ(solve_shortfall(m, 8, f, b, res.surface->y_max * 1.01).risk, 0.0);
    }
}

TEST(Shortfall, PathTreeAgreesWithRecombining) {
    const MarketModel m = fixtures::standard_model();
    for (const auto& f : fixtures::markov_families())
        for (auto dir : {BarrierDirection::KnockOut, BarrierDirection::KnockIn})
            for (int n : {1, 3, 6}) {
                const BarrierSpec b = fixtures::double_barrier(dir, 90, 115);
                const auto rec = solve_shortfall(m, n, f, b, 0.7, {}, mode_opts(TreeMode::Recombining));
                const auto tree = solve_shortfall(m, n, f, b, 0.7, {}, mode_opts(TreeMode::PathTree));
                EXPECT_NEAR(rec.risk, tree.risk, rec.surface->tolerance());
            }
}

TEST(Shortfall, AuditReproducesRisk) {
    const MarketModel m = fixtures::standard_model();
    for (const auto& f : fixtures::markov_families())
        for (auto dir : {BarrierDirection::KnockOut, BarrierDirection::KnockIn}) {
            const BarrierSpec b = fixtures::double_barrier(dir, 88, 118);
            const int n = 7;
            const double v = solve_game(m, n, f, b).value;
            const auto res = solve_shortfall(m, n, f, b, 0.0);
            for (double frac : {0.0, 0.35, 0.8, 1.0}) {
                const double x = frac * v;
                const HedgeStrategy h = extract_optimal_hedge(res.surface, x);
                const RiskAudit audit = portfolio_risk(h);
                const double j0 = res.surface->J(0, 0, x);
                EXPECT_NEAR(audit.with_cancel, j0, res.surface->tolerance()) << to_string(f.kind) << " x=" << x;
                EXPECT_LE(audit.w0, audit.with_cancel + 1e-12);
                EXPECT_GE(audit.min_value, 0.0);
            }
        }
}

TEST(Shortfall, ExtractedHedgeAboveThePriceIsPerfect) {
    const MarketModel m = fixtures::standard_model();
    const auto f = PayoffFamily::game_call(100, 4);
    const BarrierSpec b = fixtures::double_barrier(BarrierDirection::KnockOut);
    const double v = solve_game(m, 6, f, b).value;
    const auto res = solve_shortfall(m, 6, f, b, v);
    const RiskAudit audit = portfolio_risk(extract_optimal_hedge(res.surface, v + res.surface->tolerance()));
    EXPECT_LE(audit.with_cancel, res.surface->tolerance());
}

TEST(Shortfall, ZeroCapitalKeepsZeroPortfolio) {
    const MarketModel m = fixtures::standard_model();
    const auto res = solve_shortfall(m, 6, PayoffFamily::game_put(100, 2), BarrierSpec::none(), 0.0);
    const HedgeStrategy h = extract_optimal_hedge(res.surface, 0.0);
    for (std::uint64_t idx = 0; idx < 64; ++idx) {
        const PortfolioPath p = replay(h, fixtures::signs_of(idx, 6));
        for (double a : p.position) EXPECT_EQ(a, 0.0);
        for (double v : p.value) EXPECT_EQ(v, 0.0);
    }
}

TEST(PortfolioRisk, Examples) {
    const MarketModel m = driftless();
    const auto f = PayoffFamily::game_put(100, 3);
    const BarrierSpec b = fixtures::double_barrier(BarrierDirection::KnockOut);
    auto tree = std::make_shared<const GameTree>(GameTree::build(m, 8, f, b, TreeMode::Recombining));
    HedgeStrategy zero;
    zero.tree = tree;
    zero.convention = Convention::PerLeg;
    zero.position = [](int, int, double) { return 0.0; };
    zero.initial_capital = 0.0;
    EXPECT_NEAR(portfolio_risk(zero).w0, solve_game(m, 8, f, b).value, 1e-12);
    zero.initial_capital = 1000.0;
    EXPECT_EQ(portfolio_risk(zero).w0, 0.0);
    EXPECT_EQ(portfolio_risk(zero).with_cancel, 0.0);
}

TEST(Shortfall, GridRefinementIsCauchy) {
    const MarketModel m = fixtures::standard_model();
    const auto f = PayoffFamily::game_put(100, 5);
    const BarrierSpec b = fixtures::double_barrier(BarrierDirection::KnockOut);
    const double x = 0.4 * solve_game(m, 8, f, b).value;
    std::vector<double> r;
    for (int M : {65, 129, 257, 513, 1025}) {
        GridConfig g;
        g.M = M;
        r.push_back(solve_shortfall(m, 8, f, b, x, g).risk);
    }
    for (std::size_t i = 2; i < r.size(); ++i)
        EXPECT_LE(std::abs(r[i] - r[i - 1]), std::abs(r[i - 1] - r[i - 2]) + 1e-12) << "step " << i;
}

TEST(Shortfall, BarrierMonotonicity) {
    const MarketModel m = fixtures::standard_model();
    for (const auto& f : fixtures::markov_families()) {
        const int n = 10;
        const BarrierSpec ko = fixtures::double_barrier(BarrierDirection::KnockOut, 90, 115);
        const BarrierSpec ki = fixtures::double_barrier(BarrierDirection::KnockIn, 90, 115);
        const double x = 0.3 * solve_game(m, n, f, ko).value;
        const auto a = solve_shortfall(m, n, f, ko, x), aw = solve_shortfall(m, n, f, widen_barrier(ko, n), x);
        EXPECT_LE(a.risk, aw.risk + aw.surface->tolerance());
        const double xi = 0.3 * solve_game(m, n, f, ki).value;
        const auto c = solve_shortfall(m, n, f, ki, xi), cw = solve_shortfall(m, n, f, widen_barrier(ki, n), xi);
        EXPECT_GE(c.risk + c.surface->tolerance(), cw.risk);
    }
}

TEST(Shortfall, DiscountConventionInvarianceForKnockOut) {
    const MarketModel m = fixtures::standard_model();
    for (const auto& f : fixtures::markov_families()) {
        const BarrierSpec b = fixtures::double_barrier(BarrierDirection::KnockOut);
        const double x = 0.5 * solve_game(m, 9, f, b).value;
        const auto a = solve_shortfall(m, 9, f, b, x, {}, mode_opts(TreeMode::Recombining, Convention::PerLeg));
        const auto c = solve_shortfall(m, 9, f, b, x, {}, mode_opts(TreeMode::Recombining, Convention::MinTime));
        EXPECT_NEAR(a.risk, c.risk, a.surface->tolerance());
    }
}
