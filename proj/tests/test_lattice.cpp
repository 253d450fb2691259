#include "gbar/errors.hpp"
#include "gbar/lattice.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

using namespace gbar;

TEST(StepParams, OneStepHandValues) {
    const StepParams sp = step_params(fixtures::one_step_model(), 1);
    EXPECT_NEAR(sp.a1, 0.1, 1e-15);
    EXPECT_NEAR(sp.a2, 1.0 / 1.1 - 1.0, 1e-15);
    EXPECT_NEAR(sp.p_tilde, 1.0 / 2.1, 1e-15);
    EXPECT_EQ(sp.r_n, 0.0);
}

TEST(StepParams, FourStepHandValues) {
    MarketModel m;
    m.T = 1.0;
    m.r = 0.05;
    m.kappa = 0.2;
    m.mu = 0.1;
    const StepParams sp = step_params(m, 4);
    EXPECT_NEAR(sp.r_n, std::exp(0.0125) - 1.0, 1e-15);
    EXPECT_NEAR(sp.r_n, 0.0125785, 1e-7);
    EXPECT_NEAR(sp.a1, 0.1051709, 1e-7);
    EXPECT_NEAR(sp.p, 0.5986876, 1e-7);
    EXPECT_LE(std::abs(sp.p_tilde * sp.a1 + (1 - sp.p_tilde) * sp.a2), 1e-12);
}

TEST(StepParams, ZeroDriftMakesProbabilitiesEqual) {
    for (double kappa : {0.05, 0.2, 0.7}) {
        MarketModel m;
        m.kappa = kappa;
        m.mu = 0.0;
        for (int n : {1, 7, 100}) {
            const StepParams sp = step_params(m, n);
            EXPECT_EQ(sp.p, sp.p_tilde);
        }
    }
}

TEST(StepParams, InvariantsOverRandomSweep) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> kappa(0.01, 1.5), T(0.05, 5.0), r(-0.05, 0.2), mu(-0.5, 0.5);
    std::uniform_int_distribution<int> n(1, 5000);
    for (int i = 0; i < 200; ++i) {
        MarketModel m;
        m.kappa = kappa(rng);
        m.T = T(rng);
        m.r = r(rng);
        m.mu = mu(rng);
        const StepParams sp = step_params(m, n(rng));
        EXPECT_GT(sp.a1, 0.0);
        EXPECT_LT(sp.a2, 0.0);
        EXPECT_GT(sp.rho_up, sp.rho_dn);
        EXPECT_GT(sp.rho_dn, -1.0);
        EXPECT_GT(sp.p, 0.0);
        EXPECT_LT(sp.p, 1.0);
        EXPECT_GT(sp.p_tilde, 0.0);
        EXPECT_LT(sp.p_tilde, 1.0);
        EXPECT_LE(std::abs(sp.p_tilde * sp.a1 + (1 - sp.p_tilde) * sp.a2), 1e-12);
    }
}

TEST(StepParams, RejectsBadInput) {
    EXPECT_THROW(step_params(fixtures::one_step_model(), 0), std::invalid_argument);
    MarketModel m = fixtures::one_step_model();
    m.kappa = 0.0;
    EXPECT_THROW(step_params(m, 3), std::invalid_argument);
    m = fixtures::one_step_model();
    m.s0 = -1.0;
    EXPECT_THROW(step_params(m, 3), std::invalid_argument);
    m = fixtures::one_step_model();
    m.T = 0.0;
    EXPECT_THROW(step_params(m, 3), std::invalid_argument);
    m = fixtures::one_step_model();
    m.b0 = 0.0;
    EXPECT_THROW(step_params(m, 3), std::invalid_argument);
}

TEST(PricesAlong, Examples) {
    const StepParams sp = step_params(fixtures::one_step_model(), 2);
    const PricePath empty = prices_along(sp, std::vector<int>{});
    ASSERT_EQ(empty.prices.size(), 1u);
    EXPECT_EQ(empty.prices[0], 100.0);
    EXPECT_EQ(empty.discounted[0], 100.0);

    const StepParams sp1 = step_params(fixtures::one_step_model(), 1);
    EXPECT_NEAR(prices_along(sp1, std::vector<int>{1}).prices[1], 110.0, 1e-12);
    EXPECT_NEAR(prices_along(sp, std::vector<int>{-1, 1}).prices[2], 100.0, 1e-12);
    EXPECT_THROW(prices_along(sp1, std::vector<int>{1, 1}), std::invalid_argument);
    EXPECT_THROW(prices_along(sp, std::vector<int>{0}), std::invalid_argument);
}

TEST(PricesAlong, DiscountRelation) {
    const StepParams sp = step_params(fixtures::standard_model(), 9);
    const auto signs = fixtures::signs_of(0b101100111, 9);
    const PricePath p = prices_along(sp, signs);
    for (std::size_t k = 0; k < p.prices.size(); ++k)
        EXPECT_NEAR(p.prices[k], std::pow(1 + sp.r_n, static_cast<double>(k)) * p.discounted[k],
                    1e-10 * p.prices[k]);
}

TEST(PricesAlong, RecombinationProperty) {
    std::mt19937_64 rng(5);
    const StepParams sp = step_params(fixtures::standard_model(), 40);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<int> a(40), b;
        for (int& s : a) s = rng() & 1 ? 1 : -1;
        b = a;
        std::shuffle(b.begin(), b.end(), rng);
        const auto pa = prices_along(sp, a), pb = prices_along(sp, b);
        EXPECT_NEAR(pa.prices.back(), pb.prices.back(), 1e-12 * pa.prices.back());
        EXPECT_EQ(pa.prices.back(), pb.prices.back());
    }
}

TEST(BarrierExit, Examples) {
    const BarrierSpec b{95.0, 110.0, BarrierDirection::KnockOut};
    EXPECT_EQ(barrier_exit_index(std::vector<double>{100.0, 90.909}, b), 1);
    EXPECT_EQ(barrier_exit_index(std::vector<double>{100.0, 110.0}, b), 1);
    EXPECT_EQ(barrier_exit_index(std::vector<double>{120.0, 100.0}, b), 0);
    EXPECT_EQ(barrier_exit_index(std::vector<double>{100.0, 105.0}, b), std::nullopt);
    EXPECT_EQ(barrier_exit_index(std::vector<double>{1e300}, BarrierSpec::none()), std::nullopt);
}

TEST(BarrierExit, WideningNeverDecreasesExitIndex) {
    std::mt19937_64 rng(7);
    const StepParams sp = step_params(fixtures::standard_model(), 30);
    std::uniform_real_distribution<double> lo(60, 99), hi(101, 150), grow(1.0, 1.2);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<int> s(30);
        for (int& x : s) x = rng() & 1 ? 1 : -1;
        const auto prices = prices_along(sp, s).prices;
        const BarrierSpec narrow{lo(rng), hi(rng), BarrierDirection::KnockOut};
        const double g = grow(rng);
        const BarrierSpec wide{narrow.lower / g, *narrow.upper * g, BarrierDirection::KnockOut};
        const auto a = barrier_exit_index(prices, narrow);
        const auto b = barrier_exit_index(prices, wide);
        if (a) {
            if (b) EXPECT_GE(*b, *a);
        } else {
            EXPECT_FALSE(b.has_value());
        }
    }
}

TEST(BarrierSpec, Validation) {
    EXPECT_THROW((BarrierSpec{110.0, 95.0, BarrierDirection::KnockOut}.validate()), std::invalid_argument);
    try {
        BarrierSpec{110.0, 95.0, BarrierDirection::KnockOut}.validate();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("L < R violated"), std::string::npos);
    }
    EXPECT_THROW((BarrierSpec{-1.0, std::nullopt, BarrierDirection::KnockOut}.validate()),
                 std::invalid_argument);
    EXPECT_NO_THROW(BarrierSpec::none().validate());
    EXPECT_TRUE(BarrierSpec::none().is_unbounded());
    EXPECT_FALSE(BarrierSpec::none().contains(0.0));
    EXPECT_TRUE(BarrierSpec::none().contains(1e300));
}

TEST(StateSpace, LevelOnly) {
    const StepParams sp = step_params(fixtures::standard_model(), 5);
    const auto states = state_space(sp, Reduction::Level, 3);
    std::set<int> levels;
    for (const auto& s : states) levels.insert(s.level);
    EXPECT_EQ(states.size(), 4u);
    EXPECT_EQ(levels, (std::set<int>{-3, -1, 1, 3}));
}

TEST(StateSpace, LevelMaxMatchesPathEnumeration) {
    MarketModel m = fixtures::standard_model();
    m.r = 0.0;
    const StepParams sp = step_params(m, 8);
    for (int k = 0; k <= 8; ++k) {
        std::set<std::pair<int, int>> brute;
        for (std::uint64_t idx = 0; idx < (1ULL << k); ++idx) {
            int level = 0, mx = 0;
            for (int s : fixtures::signs_of(idx, k)) {
                level += s;
                mx = std::max(mx, level);
            }
            brute.insert({level, mx});
        }
        std::set<std::pair<int, int>> got;
        for (const auto& s : state_space(sp, Reduction::LevelMax, k)) {
            EXPECT_GE(s.max_level, s.level);
            EXPECT_GE(s.max_level, 0);
            got.insert({s.level, s.max_level});
        }
        EXPECT_EQ(got, brute) << "k=" << k;
        EXPECT_EQ(state_space(sp, Reduction::LevelMax, k).size(), brute.size());
    }
    // k = 2: (-2,0), (0,0), (0,1), (2,2)
    EXPECT_EQ(state_space(sp, Reduction::LevelMax, 2).size(), 4u);
}

TEST(StateSpace, IntegralIsNotReducible) {
    const StepParams sp = step_params(fixtures::standard_model(), 4);
    EXPECT_THROW(state_space(sp, Reduction::None, 2), NotMarkovReducible);
}
