#pragma once

#include "gbar/hedge.hpp"
#include "gbar/lattice.hpp"
#include "gbar/payoffs.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace gbar {

enum class Measure { Objective, Martingale };

std::string to_string(Measure m);

/// Drift of B* under the chosen measure.
double drift(const MarketModel& model, Measure m);

struct EmbeddingConfig {
    int n = 1;
    Measure measure = Measure::Objective;
    int dt_divisor = 400;  ///< dt = (T / n) / dt_divisor
    /// Detect excursions between grid points with the Brownian-bridge crossing
    /// probability (one uniform draw when the probability is not negligible).
    bool bridge = true;

    double dt(const MarketModel& model) const;
    void validate() const;
};

/// One simulated path of B* on the grid i * dt, i = 0..N (N dt = T), together with
/// the embedded exit times theta_0 = 0 < theta_1 < ... that fall in [0, T].
///
/// Exit detection: first grid point with |B* - anchor| >= h, crossing time by linear
/// interpolation of the overshoot; a bridge crossing between grid points is dated at
/// the step midpoint. The anchor then moves by exactly +-h.
struct EmbeddedPath {
    double dt = 0.0;
    std::vector<double> b;        ///< B* at grid points
    std::vector<double> theta;    ///< theta_0..theta_m, all <= T
    std::vector<int> signs;       ///< sign of each embedded increment (size m)
    std::vector<double> anchors;  ///< B*_{theta_k}, snapped to multiples of h
};

/// Independent stream per (seed, path index).
std::uint64_t path_seed(std::uint64_t seed, std::uint64_t index);

EmbeddedPath simulate_path(const MarketModel& model, const EmbeddingConfig& cfg, std::uint64_t seed,
                           std::uint64_t index);

std::vector<EmbeddedPath> simulate_embedding(const MarketModel& model, const EmbeddingConfig& cfg,
                                             std::size_t paths, std::uint64_t seed);

/// Sample mean and standard error of per-path values, summed in index order.
struct Estimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t count = 0;
};
Estimate summarize_samples(std::span<const double> samples);

/// First-exit statistics: the path is simulated until theta_1, then B*_T is
/// completed with one exact Gaussian increment.
struct ExitStatistics {
    Estimate up_frequency;          ///< P(first increment = +h)
    Estimate theta1;                ///< E theta_1
    Estimate discounted_terminal;   ///< E S~_T
};
ExitStatistics embedding_statistics(const MarketModel& model, const EmbeddingConfig& cfg,
                                    std::size_t paths, std::uint64_t seed, int threads = 1);

/// phi_n: T ^ theta_k for a rule value k < n, T for k >= n.
double map_stopping(int k, const EmbeddedPath& path, const MarketModel& model, int n);

/// psi_n(pi): the discrete strategy evaluated on the embedded signs and run against
/// the continuous discounted stock between exit times, frozen after theta_n.
struct PortfolioTrajectory {
    std::vector<double> theta;   ///< theta_0..theta_m
    std::vector<double> value;   ///< V~ at theta_0..theta_m (equal to the lattice values)
    std::vector<double> gamma;   ///< stock units held over (theta_k, theta_{k+1}], k = 0..m
    std::vector<double> s_disc;  ///< S~ at theta_k (snapped)
    int n = 0;
    int cancel_index = 0;        ///< discrete cancel index seen on the embedded signs
    double kappa = 0.0;
    double s0 = 0.0;
    const EmbeddedPath* path = nullptr;

    double value_at(double t) const;
};
PortfolioTrajectory map_strategy(const HedgeStrategy& strategy, const EmbeddedPath& path,
                                 const MarketModel& model);

/// Payoff functionals of a simulated path: F, G at time t on the piecewise-constant
/// grid path, and the grid-monitored barrier exit time.
class PathPayoffs {
public:
    PathPayoffs(const MarketModel& model, const PayoffFamily& family, const BarrierSpec& barrier,
                const EmbeddedPath& path);

    /// Grid time of the first exit from the open interval, +inf if none on [0, T].
    double exit_time() const { return exit_time_; }
    Intrinsic at(double t) const;
    /// Q(s, t): seller cancels at s, buyer exercises at t, discounted; ties pay the buyer leg.
    double discounted(double s, double t, Convention convention) const;

private:
    const MarketModel& model_;
    const PayoffFamily& family_;
    const BarrierSpec& barrier_;
    const EmbeddedPath& path_;
    std::vector<double> log_price_;
    std::vector<double> running_max_log_;
    std::vector<double> integral_;
    int exit_index_ = -1;
    double exit_time_ = 0.0;

    std::size_t grid_index(double t) const;
};

double bs_discounted_payoff(const MarketModel& model, const PayoffFamily& family,
                            const BarrierSpec& barrier, const EmbeddedPath& path, double s,
                            double t, Convention convention);

struct CandidateFlags {
    bool buyer_rule = true;     ///< phi_n(tau*) when a buyer rule is supplied
    bool deterministic = true;  ///< j T / 10, j = 0..10
    bool barrier_time = true;   ///< tau_I ^ T
    bool theta = true;          ///< theta_k ^ T, k in {1, n/4, n/2, 3n/4, n}

    bool operator==(const CandidateFlags&) const = default;
};

struct MonteCarloConfig {
    std::size_t paths = 10000;
    int dt_divisor = 400;
    std::uint64_t seed = 0;
    int threads = 1;
    bool bridge = true;
    CandidateFlags candidates;
};

struct CandidateEstimate {
    std::string name;
    Estimate estimate;
};

/// Shortfall sup_tau E(Q(sigma, tau) - V~_{sigma ^ tau})^+ replaced by a max over a
/// finite candidate family: a statistical lower bound of the continuous risk.
struct ShortfallEstimate {
    std::vector<CandidateEstimate> candidates;
    std::size_t argmax = 0;
    const CandidateEstimate& best() const { return candidates[argmax]; }
};

using BuyerRule = std::function<int(std::span<const int> signs)>;

ShortfallEstimate estimate_shortfall_mc(const MarketModel& model, const HedgeStrategy& strategy,
                                        const PayoffFamily& family, const BarrierSpec& barrier,
                                        Convention convention, const BuyerRule& buyer_rule,
                                        const MonteCarloConfig& cfg);

/// Runs body(i) for i in [0, count) on `threads` workers with contiguous blocks.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& body);

}  // namespace gbar
