#pragma once

#include "gbar/embedding.hpp"
#include "gbar/game_tree.hpp"
#include "gbar/lattice.hpp"
#include "gbar/payoffs.hpp"
#include "gbar/shortfall.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gbar {

/// Barrier widening applied to the lattice problem.
///  - knock-out: (L e^{-n^{-1/3}}, R e^{n^{-1/3}})
///  - knock-in:  (L e^{-2 n^{-(1/4 - beta)}}, R e^{2 n^{-(1/4 - beta)}})
enum class WidenMode { Off, KnockOut, KnockIn };

std::string to_string(WidenMode mode);

struct WidenConfig {
    WidenMode mode = WidenMode::Off;
    double beta = 0.0;

    BarrierSpec apply(const BarrierSpec& barrier, int n) const;
    bool operator==(const WidenConfig&) const = default;
};

struct SimConfig {
    std::size_t paths = 10000;
    int dt_divisor = 400;
    std::uint64_t seed = 0;
    bool bridge = true;
    CandidateFlags candidates;

    bool operator==(const SimConfig&) const = default;
};

struct ExperimentConfig {
    MarketModel model;
    BarrierSpec barrier;
    PayoffFamily payoff;
    std::vector<int> n_list;
    bool single_n = true;  ///< given as "n" rather than "n_list"
    std::optional<double> x;
    GridConfig grid;
    SimConfig sim;
    std::optional<Convention> convention;
    WidenConfig widen;
    std::optional<TreeMode> mode;
    bool european = false;

    /// Explicit mode, else recombining when the payoff recombines.
    TreeMode resolved_mode() const;
    Convention resolved_convention() const;

    bool operator==(const ExperimentConfig&) const = default;
};

/// Parses and validates a configuration document. Throws ConfigError naming the
/// offending field; malformed JSON reports line and column.
ExperimentConfig parse_config(const std::string& text);

/// Cross-field checks (also run by parse_config).
void validate_config(const ExperimentConfig& cfg);

nlohmann::json config_to_json(const ExperimentConfig& cfg);
std::string emit_config(const ExperimentConfig& cfg);

/// Shortest decimal representation that reads back to the same double.
std::string format_number(double v);

}  // namespace gbar
