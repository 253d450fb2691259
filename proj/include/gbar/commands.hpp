#pragma once

#include "gbar/config.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>

namespace gbar {

struct RunOptions {
    std::optional<std::string> out_dir;  ///< CSV files are written here when set
    std::optional<std::uint64_t> seed;   ///< overrides sim.seed
    int threads = 1;
};

/// Dispatches one of price, shortfall, hedge, simulate, converge. Throws
/// ConfigError for inputs the command cannot use and BudgetError past enumeration
/// bounds.
nlohmann::json run_command(const std::string& command, const ExperimentConfig& cfg,
                           const RunOptions& options = {});

/// JSON text as printed by the CLI.
std::string render(const nlohmann::json& result);

}  // namespace gbar
