#pragma once

#include <stdexcept>
#include <string>

namespace gbar {

/// Raised when a configuration document is malformed or violates a
/// cross-field constraint. `field()` names the offending key path.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when a request exceeds a memory or enumeration bound
/// (e.g. path-tree depth beyond the supported limit).
class BudgetError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a recombining lattice is requested for a payoff whose
/// state does not recombine (integral families).
class NotMarkovReducible : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace gbar
