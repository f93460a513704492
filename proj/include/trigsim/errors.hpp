#pragma once

#include <stdexcept>
#include <string>

namespace trigsim {

// Config / scenario problems. CLI maps these to exit code 2.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Runtime failures inside the engine (dynamics blowing up, indicator
// division by zero, I/O). CLI maps these to exit code 3.
struct EngineError : std::runtime_error {
    explicit EngineError(const std::string& msg) : std::runtime_error(msg) {}
};

// No point on a trade-off curve satisfies the requested objective.
// CLI maps this to exit code 4.
struct InfeasibleObjective : std::runtime_error {
    explicit InfeasibleObjective(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace trigsim
