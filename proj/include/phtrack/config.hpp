#pragma once

#include "phtrack/scenarios.hpp"

#include <cstdint>
#include <string>

namespace phtrack {

/// Scenario configuration read from an INI document with sections [plant],
/// [design], [reference], [disturbance], [sim] and [domain].
struct ScenarioConfig {
    std::string model = "ball_on_wheel";
    BallOnWheelParams ball;
    FullyActuatedParams fully_actuated;
    BuildOptions build;
    Index certify_samples = 10000;
    /// Norm of the random initial perturbation used for the pairwise run.
    double perturbation = 0.1;
    std::string origin;
    std::string hash;
};

ScenarioConfig parse_config(const std::string& text, const std::string& origin = "<string>");
ScenarioConfig load_config(const std::string& path);

Scenario build_scenario(const ScenarioConfig& config, bool enforce_gates = true);

std::string sha256_hex(const std::string& data);

/// "1,2;3,4" → 2×2; "1,2" → 1×2.
Matrix parse_matrix(const std::string& text);
Vector parse_vector(const std::string& text);

}  // namespace phtrack
