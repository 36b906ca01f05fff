#pragma once

// JSON run configuration. Unknown keys are rejected so typos cannot silently
// fall back to defaults. Field names are lowercase snake case throughout.

#include <cstdint>
#include <optional>
#include <string>

#include "railsim/abc.hpp"
#include "railsim/multirate.hpp"
#include "railsim/schedule.hpp"

namespace railsim {

struct IntegrationConfig {
    double h = 1e-4;
    double duration = 10.0;
    std::array<int, kNumGroups> divisors{5, 1, 1};  // carriage runs slow
    int output_stride = 10;
};

struct SimConfig {
    VehicleParams vehicle = VehicleParams::defaults();
    TrackExcitation track = TrackExcitation::defaults();
    IntegrationConfig integration;
    std::optional<SchedulingProblem> scheduling;
    AbcParams abc;
    std::uint64_t seed = 0;
};

SimConfig parse_config(const std::string& text);
std::string serialize_config(const SimConfig& cfg);

}  // namespace railsim
