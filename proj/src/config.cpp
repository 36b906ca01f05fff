#include "railsim/config.hpp"

#include <json.hpp>

namespace railsim {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const json::exception& e) {
    throw ParameterError(std::string("config: ") + e.what());
}

void read_vehicle(const json& j, VehicleParams& v) {
    for (const auto& [key, value] : j.items()) {
        if (key == "m_k") v.m_k = value.get<double>();
        else if (key == "j_k") v.J_k = value.get<double>();
        else if (key == "m_t") v.m_t = value.get<double>();
        else if (key == "j_t") v.J_t = value.get<double>();
        else if (key == "a_k") v.a_k = value.get<double>();
        else if (key == "a_t") v.a_t = value.get<double>();
        else if (key == "c_k") v.c_k = value.get<double>();
        else if (key == "b_k") v.b_k = value.get<double>();
        else if (key == "c_t") v.c_t = value.get<double>();
        else if (key == "b_t") v.b_t = value.get<double>();
        else throw ValidationError("unknown vehicle key: " + key);
    }
    v.validate();
}

void read_track(const json& j, TrackExcitation& t) {
    for (const auto& [key, value] : j.items()) {
        if (key == "a1") t.A1 = value.get<double>();
        else if (key == "a2") t.A2 = value.get<double>();
        else if (key == "l_rail") t.L_rail = value.get<double>();
        else if (key == "v") t.V = value.get<double>();
        else throw ValidationError("unknown track key: " + key);
    }
    t.validate();
}

void read_integration(const json& j, IntegrationConfig& c) {
    for (const auto& [key, value] : j.items()) {
        if (key == "h") c.h = value.get<double>();
        else if (key == "duration") c.duration = value.get<double>();
        else if (key == "divisors") {
            const auto v = value.get<std::vector<int>>();
            if (v.size() != kNumGroups)
                throw ValidationError("divisors: expected " + std::to_string(kNumGroups) +
                                      " entries");
            std::copy(v.begin(), v.end(), c.divisors.begin());
        } else if (key == "output_stride")
            c.output_stride = value.get<int>();
        else
            throw ValidationError("unknown integration key: " + key);
    }
    if (!(c.h > 0)) throw ValidationError("h: must be strictly positive");
    if (!(c.duration >= c.h)) throw ValidationError("duration: must be >= h");
    if (c.output_stride < 1) throw ValidationError("output_stride: must be >= 1");
    RateGroups{c.divisors}.validate();
}

void read_abc(const json& j, AbcParams& a) {
    for (const auto& [key, value] : j.items()) {
        if (key == "colony_size") a.colony_size = value.get<int>();
        else if (key == "abandonment_limit") a.abandonment_limit = value.get<int>();
        else if (key == "max_iterations") a.max_iterations = value.get<int>();
        else if (key == "seed") a.seed = value.get<std::uint64_t>();
        else throw ValidationError("unknown abc key: " + key);
    }
    a.validate();
}

}  // namespace

SimConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        parse_fail(e);
    }
    if (!j.is_object()) throw ParameterError("config: top level must be a JSON object");

    SimConfig cfg;
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "vehicle") read_vehicle(value, cfg.vehicle);
            else if (key == "track") read_track(value, cfg.track);
            else if (key == "integration") read_integration(value, cfg.integration);
            else if (key == "scheduling") cfg.scheduling = problem_from_json(value);
            else if (key == "abc") read_abc(value, cfg.abc);
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else throw ValidationError("unknown config key: " + key);
        }
    } catch (const json::exception& e) {
        parse_fail(e);
    }
    return cfg;
}

std::string serialize_config(const SimConfig& cfg) {
    json j;
    j["vehicle"] = {{"m_k", cfg.vehicle.m_k}, {"j_k", cfg.vehicle.J_k},
                    {"m_t", cfg.vehicle.m_t}, {"j_t", cfg.vehicle.J_t},
                    {"a_k", cfg.vehicle.a_k}, {"a_t", cfg.vehicle.a_t},
                    {"c_k", cfg.vehicle.c_k}, {"b_k", cfg.vehicle.b_k},
                    {"c_t", cfg.vehicle.c_t}, {"b_t", cfg.vehicle.b_t}};
    j["track"] = {{"a1", cfg.track.A1}, {"a2", cfg.track.A2},
                  {"l_rail", cfg.track.L_rail}, {"v", cfg.track.V}};
    j["integration"] = {{"h", cfg.integration.h},
                        {"duration", cfg.integration.duration},
                        {"divisors", cfg.integration.divisors},
                        {"output_stride", cfg.integration.output_stride}};
    if (cfg.scheduling) j["scheduling"] = problem_to_json(*cfg.scheduling);
    j["abc"] = {{"colony_size", cfg.abc.colony_size},
                {"abandonment_limit", cfg.abc.abandonment_limit},
                {"max_iterations", cfg.abc.max_iterations},
                {"seed", cfg.abc.seed}};
    j["seed"] = cfg.seed;
    return j.dump(2);
}

}  // namespace railsim
