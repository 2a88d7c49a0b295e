#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "harvest/arrival.hpp"
#include "harvest/system.hpp"
#include "harvest/trajectory.hpp"

namespace harvest {

/// How agent trajectories are parameterized for this scenario.
struct AgentSpec {
  Family family = Family::Ellipse;
  std::size_t segments = 1;   // ellipses per agent
  std::size_t harmonics = 5;  // Fourier harmonics (same count in x and y)
  bool operator==(const AgentSpec&) const = default;
};

/// A complete problem instance: the system, how data arrives at each target,
/// the trajectory family, the master seed, and optionally a starting Theta.
struct Scenario {
  SystemParams system;
  std::vector<ArrivalProcess> arrivals;  // one per target
  AgentSpec agent_spec;
  std::uint64_t seed = 0;
  std::optional<TrajectorySet> initial;
};

bool same_fields(const Scenario& a, const Scenario& b);

struct Violation {
  std::string code;
  std::string message;
};

/// Every broken invariant; empty means the scenario is admissible.
std::vector<Violation> validate_scenario(const Scenario& s);

/// Parses and validates. Throws ConfigError for structural problems and
/// ValidationError when invariants fail.
Scenario load_scenario(const std::string& text);
Scenario load_scenario_file(const std::string& path);
/// Structural parse only, no invariant checks.
Scenario parse_scenario(const nlohmann::json& doc);
nlohmann::json export_scenario(const Scenario& s);

/// Applies `key=value` to a config document. Keys are dotted paths into the
/// schema ("sim.horizon", "weights.alpha", "targets.3.q"). The value is parsed
/// as JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Parameter files: {"family": ..., "agents": [{"segments": [{...}, ...]}, ...]}.
/// Fourier anchors are not stored; they are always the base.
nlohmann::json export_params(const TrajectorySet& set);
TrajectorySet parse_params(const nlohmann::json& doc, const Vec2& base);
TrajectorySet load_params_file(const std::string& path, const Vec2& base);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace harvest
