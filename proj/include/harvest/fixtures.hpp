#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "harvest/scenario.hpp"

namespace harvest {

/// A published or derived number kept for comparison. Only gated values are
/// acceptance conditions; the others are logged next to what a run achieves.
struct ReferenceValue {
  std::string label;
  double value = 0.0;
  bool gated = false;
};

struct Fixture {
  std::string name;
  std::string description;
  nlohmann::json config;  // scenario document, loadable by the CLI
  Scenario scenario;
  std::vector<ReferenceValue> references;
  double conservation_bound = 1e-6;  // relative to 1 + integral of sigma
};

std::vector<std::string> fixture_names();
/// Names of the small oracle scenarios (a handful of events each).
std::vector<std::string> desk_fixture_names();
/// Throws std::invalid_argument for an unknown name.
Fixture fixture(const std::string& name);

}  // namespace harvest
