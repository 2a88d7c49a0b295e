#pragma once

#include <cstddef>
#include <vector>

#include "harvest/geometry.hpp"
#include "harvest/system.hpp"

namespace harvest {

inline constexpr int kNoAgent = -1;

/// Continuous state. `segment` and `rho` locate each agent on its trajectory;
/// `sigma` is the arrival rate in force (empty when not recorded).
struct HybridState {
  double t = 0.0;
  Vector X;  // M
  Matrix Z;  // M x N
  Vector Y;  // M
  std::vector<Vec2> s;
  Vector rho;
  std::vector<std::size_t> segment;
  Vector sigma;

  static HybridState zero(std::size_t m, std::size_t n);
};

struct ConnectionMap {
  std::vector<int> target_agent;  // agent serving each target, or kNoAgent
  std::vector<char> at_base;      // per agent

  bool operator==(const ConnectionMap&) const = default;
};

/// Discrete part of the hybrid state. Held fixed between events.
struct Modes {
  ConnectionMap conn;
  std::vector<char> in_range;  // M x N, row-major: D_ij < r_ij
  std::vector<char> x_free;    // X_i follows sigma - mu P instead of being pinned at 0
  std::vector<char> z_free;    // M x N, row-major: Z_ij > 0 (may be drained)

  bool operator==(const Modes&) const = default;
};

struct FlowRates {
  Vector X;
  Matrix Z;
  Vector Y;
};

/// max(0, 1 - D/r) for a target or base at w and an agent at s.
double proximity_rate(const Vec2& w, const Vec2& s, double r);

/// First-come arbitration: a target keeps its agent while that agent stays in
/// range; otherwise the lowest-index agent in range takes it.
ConnectionMap assign_connections(const HybridState& state, const SystemParams& sys, const ConnectionMap& prev);

/// Connections plus range flags; x_free/z_free read off the queue contents.
Modes classify(const HybridState& state, const SystemParams& sys, const ConnectionMap& prev);

/// Right-hand side with explicit modes.
FlowRates queue_flow_rates(const HybridState& state, const Modes& modes, const SystemParams& sys);
/// Right-hand side with modes inferred from the state (X_i = 0 exactly means empty).
FlowRates queue_flow_rates(const HybridState& state, const ConnectionMap& conn, const SystemParams& sys);

inline std::size_t pair_index(std::size_t i, std::size_t j, std::size_t n) { return i * n + j; }

}  // namespace harvest
