#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "harvest/geometry.hpp"

namespace harvest {

/// Normalized collection rate as a function of distance. Implementations must
/// be non-increasing in D, zero for D >= r and continuous.
class ProximityModel {
 public:
  virtual ~ProximityModel() = default;
  virtual double rate(double distance, double range) const = 0;
  /// dp/dD, taking the one-sided value from inside the range at D == r.
  virtual double slope(double distance, double range) const = 0;
};

/// p = max(0, 1 - D/r).
class LinearRamp final : public ProximityModel {
 public:
  double rate(double distance, double range) const override {
    return distance < range ? 1.0 - distance / range : 0.0;
  }
  double slope(double distance, double range) const override {
    return distance <= range ? -1.0 / range : 0.0;
  }
};

/// Everything about the system except how data arrives: geometry, service
/// rates, ranges, cost weights and integration settings.
struct SystemParams {
  double l1 = 10.0, l2 = 10.0;
  Vec2 base = Vec2::Zero();
  std::vector<Vec2> targets;
  std::vector<double> q;  // per-target weights
  std::size_t agents = 1;

  Matrix range;  // M x N collection ranges
  Vector base_range;  // N
  Matrix mu;     // M x N
  Matrix beta;   // M x N

  double alpha = 0.5;
  double m_idle = 1.0;
  double m_constraint = 1e3;

  double horizon = 100.0;
  double step = 1e-3;
  double event_tol = 1e-9;

  std::shared_ptr<const ProximityModel> proximity = std::make_shared<LinearRamp>();

  std::size_t target_count() const { return targets.size(); }
  std::size_t agent_count() const { return agents; }
};

}  // namespace harvest
