#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "harvest/geometry.hpp"

namespace harvest {

enum class Family { Ellipse, Fourier };

const char* to_string(Family f);
Family family_from_string(const std::string& s);

/// Ellipse with center (A, B), semi-axes a and b, orientation phi.
/// Flat parameter order: A, B, a, b, phi.
struct EllipseParams {
  double A = 0.0, B = 0.0, a = 1.0, b = 1.0, phi = 0.0;
  static constexpr std::size_t kSize = 5;
  bool operator==(const EllipseParams&) const = default;
};

/// Closed-curve Fourier representation anchored so that s(0) equals `anchor`.
/// The y base frequency is fixed at 1; the constant terms are derived from the
/// anchor and are not free parameters.
/// Flat parameter order: fx, a_1..a_Gx, b_1..b_Gy, phix_1..phix_Gx, phiy_1..phiy_Gy.
struct FourierParams {
  double fx = 1.0;
  std::vector<double> ax, by, phix, phiy;
  Vec2 anchor = Vec2::Zero();

  std::size_t harmonics_x() const { return ax.size(); }
  std::size_t harmonics_y() const { return by.size(); }
  std::size_t size() const { return 1 + 2 * ax.size() + 2 * by.size(); }
  double a0() const;
  double b0() const;
  bool operator==(const FourierParams&) const = default;
};

using Curve = std::variant<EllipseParams, FourierParams>;

/// How Fourier position partials treat the derived constant terms.
enum class FourierChain {
  Chained,   ///< include d(a0)/d(theta) through the anchoring constraint
  Unchained  ///< constant terms held fixed (partials of the free series only)
};

std::size_t parameter_count(const Curve& c);
Vector to_vector(const Curve& c);
/// Copy of `shape` with its free parameters replaced by `values` (same length).
Curve with_values(const Curve& shape, const Vector& values);

Vec2 position(const Curve& c, double rho);
/// ds/drho.
Vec2 phase_tangent(const Curve& c, double rho);
/// d^2 s/drho^2.
Vec2 phase_curvature(const Curve& c, double rho);
/// drho/dt for unit speed. Throws DegenerateTrajectory when |ds/drho| vanishes.
double phase_rate(const Curve& c, double rho);
/// ds/dt; unit length by construction. The sign convention is that of
/// increasing rho: counter-clockwise for positive semi-axes.
Vec2 velocity(const Curve& c, double rho);

/// ds/dtheta at fixed rho, 2 x parameter_count.
Jacobian2 param_partials(const Curve& c, double rho, FourierChain chain = FourierChain::Chained);
/// d(ds/drho)/dtheta at fixed rho.
Jacobian2 tangent_partials(const Curve& c, double rho);
/// d(drho/dt)/dtheta at fixed rho.
Eigen::RowVectorXd phase_rate_partials(const Curve& c, double rho);
/// d(drho/dt)/drho.
double phase_rate_slope(const Curve& c, double rho);

/// Squared algebraic residual of the base lying on the ellipse, with its gradient.
struct BasePenalty {
  double value = 0.0;
  Eigen::Matrix<double, 5, 1> gradient = Eigen::Matrix<double, 5, 1>::Zero();
};
BasePenalty ellipse_base_penalty(const EllipseParams& e, const Vec2& base);

/// Time to traverse one full revolution (rho from 0 to 2*pi) at unit speed.
double revolution_time(const Curve& c);

/// One agent's trajectory as a sequence of curves; each is followed for one
/// revolution starting at rho = 0, and the last repeats indefinitely.
struct SegmentedTrajectory {
  std::vector<Curve> segments;
  bool operator==(const SegmentedTrajectory&) const = default;
};

struct ActiveSegment {
  std::size_t segment = 0;
  double rho = 0.0;
};
/// Active segment and local phase at time t (phase wrapped into [0, 2*pi) once
/// the last segment starts repeating).
ActiveSegment active_segment(const SegmentedTrajectory& traj, double t);

/// Trajectories of all agents; defines the flattened parameter vector theta.
struct TrajectorySet {
  Family family = Family::Ellipse;
  std::vector<SegmentedTrajectory> agents;

  std::size_t size() const;
  std::size_t agent_offset(std::size_t agent) const;
  std::size_t agent_size(std::size_t agent) const;
  std::size_t segment_offset(std::size_t agent, std::size_t segment) const;
  Vector flatten() const;
  /// Same layout, new values.
  TrajectorySet with_values(const Vector& theta) const;
  /// Human-readable name of each flattened component, e.g. "agent1.seg2.phi".
  std::vector<std::string> parameter_names() const;
  bool operator==(const TrajectorySet&) const = default;
};

/// Wraps ellipse orientations into [0, 2*pi); the parameterized path is unchanged.
void normalize_angles(TrajectorySet& set);

}  // namespace harvest
