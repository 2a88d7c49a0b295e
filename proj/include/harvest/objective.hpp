#pragma once

#include "harvest/ipa.hpp"
#include "harvest/system.hpp"
#include "harvest/trace.hpp"
#include "harvest/trajectory.hpp"

namespace harvest {

/// Cost of one sample path. J1, J2 and J3 are time averages over [0, T];
/// J3 already carries the idling weight.
struct CostBreakdown {
  double J1 = 0.0;       // weighted target backlog
  double J2 = 0.0;       // weighted base content
  double J3 = 0.0;       // idling penalty
  double Jf = 0.0;       // data left on board at T, divided by T
  double penalty = 0.0;  // base-passing penalty (ellipse family)
  double total = 0.0;

  /// alpha J1 - (1 - alpha) J2 + J3 + Jf + penalty.
  static double combine(double alpha, double j1, double j2, double j3, double jf, double pen) {
    return alpha * j1 - (1.0 - alpha) * j2 + j3 + jf + pen;
  }
};

/// Same components, as gradients over theta.
struct GradientBreakdown {
  Vector J1, J2, J3, Jf, penalty, total;
};

struct PenaltyTerms {
  double value = 0.0;
  Vector gradient;
};

/// M_C times the sum over ellipse segments of the squared base residual, with
/// its gradient. Zero for Fourier trajectories (anchored at the base).
PenaltyTerms base_penalty(const TrajectorySet& traj, const SystemParams& sys);

/// Per-segment squared residuals summed (without M_C).
double constraint_violation(const TrajectorySet& traj, const Vec2& base);

CostBreakdown sample_cost(const Trace& trace, const SystemParams& sys);

/// Gradient assembled from the sensitivity integrals, Z'(T) and the penalty.
GradientBreakdown sample_gradient(const Trace& trace, const IpaResult& ipa, const SystemParams& sys);

}  // namespace harvest
