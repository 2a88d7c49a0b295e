#include "harvest/objective.hpp"

#include <variant>

#include "harvest/errors.hpp"

namespace harvest {

PenaltyTerms base_penalty(const TrajectorySet& traj, const SystemParams& sys) {
  PenaltyTerms out{0.0, Vector::Zero(static_cast<Eigen::Index>(traj.size()))};
  for (std::size_t j = 0; j < traj.agents.size(); ++j)
    for (std::size_t e = 0; e < traj.agents[j].segments.size(); ++e) {
      const auto* ell = std::get_if<EllipseParams>(&traj.agents[j].segments[e]);
      if (!ell) continue;
      const BasePenalty p = ellipse_base_penalty(*ell, sys.base);
      out.value += sys.m_constraint * p.value;
      out.gradient.segment<EllipseParams::kSize>(static_cast<Eigen::Index>(traj.segment_offset(j, e))) +=
          sys.m_constraint * p.gradient;
    }
  return out;
}

double constraint_violation(const TrajectorySet& traj, const Vec2& base) {
  double sum = 0.0;
  for (const auto& a : traj.agents)
    for (const auto& c : a.segments)
      if (const auto* ell = std::get_if<EllipseParams>(&c)) sum += ellipse_base_penalty(*ell, base).value;
  return sum;
}

CostBreakdown sample_cost(const Trace& trace, const SystemParams& sys) {
  if (!trace.complete) throw NumericalError("IncompleteTrace: cost needs a trace that reaches the horizon");
  const double T = trace.horizon;
  CostBreakdown c;
  c.J1 = trace.integrals.weighted_backlog / T;
  c.J2 = trace.integrals.weighted_base / T;
  c.J3 = sys.m_idle * trace.integrals.idle / T;
  c.Jf = trace.final_state.Z.size() ? trace.final_state.Z.sum() / T : 0.0;
  c.penalty = base_penalty(trace.trajectories, sys).value;
  c.total = CostBreakdown::combine(sys.alpha, c.J1, c.J2, c.J3, c.Jf, c.penalty);
  return c;
}

GradientBreakdown sample_gradient(const Trace& trace, const IpaResult& ipa, const SystemParams& sys) {
  const double T = trace.horizon;
  GradientBreakdown g;
  g.J1 = ipa.backlog.transpose() / T;
  g.J2 = ipa.base.transpose() / T;
  g.J3 = sys.m_idle * (ipa.idle + ipa.idle_jumps).transpose() / T;
  g.Jf = ipa.final.Z.colwise().sum().transpose() / T;
  g.penalty = base_penalty(trace.trajectories, sys).gradient;
  g.total = sys.alpha * g.J1 - (1.0 - sys.alpha) * g.J2 + g.J3 + g.Jf + g.penalty;
  return g;
}

}  // namespace harvest
