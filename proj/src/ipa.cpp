#include "harvest/ipa.hpp"

#include <cmath>
#include <string>

#include "harvest/errors.hpp"
#include "harvest/idling.hpp"

namespace harvest {

namespace {

constexpr double kMinDenominator = 1e-8;

using Row = Eigen::RowVectorXd;

const Curve& curve_of(const TrajectorySet& traj, std::size_t j, std::size_t seg) {
  return traj.agents[j].segments[seg];
}

std::string describe(const EventRecord& ev) {
  std::string s = to_string(ev.kind);
  if (ev.target >= 0) s += " i=" + std::to_string(ev.target + 1);
  if (ev.agent >= 0) s += " j=" + std::to_string(ev.agent + 1);
  return s + " at t=" + std::to_string(ev.time);
}

// tau' for a distance guard |s_j - w| = r: -(n . s') / (n . ds/dt).
Row crossing_derivative(const EventRecord& ev, const Vec2& w, std::size_t j, const SensitivityState& sens,
                        const TrajectorySet& traj, IpaMode mode) {
  const std::size_t seg = ev.state.segment[j];
  const double rho = ev.state.rho[j];
  const Curve& c = curve_of(traj, j, seg);
  const Vec2 d = ev.state.s[j] - w;
  const double dist = d.norm();
  if (dist == 0.0) throw TangentialCrossing("TangentialCrossing: " + describe(ev) + " (agent on the station)");
  const Vec2 n = d / dist;
  const double den = n.dot(velocity(c, rho));
  if (std::abs(den) < kMinDenominator)
    throw TangentialCrossing("TangentialCrossing: " + describe(ev) + " (range boundary grazed)");
  const Matrix sp = position_sensitivity(traj, j, seg, rho, sens.rho.row(j), mode);
  return -(n.transpose() * sp) / den;
}

// Phases plus sensitivities: the state carried by the inter-event integrator.
struct Carry {
  Vector rho;
  SensitivityState s;
};

void axpy(Carry& out, const Carry& base, double h, const Carry& d) {
  out.rho = base.rho + h * d.rho;
  out.s.X = base.s.X + h * d.s.X;
  out.s.Z = base.s.Z + h * d.s.Z;
  out.s.Y = base.s.Y + h * d.s.Y;
  out.s.rho = base.s.rho + h * d.s.rho;
}

Carry derivative(const Carry& c, const std::vector<std::size_t>& segments, const Modes& md, const TrajectorySet& traj,
                 const SystemParams& sys, IpaMode mode) {
  const std::size_t m = sys.target_count(), n = sys.agent_count();
  const auto p = c.s.X.cols();
  Carry d{Vector::Zero(n), SensitivityState{Matrix::Zero(m, p), Matrix::Zero(m * n, p), Matrix::Zero(m, p),
                                            Matrix::Zero(n, p)}};
  std::vector<Vec2> pos(n);
  std::vector<Matrix> sp(n);
  for (std::size_t j = 0; j < n; ++j) {
    const Curve& cv = curve_of(traj, j, segments[j]);
    const double rho = c.rho[j];
    pos[j] = position(cv, rho);
    sp[j] = position_sensitivity(traj, j, segments[j], rho, c.s.rho.row(j), mode);
    d.rho[j] = phase_rate(cv, rho);
    if (mode == IpaMode::Augmented) {
      const auto off = static_cast<Eigen::Index>(traj.segment_offset(j, segments[j]));
      const Row pr = phase_rate_partials(cv, rho);
      d.s.rho.row(j) = phase_rate_slope(cv, rho) * c.s.rho.row(j);
      d.s.rho.row(j).segment(off, pr.size()) += pr;
    }
  }

  const ProximityModel& model = *sys.proximity;
  for (std::size_t i = 0; i < m; ++i) {
    const int jc = md.conn.target_agent[i];
    if (jc == kNoAgent || !md.x_free[i]) continue;  // pinned or unserved: X' and Z' hold
    const auto j = static_cast<std::size_t>(jc);
    const Vec2 off = pos[j] - sys.targets[i];
    const double dist = off.norm();
    if (dist == 0.0) continue;
    const double slope = model.slope(std::min(dist, sys.range(i, j)), sys.range(i, j));
    const Row pp = slope * (off / dist).transpose() * sp[j];
    d.s.X.row(i) -= sys.mu(i, j) * pp;
    d.s.Z.row(pair_index(i, j, n)) += sys.mu(i, j) * pp;
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!md.conn.at_base[j]) continue;
    const Vec2 off = pos[j] - sys.base;
    const double dist = off.norm();
    if (dist == 0.0) continue;
    const double slope = model.slope(std::min(dist, sys.base_range[j]), sys.base_range[j]);
    const Row pb = slope * (off / dist).transpose() * sp[j];
    for (std::size_t i = 0; i < m; ++i) {
      const auto k = pair_index(i, j, n);
      if (!md.z_free[k]) continue;
      d.s.Z.row(k) -= sys.beta(i, j) * pb;
      d.s.Y.row(i) += sys.beta(i, j) * pb;
    }
  }
  return d;
}

}  // namespace

const char* to_string(IpaMode m) { return m == IpaMode::Paper ? "paper" : "augmented"; }

IpaMode ipa_mode_from_string(const std::string& s) {
  if (s == "paper") return IpaMode::Paper;
  if (s == "augmented") return IpaMode::Augmented;
  throw ConfigError("mode", "expected 'paper' or 'augmented', got '" + s + "'");
}

SensitivityState SensitivityState::zero(std::size_t m, std::size_t n, std::size_t p) {
  const auto M = static_cast<Eigen::Index>(m), N = static_cast<Eigen::Index>(n), P = static_cast<Eigen::Index>(p);
  return {Matrix::Zero(M, P), Matrix::Zero(M * N, P), Matrix::Zero(M, P), Matrix::Zero(N, P)};
}

Matrix position_sensitivity(const TrajectorySet& traj, std::size_t agent, std::size_t segment, double rho,
                            const Eigen::RowVectorXd& rho_sens, IpaMode mode) {
  const Curve& c = curve_of(traj, agent, segment);
  Matrix sp = Matrix::Zero(2, static_cast<Eigen::Index>(traj.size()));
  const Jacobian2 pp = param_partials(c, rho);
  sp.middleCols(static_cast<Eigen::Index>(traj.segment_offset(agent, segment)), pp.cols()) = pp;
  if (mode == IpaMode::Augmented) sp += phase_tangent(c, rho) * rho_sens;
  return sp;
}

Eigen::RowVectorXd proximity_partial(const Vec2& w, const Vec2& s, const Matrix& sp, double r,
                                     const ProximityModel& model) {
  const Vec2 d = s - w;
  const double dist = d.norm();
  if (dist == 0.0) return Row::Zero(sp.cols());
  return model.slope(dist, r) * (d / dist).transpose() * sp;
}

Eigen::RowVectorXd event_time_derivative(const EventRecord& ev, const SensitivityState& sens,
                                         const TrajectorySet& traj, const SystemParams& sys, IpaMode mode) {
  const auto p = static_cast<Eigen::Index>(traj.size());
  if (ev.induced) return Row::Zero(p);
  const std::size_t n = sys.agent_count();
  const auto i = static_cast<std::size_t>(std::max(ev.target, 0));
  const auto j = static_cast<std::size_t>(std::max(ev.agent, 0));

  switch (ev.kind) {
    case EventKind::XiZero: {
      const double den = ev.flow_before.X[i];  // sigma - mu P
      if (std::abs(den) < kMinDenominator) throw TangentialCrossing("TangentialCrossing: " + describe(ev));
      return -sens.X.row(i) / den;
    }
    case EventKind::ZetaZero: {
      const double den = ev.flow_before.Z(i, j);  // -beta P_B
      if (std::abs(den) < kMinDenominator) throw TangentialCrossing("TangentialCrossing: " + describe(ev));
      return -sens.Z.row(pair_index(i, j, n)) / den;
    }
    case EventKind::XiPlus: {
      if (!ev.endogenous) return Row::Zero(p);
      // sigma - mu P crosses zero; only the distance moves.
      const int jc = ev.modes_before.conn.target_agent[i];
      if (jc == kNoAgent) return Row::Zero(p);
      return crossing_derivative(ev, sys.targets[i], static_cast<std::size_t>(jc), sens, traj, mode);
    }
    case EventKind::DeltaZero:
    case EventKind::DeltaPlus:
      return crossing_derivative(ev, sys.targets[i], j, sens, traj, mode);
    case EventKind::BaseZero:
    case EventKind::BasePlus:
      return crossing_derivative(ev, sys.base, j, sens, traj, mode);
    case EventKind::Kappa:
      return Row::Zero(p);
    case EventKind::SegmentSwitch: {
      if (mode == IpaMode::Paper) return Row::Zero(p);
      // The old phase reaches 2 pi.
      const Curve& c = curve_of(traj, j, ev.state.segment[j]);
      return -sens.rho.row(j) / phase_rate(c, ev.state.rho[j]);
    }
  }
  return Row::Zero(p);
}

SensitivityState apply_event_jump(const EventRecord& ev, const SensitivityState& sens,
                                  const Eigen::RowVectorXd& tau_p, const TrajectorySet& traj, IpaMode mode) {
  if (ev.induced) return sens;
  const std::size_t m = static_cast<std::size_t>(sens.X.rows());
  const std::size_t n = static_cast<std::size_t>(sens.rho.rows());
  SensitivityState out = sens;

  const auto i = static_cast<std::size_t>(std::max(ev.target, 0));
  const auto j = static_cast<std::size_t>(std::max(ev.agent, 0));

  // Range crossings and X leaving 0 change no flow in the limit: the crossing
  // pair's rate vanishes on the boundary and xi+ fires where sigma = mu p. Only
  // a handover moves the newcomer's rate from Z back to X.
  switch (ev.kind) {
    case EventKind::DeltaPlus:
      if (ev.handover != kNoAgent) {
        const auto k = pair_index(i, static_cast<std::size_t>(ev.handover), n);
        const double rate = ev.flow_after.Z(i, static_cast<std::size_t>(ev.handover));
        out.X.row(i) += rate * tau_p;
        out.Z.row(k) -= rate * tau_p;
      }
      return out;
    case EventKind::DeltaZero:
    case EventKind::BasePlus:
    case EventKind::BaseZero:
    case EventKind::XiPlus:
      return out;
    default:
      break;
  }

  // Otherwise x'(tau+) = x'(tau-) + [f(tau-) - f(tau+)] tau'.
  const bool moves = (tau_p.array() != 0.0).any();
  if (moves) {
    const FlowRates& a = ev.flow_before;
    const FlowRates& b = ev.flow_after;
    for (std::size_t i = 0; i < m; ++i) {
      out.X.row(i) += (a.X[i] - b.X[i]) * tau_p;
      out.Y.row(i) += (a.Y[i] - b.Y[i]) * tau_p;
      for (std::size_t j = 0; j < n; ++j) out.Z.row(pair_index(i, j, n)) += (a.Z(i, j) - b.Z(i, j)) * tau_p;
    }
  }

  switch (ev.kind) {
    case EventKind::XiZero: {
      const int jc = ev.modes_before.conn.target_agent[i];
      if (jc != kNoAgent) {
        const auto k = pair_index(i, static_cast<std::size_t>(jc), n);
        out.Z.row(k) = sens.Z.row(k) + sens.X.row(i);
      }
      out.X.row(i).setZero();
      break;
    }
    case EventKind::ZetaZero: {
      const auto k = pair_index(i, j, n);
      out.Y.row(i) = sens.Y.row(i) + sens.Z.row(k);
      out.Z.row(k).setZero();
      break;
    }
    case EventKind::SegmentSwitch:
      // The new phase starts at zero whenever the switch happens.
      if (mode == IpaMode::Augmented) {
        const Curve& c = curve_of(traj, j, ev.after.segment[j]);
        out.rho.row(j) = -phase_rate(c, 0.0) * tau_p;
      }
      break;
    default:
      break;
  }
  return out;
}

SensitivityState propagate_interevent(const SensitivityState& sens, const Vector& rho,
                                      const std::vector<std::size_t>& segments, const Modes& modes, double dt,
                                      const TrajectorySet& traj, const SystemParams& sys, IpaMode mode) {
  // With no active flow and fixed phases every sensitivity is constant.
  if (mode == IpaMode::Paper) {
    bool active = false;
    for (std::size_t i = 0; i < sys.target_count() && !active; ++i)
      active = modes.x_free[i] && modes.conn.target_agent[i] != kNoAgent;
    for (std::size_t j = 0; j < sys.agent_count() && !active; ++j)
      for (std::size_t i = 0; i < sys.target_count() && modes.conn.at_base[j] && !active; ++i)
        active = modes.z_free[pair_index(i, j, sys.agent_count())];
    if (!active) return sens;
  }
  const Carry c0{rho, sens};
  Carry stage = c0;
  const Carry k1 = derivative(c0, segments, modes, traj, sys, mode);
  axpy(stage, c0, 0.5 * dt, k1);
  const Carry k2 = derivative(stage, segments, modes, traj, sys, mode);
  axpy(stage, c0, 0.5 * dt, k2);
  const Carry k3 = derivative(stage, segments, modes, traj, sys, mode);
  axpy(stage, c0, dt, k3);
  const Carry k4 = derivative(stage, segments, modes, traj, sys, mode);
  const double w = dt / 6.0;
  SensitivityState out = sens;
  out.X += w * (k1.s.X + 2.0 * k2.s.X + 2.0 * k3.s.X + k4.s.X);
  out.Z += w * (k1.s.Z + 2.0 * k2.s.Z + 2.0 * k3.s.Z + k4.s.Z);
  out.Y += w * (k1.s.Y + 2.0 * k2.s.Y + 2.0 * k3.s.Y + k4.s.Y);
  out.rho += w * (k1.s.rho + 2.0 * k2.s.rho + 2.0 * k3.s.rho + k4.s.rho);
  return out;
}

IpaResult run_ipa(const Trace& trace, const SystemParams& sys, IpaMode mode, const SensitivityObserver& observer) {
  if (!trace.complete) throw NumericalError("IncompleteTrace: sensitivities need a trace that reaches the horizon");
  if (!trace.keeps_samples()) throw NumericalError("IncompleteTrace: sensitivities need a trace with samples");
  const TrajectorySet& traj = trace.trajectories;
  const std::size_t m = trace.targets(), n = trace.agents();
  const auto p = static_cast<Eigen::Index>(traj.size());

  IpaResult res;
  res.mode = mode;
  res.backlog = res.base = res.idle = res.idle_jumps = Row::Zero(p);
  SensitivityState s = SensitivityState::zero(m, n, traj.size());

  // Integrand sensitivities at sample k. Events sit on sample points and make
  // the integrand jump, so each interval uses one-sided values at its ends: at
  // an event sample the idling kinks are resolved from `other`, the far end of
  // the interval.
  auto integrand = [&](std::size_t k, std::size_t other, Row& gx, Row& gy, Row& gi) {
    const std::size_t side = trace.at_event(k) ? other : k;
    gx.setZero(p);
    gy.setZero(p);
    gi.setZero(p);
    for (std::size_t i = 0; i < m; ++i) {
      gx += sys.q[i] * s.X.row(i);
      gy += sys.q[i] * s.Y.row(i);
    }
    for (std::size_t j = 0; j < n; ++j) {
      const Eigen::RowVector2d g = idling_gradient(trace.position(k, j), trace.position(side, j), j, sys);
      if (g.isZero()) continue;
      gi += g * position_sensitivity(traj, j, trace.segment(k, j), trace.rho(k, j), s.rho.row(j), mode);
    }
  };

  Row px, py, pi, cx, cy, ci;
  if (observer) observer(0, s);

  Vector rho(static_cast<Eigen::Index>(n));
  std::vector<std::size_t> seg(n);
  std::size_t next_event = 0;
  for (std::size_t k = 0; k + 1 < trace.sample_count(); ++k) {
    const double dt = trace.time(k + 1) - trace.time(k);
    if (dt > 0.0) {
      integrand(k, k + 1, px, py, pi);
      for (std::size_t j = 0; j < n; ++j) {
        rho[j] = trace.rho(k, j);
        seg[j] = trace.segment(k, j);
      }
      s = propagate_interevent(s, rho, seg, trace.modes(k), dt, traj, sys, mode);
      integrand(k + 1, k, cx, cy, ci);
      res.backlog += 0.5 * dt * (px + cx);
      res.base += 0.5 * dt * (py + cy);
      res.idle += 0.5 * dt * (pi + ci);
    }
    while (next_event < trace.events.size() && trace.events[next_event].sample == k + 1) {
      const EventRecord& ev = trace.events[next_event];
      const Row tau = event_time_derivative(ev, s, traj, sys, mode);
      if (ev.kind == EventKind::SegmentSwitch && !ev.induced) {
        const auto j = static_cast<std::size_t>(ev.agent);
        res.idle_jumps += (idling(ev.state.s[j], j, sys) - idling(ev.after.s[j], j, sys)) * tau;
      }
      s = apply_event_jump(ev, s, tau, traj, mode);
      if (!ev.induced) res.event_log.push_back({next_event, tau});
      ++next_event;
    }
    if (observer) observer(k + 1, s);
  }
  res.final = std::move(s);
  return res;
}

}  // namespace harvest
