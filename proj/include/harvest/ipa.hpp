#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "harvest/system.hpp"
#include "harvest/trace.hpp"
#include "harvest/trajectory.hpp"

// Sensitivities are computed from a recorded sample path only. Nothing in this
// header can reach an arrival process: the rates it sees are the per-event
// flow values stored in the trace.

namespace harvest {

enum class IpaMode {
  Paper,     ///< s' = ds/dtheta at fixed phase
  Augmented  ///< also carries rho' = d(rho)/d(theta) and adds (ds/drho) rho' to s'
};

const char* to_string(IpaMode m);
IpaMode ipa_mode_from_string(const std::string& s);

/// Derivatives of the queue contents (and agent phases) with respect to the
/// flattened parameter vector theta. Rows index queues, columns index theta.
struct SensitivityState {
  Matrix X;    // M x P
  Matrix Z;    // (M*N) x P, row pair_index(i, j, N)
  Matrix Y;    // M x P
  Matrix rho;  // N x P, zero in paper mode

  static SensitivityState zero(std::size_t m, std::size_t n, std::size_t p);
};

/// ds_j/dtheta as a 2 x P block (zero outside agent j's active segment).
Matrix position_sensitivity(const TrajectorySet& traj, std::size_t agent, std::size_t segment, double rho,
                            const Eigen::RowVectorXd& rho_sens, IpaMode mode);

/// dP/dtheta for a station at w and an agent at s with ds/dtheta = sp.
/// Zero outside the range and at D = 0; the inside slope is used at D = r.
Eigen::RowVectorXd proximity_partial(const Vec2& w, const Vec2& s, const Matrix& sp, double r,
                                     const ProximityModel& model);

/// tau' for a recorded event given the sensitivities just before it.
Eigen::RowVectorXd event_time_derivative(const EventRecord& ev, const SensitivityState& sens,
                                         const TrajectorySet& traj, const SystemParams& sys, IpaMode mode);

/// Sensitivities just after the event. xi0 and zeta0 move the emptied
/// queue's sensitivity downstream, a handover shifts mu p tau' from the new
/// agent's Z to X, other range crossings and xi+ leave everything unchanged,
/// and the remaining kinds use x' += [f(tau-) - f(tau+)] tau'.
SensitivityState apply_event_jump(const EventRecord& ev, const SensitivityState& sens,
                                  const Eigen::RowVectorXd& tau_p, const TrajectorySet& traj, IpaMode mode);

/// Integrates the sensitivities across [t0, t0 + dt] with the modes fixed and
/// the phases starting at `rho` (agent segments fixed).
SensitivityState propagate_interevent(const SensitivityState& sens, const Vector& rho,
                                      const std::vector<std::size_t>& segments, const Modes& modes, double dt,
                                      const TrajectorySet& traj, const SystemParams& sys, IpaMode mode);

struct EventDerivative {
  std::size_t event = 0;  // index into trace.events
  Eigen::RowVectorXd tau;
};

struct IpaResult {
  IpaMode mode = IpaMode::Paper;
  SensitivityState final;
  /// Integrals over [0, T] of sum_i q_i X_i', sum_i q_i Y_i' and sum_j I_j'.
  Eigen::RowVectorXd backlog, base, idle;
  /// Extra d/dtheta of the idle integral from jumps of I at segment switches.
  Eigen::RowVectorXd idle_jumps;
  std::vector<EventDerivative> event_log;
};

/// Called once per trace sample with the sensitivities at that sample
/// (after any event jumps belonging to it).
using SensitivityObserver = std::function<void(std::size_t sample, const SensitivityState&)>;

/// Runs the sensitivity recursion along a trace recorded with samples.
/// Throws TangentialCrossing when an event guard is crossed tangentially.
IpaResult run_ipa(const Trace& trace, const SystemParams& sys, IpaMode mode,
                  const SensitivityObserver& observer = {});

}  // namespace harvest
