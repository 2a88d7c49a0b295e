#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "harvest/arrival.hpp"
#include "harvest/scenario.hpp"
#include "harvest/trace.hpp"

namespace harvest {

struct SimulationOptions {
  /// Without samples the trace still carries events, cost integrals and the final state.
  bool keep_samples = true;
};

/// One RK4 step of length h with modes held fixed. Queues, phases and
/// positions are advanced; sigma is taken as constant over the step.
HybridState advance(const HybridState& state, const Modes& modes, const SystemParams& sys,
                    const TrajectorySet& traj, double h);

/// A guard crossing found inside a step.
struct PendingEvent {
  EventKind kind;
  int target = -1;
  int agent = -1;
  bool operator==(const PendingEvent&) const = default;
};

/// Guards that are crossed in `trial` relative to the modes in force.
std::vector<PendingEvent> crossed_guards(const HybridState& trial, const Modes& modes, const SystemParams& sys,
                                         const TrajectorySet& traj);

struct Localized {
  double dt = 0.0;                    // offset from the step start, within event_tol of the crossing
  HybridState state;                  // state at the crossed end of the final bracket
  std::vector<PendingEvent> events;   // every guard crossed there, in processing order
};

/// Earliest endogenous event in (t, t + h], localized by bisection to event_tol.
std::optional<Localized> detect_and_localize(const HybridState& state, const Modes& modes, double h,
                                             const SystemParams& sys, const TrajectorySet& traj);

/// Full sample path over [0, horizon] for fixed arrival realizations.
Trace simulate(const SystemParams& sys, const std::vector<ArrivalSchedule>& arrivals, const TrajectorySet& traj,
               const SimulationOptions& opts = {});

/// Per-target realizations: target i uses seed derive_seed(seed, i).
std::vector<ArrivalSchedule> realize_arrivals(const Scenario& sc, std::uint64_t seed);
Trace simulate(const Scenario& sc, const TrajectorySet& traj, std::uint64_t seed, const SimulationOptions& opts = {});

/// Largest |X_i + sum_j Z_ij + Y_i - integral of sigma_i| / (1 + integral) over all samples.
double conservation_residual(const Trace& trace);

/// One row per sample: t, event flag, x_j, y_j per agent, X_i, Z_ij, Y_i. Grid
/// rows have flag 0; every event instant adds a row just before its events
/// (flag 1) and one just after (flag 2).
void write_trace_csv(const Trace& trace, std::ostream& out);
/// One row per event: t, kind, i, j, endogenous, induced (indices 1-based, 0 = n/a).
void write_events_csv(const Trace& trace, std::ostream& out);

}  // namespace harvest
