#pragma once

#include <string>
#include <vector>

#include "harvest/arrival.hpp"
#include "harvest/objective.hpp"

namespace harvest {

struct GradCheckRow {
  std::string name;
  double paper = 0.0;      // IPA, paper mode
  double augmented = 0.0;  // IPA, augmented mode
  double fd = 0.0;         // central difference of the sample cost
  double rel_paper = 0.0, rel_augmented = 0.0;
  bool topology_change = false;  // the +h and -h runs see different event sequences
};

struct GradCheckReport {
  double h = 0.0;
  double cost = 0.0;
  std::vector<GradCheckRow> rows;
  /// Largest relative errors over rows without a topology change.
  double max_rel_paper = 0.0, max_rel_augmented = 0.0;
};

/// |a - fd| / max(|fd|, floor) with floor = 1e-3 max_k |fd_k| + 1e-8, so that
/// components that are zero up to rounding are judged against the gradient scale.
double relative_error(double a, double fd, double scale);

/// Central differences of the sample cost with step h for every component of
/// theta, next to the IPA gradient in both modes. Arrivals are held fixed.
GradCheckReport grad_check(const SystemParams& sys, const std::vector<ArrivalSchedule>& arrivals,
                           const TrajectorySet& traj, double h);

/// Event signature (kind, target, agent of every event) of a trace.
std::vector<std::string> event_signature(const Trace& trace);

void write_grad_check_csv(const GradCheckReport& report, std::ostream& out);

}  // namespace harvest
