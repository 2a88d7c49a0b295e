#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "harvest/flowdyn.hpp"
#include "harvest/trajectory.hpp"

namespace harvest {

enum class EventKind {
  XiZero,        // X_i hits 0
  XiPlus,        // X_i leaves 0
  ZetaZero,      // Z_ij hits 0
  DeltaPlus,     // agent j leaves the range of target i
  DeltaZero,     // agent j enters the range of target i
  BasePlus,      // agent j leaves the base range
  BaseZero,      // agent j enters the base range
  Kappa,         // arrival rate at target i changes
  SegmentSwitch  // agent j completes a segment and starts the next one
};

const char* to_string(EventKind k);
/// Order in which events sharing an instant are processed.
int processing_rank(EventKind k);

struct EventRecord {
  double time = 0.0;
  EventKind kind = EventKind::Kappa;
  int target = -1;
  int agent = -1;
  bool endogenous = true;
  /// Caused by another event at the same instant; its effect on the flows is
  /// already part of that event's before/after rates.
  bool induced = false;
  int handover = kNoAgent;  // DeltaPlus: agent that took the target over

  HybridState state;  // at the event instant
  HybridState after;  // after resets (differs only for SegmentSwitch)
  Modes modes_before, modes_after;
  FlowRates flow_before, flow_after;  // both evaluated at the event instant
  std::size_t sample = 0;             // index of the first sample after the event
};

/// Running trapezoidal integrals over [0, t].
struct CostIntegrals {
  double weighted_backlog = 0.0;  // integral of sum_i q_i X_i
  double weighted_base = 0.0;     // integral of sum_i q_i Y_i
  double idle = 0.0;              // integral of sum_j I_j
  double backlog = 0.0;           // integral of sum_i X_i
};

/// Sample path record. Samples sit on the step grid plus two per event instant
/// (just before and just after), so event times are quadrature nodes.
class Trace {
 public:
  Trace() = default;
  Trace(std::size_t targets, std::size_t agents, bool keep_samples);

  std::size_t targets() const { return m_; }
  std::size_t agents() const { return n_; }
  bool keeps_samples() const { return keep_; }

  TrajectorySet trajectories;
  double horizon = 0.0;
  bool complete = false;
  std::vector<EventRecord> events;
  std::vector<Modes> mode_table;
  std::vector<std::string> warnings;
  CostIntegrals integrals;
  HybridState final_state;

  /// Appends a sample; `modes` indexes mode_table and holds until the next sample.
  void push_sample(const HybridState& st, std::size_t modes, const Vector& arrived, bool at_event);

  std::size_t sample_count() const { return t_.size(); }
  double time(std::size_t k) const { return t_[k]; }
  std::size_t modes_index(std::size_t k) const { return modes_[k]; }
  const Modes& modes(std::size_t k) const { return mode_table[modes_[k]]; }
  bool at_event(std::size_t k) const { return tag_[k] != 0; }
  double X(std::size_t k, std::size_t i) const { return x_[k * m_ + i]; }
  double Z(std::size_t k, std::size_t i, std::size_t j) const { return z_[(k * m_ + i) * n_ + j]; }
  double Y(std::size_t k, std::size_t i) const { return y_[k * m_ + i]; }
  double rho(std::size_t k, std::size_t j) const { return rho_[k * n_ + j]; }
  std::size_t segment(std::size_t k, std::size_t j) const { return seg_[k * n_ + j]; }
  Vec2 position(std::size_t k, std::size_t j) const { return {pos_[2 * (k * n_ + j)], pos_[2 * (k * n_ + j) + 1]}; }
  double arrived(std::size_t k, std::size_t i) const { return arrived_[k * m_ + i]; }
  /// Sample k as a state; `sigma` is left empty.
  HybridState state(std::size_t k) const;

 private:
  std::size_t m_ = 0, n_ = 0;
  bool keep_ = true;
  std::vector<double> t_, x_, z_, y_, rho_, pos_, arrived_;
  std::vector<std::uint32_t> seg_, modes_;
  std::vector<std::uint8_t> tag_;
};

}  // namespace harvest
