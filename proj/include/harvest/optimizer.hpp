#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "harvest/ipa.hpp"
#include "harvest/objective.hpp"
#include "harvest/scenario.hpp"

namespace harvest {

/// Which draws the line-search evaluations of one iteration use.
enum class SeedPolicy {
  CommonRandomNumbers,  ///< same sample paths as the gradient evaluation
  Fresh                 ///< new draws for every trial step
};

struct OptimizerConfig {
  std::size_t max_iters = 100;
  double step0 = 1.0;
  double backtrack = 0.5;  // in (0, 1)
  double decrease = 1e-4;  // in (0, 1)
  std::size_t max_backtracks = 30;
  double grad_tol = 1e-6;
  std::size_t replications = 1;
  SeedPolicy seeds = SeedPolicy::CommonRandomNumbers;
  IpaMode mode = IpaMode::Paper;
  /// Iterations whose every replication hit a tangential crossing.
  std::size_t skip_budget = 5;
  /// Consecutive rejected line searches before stopping (stochastic runs).
  std::size_t max_rejections = 3;
  std::uint64_t seed = 0;
  /// Worker threads for replications; 0 picks the hardware concurrency.
  std::size_t threads = 0;
};

/// Throws std::invalid_argument when a field is out of range.
void validate(const OptimizerConfig& cfg);

struct ArmijoResult {
  Vector theta;
  double step = 0.0;
  double value = 0.0;  // J at the returned theta
  bool accepted = false;
  std::size_t backtracks = 0;
};

/// Backtracking from step0: the first step nu with
/// J(theta - nu g) <= J(theta) - c nu |g|^2 is taken. A zero gradient is
/// accepted with nu = 0. When every step fails theta is returned unchanged.
ArmijoResult armijo_step(const Vector& theta, const Vector& grad, double value,
                         const std::function<double(const Vector&)>& evaluate, const OptimizerConfig& cfg);

struct IterationRecord {
  std::size_t l = 0;
  CostBreakdown cost;
  double grad_norm = 0.0;
  double step = 0.0;  // step taken from this iterate (0 when none)
  bool accepted = false;
  bool skipped = false;  // gradient unavailable: every replication failed
  std::size_t replications_used = 0;
};

struct OptimizationHistory {
  std::vector<IterationRecord> iterations;
  TrajectorySet initial, final;
  CostBreakdown final_cost;
  std::string stop_reason;
  std::size_t skipped = 0;
};

/// Default starting trajectories: circles (Fourier: their one-harmonic form,
/// ellipses: 5:4 ellipses) of size max(L1, L2)/4 passing through the base,
/// fanned out around it starting from the direction of the target centroid.
/// Agent j is turned by 0.1 j rad and scaled by 1 + 0.05 j so that agents do
/// not mirror each other on symmetric layouts.
TrajectorySet default_trajectories(const SystemParams& sys, const AgentSpec& spec);
/// The scenario's own initial parameters when present, else the defaults.
TrajectorySet initial_trajectories(const Scenario& sc);

/// Mean cost and gradient over replications; replication k of iteration l is
/// drawn with seed derive_seed(derive_seed(master, l), k).
struct Evaluation {
  CostBreakdown cost;
  GradientBreakdown gradient;
  std::size_t used = 0;  // replications without a tangential crossing
};
Evaluation evaluate_gradient(const Scenario& sc, const TrajectorySet& traj, const std::vector<std::uint64_t>& seeds,
                             IpaMode mode, std::size_t threads = 1);
/// Mean cost only (no samples kept).
CostBreakdown evaluate_cost(const Scenario& sc, const TrajectorySet& traj, const std::vector<std::uint64_t>& seeds,
                            std::size_t threads = 1);

std::vector<std::uint64_t> iteration_seeds(std::uint64_t master, std::size_t l, std::size_t count,
                                           std::size_t first = 0);

using IterationObserver = std::function<void(const IterationRecord&, const TrajectorySet&)>;

OptimizationHistory optimize(const Scenario& sc, const TrajectorySet& init, const OptimizerConfig& cfg,
                             const IterationObserver& observer = {});

struct SegmentSearchResult {
  std::size_t best_segments = 0;
  OptimizationHistory best;
  std::vector<OptimizationHistory> per_count;  // index E - 1
  bool cap_hit = false;
};

/// Optimizes with E = 1, 2, ... ellipses per agent and stops once E is no
/// better than E - 1, returning E - 1. `init` builds the start for a given E.
SegmentSearchResult segment_search(const Scenario& sc,
                                   const std::function<TrajectorySet(std::size_t segments)>& init,
                                   const OptimizerConfig& cfg, std::size_t max_segments);

/// Columns: l,J,J1,J2,J3,Jf,penalty,step,gradnorm.
void write_history_csv(const OptimizationHistory& h, std::ostream& out);

}  // namespace harvest
