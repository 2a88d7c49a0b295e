#include "harvest/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <stdexcept>
#include <thread>

#include "harvest/errors.hpp"
#include "harvest/hybridsim.hpp"
#include "harvest/seeding.hpp"

namespace harvest {

namespace {

// Runs body(k) for k in [0, count) on up to `threads` workers. Results go to
// caller-owned slots, so the combination order never depends on scheduling.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t k = 0; k < count; ++k) body(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          body(k);
        } catch (...) {
          errors[k] = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

void accumulate(CostBreakdown& into, const CostBreakdown& c, double w) {
  into.J1 += w * c.J1;
  into.J2 += w * c.J2;
  into.J3 += w * c.J3;
  into.Jf += w * c.Jf;
  into.penalty += w * c.penalty;
  into.total += w * c.total;
}

bool all_deterministic(const Scenario& sc) {
  return std::all_of(sc.arrivals.begin(), sc.arrivals.end(),
                     [](const ArrivalProcess& a) { return a.kind != ArrivalProcess::Kind::Uniform; });
}

double centroid_angle(const SystemParams& sys) {
  Vec2 c = Vec2::Zero();
  for (const auto& w : sys.targets) c += w;
  if (!sys.targets.empty()) c /= static_cast<double>(sys.targets.size());
  const Vec2 d = c - sys.base;
  // A target set centred on the base gives no preferred direction; a fixed
  // offset keeps the first circle off the symmetry axes of regular layouts.
  if (d.norm() < 1e-9) return kPi / 8;
  return std::atan2(d.y(), d.x());
}

}  // namespace

void validate(const OptimizerConfig& cfg) {
  if (!(cfg.backtrack > 0.0 && cfg.backtrack < 1.0)) throw std::invalid_argument("backtrack factor must be in (0, 1)");
  if (!(cfg.decrease > 0.0 && cfg.decrease < 1.0)) throw std::invalid_argument("decrease coefficient must be in (0, 1)");
  if (!(cfg.step0 > 0.0)) throw std::invalid_argument("initial step must be positive");
  if (cfg.replications == 0) throw std::invalid_argument("at least one replication is required");
}

ArmijoResult armijo_step(const Vector& theta, const Vector& grad, double value,
                         const std::function<double(const Vector&)>& evaluate, const OptimizerConfig& cfg) {
  ArmijoResult r{theta, 0.0, value, false, 0};
  const double g2 = grad.squaredNorm();
  if (g2 == 0.0) {
    r.accepted = true;
    return r;
  }
  double nu = cfg.step0;
  for (std::size_t b = 0; b <= cfg.max_backtracks; ++b, nu *= cfg.backtrack) {
    const Vector trial = theta - nu * grad;
    const double j = evaluate(trial);
    if (j <= value - cfg.decrease * nu * g2) {
      r.theta = trial;
      r.step = nu;
      r.value = j;
      r.accepted = true;
      r.backtracks = b;
      return r;
    }
  }
  r.backtracks = cfg.max_backtracks;
  return r;
}

TrajectorySet default_trajectories(const SystemParams& sys, const AgentSpec& spec) {
  const double R = std::max(sys.l1, sys.l2) / 4.0;
  const double psi = centroid_angle(sys);
  const std::size_t n = sys.agent_count();
  TrajectorySet set{spec.family, {}};
  if (spec.family == Family::Ellipse) {
    const std::size_t E = std::max<std::size_t>(spec.segments, 1);
    for (std::size_t j = 0; j < n; ++j) {
      SegmentedTrajectory a;
      for (std::size_t e = 0; e < E; ++e) {
        const double ang = psi + kTwoPi * static_cast<double>(j * E + e) / static_cast<double>(n * E) + 0.1 * j;
        const Vec2 dir(std::cos(ang), std::sin(ang));
        // Major axis along dir with the base at its far end (rho = pi).
        const double Rj = R * (1.0 + 0.05 * j);
        const Vec2 c = sys.base + Rj * dir;
        a.segments.push_back(EllipseParams{c.x(), c.y(), Rj, 0.8 * Rj, std::fmod(ang + kTwoPi, kTwoPi)});
      }
      set.agents.push_back(std::move(a));
    }
    return set;
  }
  const std::size_t G = std::max<std::size_t>(spec.harmonics, 1);
  for (std::size_t j = 0; j < n; ++j) {
    const double ang = psi + kTwoPi * static_cast<double>(j) / static_cast<double>(n) + 0.1 * j;
    const double Rj = R * (1.0 + 0.05 * j);
    const Vec2 u = -Rj * Vec2(std::cos(ang), std::sin(ang));  // base minus centre
    FourierParams f;
    f.fx = 1.0;
    f.ax.assign(G, 0.0);
    f.by.assign(G, 0.0);
    f.phix.assign(G, 0.0);
    f.phiy.assign(G, 0.0);
    f.ax[0] = f.by[0] = Rj;
    f.phix[0] = std::atan2(u.x(), u.y());
    f.phiy[0] = f.phix[0] + kPi / 2;
    f.anchor = sys.base;
    set.agents.push_back(SegmentedTrajectory{{f}});
  }
  return set;
}

TrajectorySet initial_trajectories(const Scenario& sc) {
  return sc.initial ? *sc.initial : default_trajectories(sc.system, sc.agent_spec);
}

std::vector<std::uint64_t> iteration_seeds(std::uint64_t master, std::size_t l, std::size_t count, std::size_t first) {
  std::vector<std::uint64_t> out(count);
  const std::uint64_t parent = derive_seed(master, l);
  for (std::size_t k = 0; k < count; ++k) out[k] = derive_seed(parent, first + k);
  return out;
}

Evaluation evaluate_gradient(const Scenario& sc, const TrajectorySet& traj, const std::vector<std::uint64_t>& seeds,
                             IpaMode mode, std::size_t threads) {
  const std::size_t R = seeds.size();
  std::vector<CostBreakdown> costs(R);
  std::vector<GradientBreakdown> grads(R);
  std::vector<char> ok(R, 0);
  parallel_for(R, threads, [&](std::size_t k) {
    const Trace tr = simulate(sc, traj, seeds[k]);
    costs[k] = sample_cost(tr, sc.system);
    try {
      grads[k] = sample_gradient(tr, run_ipa(tr, sc.system, mode), sc.system);
      ok[k] = 1;
    } catch (const TangentialCrossing&) {
    }
  });

  Evaluation ev;
  const auto p = static_cast<Eigen::Index>(traj.size());
  for (auto* g : {&ev.gradient.J1, &ev.gradient.J2, &ev.gradient.J3, &ev.gradient.Jf, &ev.gradient.penalty,
                  &ev.gradient.total})
    *g = Vector::Zero(p);
  for (std::size_t k = 0; k < R; ++k) accumulate(ev.cost, costs[k], 1.0 / static_cast<double>(R));
  for (std::size_t k = 0; k < R; ++k) {
    if (!ok[k]) continue;
    ++ev.used;
    ev.gradient.J1 += grads[k].J1;
    ev.gradient.J2 += grads[k].J2;
    ev.gradient.J3 += grads[k].J3;
    ev.gradient.Jf += grads[k].Jf;
    ev.gradient.penalty += grads[k].penalty;
    ev.gradient.total += grads[k].total;
  }
  if (ev.used > 0) {
    const double w = 1.0 / static_cast<double>(ev.used);
    for (auto* g : {&ev.gradient.J1, &ev.gradient.J2, &ev.gradient.J3, &ev.gradient.Jf, &ev.gradient.penalty,
                    &ev.gradient.total})
      *g *= w;
  }
  return ev;
}

CostBreakdown evaluate_cost(const Scenario& sc, const TrajectorySet& traj, const std::vector<std::uint64_t>& seeds,
                            std::size_t threads) {
  std::vector<CostBreakdown> costs(seeds.size());
  parallel_for(seeds.size(), threads, [&](std::size_t k) {
    costs[k] = sample_cost(simulate(sc, traj, seeds[k], SimulationOptions{false}), sc.system);
  });
  CostBreakdown mean;
  for (const auto& c : costs) accumulate(mean, c, 1.0 / static_cast<double>(costs.size()));
  return mean;
}

OptimizationHistory optimize(const Scenario& sc, const TrajectorySet& init, const OptimizerConfig& cfg,
                             const IterationObserver& observer) {
  validate(cfg);
  const bool deterministic = all_deterministic(sc);
  const std::size_t R = deterministic ? 1 : cfg.replications;

  OptimizationHistory hist;
  hist.initial = init;
  TrajectorySet theta = init;
  normalize_angles(theta);
  std::size_t rejections = 0;

  for (std::size_t l = 0;; ++l) {
    const auto seeds = iteration_seeds(sc.seed, l, R);
    const Evaluation ev = evaluate_gradient(sc, theta, seeds, cfg.mode, cfg.threads);

    IterationRecord rec;
    rec.l = l;
    rec.cost = ev.cost;
    rec.replications_used = ev.used;
    hist.final = theta;
    hist.final_cost = ev.cost;

    auto finish = [&](const char* why) {
      hist.iterations.push_back(rec);
      if (observer) observer(rec, theta);
      hist.stop_reason = why;
    };

    if (ev.used == 0) {
      rec.skipped = true;
      ++hist.skipped;
      if (hist.skipped > cfg.skip_budget) {
        finish("skip budget exhausted");
        break;
      }
      if (l >= cfg.max_iters) {
        finish("iteration limit");
        break;
      }
      hist.iterations.push_back(rec);
      if (observer) observer(rec, theta);
      continue;
    }

    const Vector& g = ev.gradient.total;
    rec.grad_norm = g.norm();
    if (!std::isfinite(rec.grad_norm)) throw NumericalError("NonFiniteGradient: at iteration " + std::to_string(l));
    if (l >= cfg.max_iters) {
      finish("iteration limit");
      break;
    }
    if (rec.grad_norm <= cfg.grad_tol) {
      rec.accepted = true;
      finish("gradient tolerance");
      break;
    }

    std::size_t trial = 0;
    auto evaluate = [&](const Vector& v) {
      const auto s = cfg.seeds == SeedPolicy::CommonRandomNumbers || deterministic
                         ? seeds
                         : iteration_seeds(sc.seed, l, R, R * (++trial));
      try {
        return evaluate_cost(sc, theta.with_values(v), s, cfg.threads).total;
      } catch (const DegenerateTrajectory&) {
        return std::numeric_limits<double>::infinity();  // a trial step through a cusp
      }
    };
    const ArmijoResult step = armijo_step(theta.flatten(), g, ev.cost.total, evaluate, cfg);
    rec.accepted = step.accepted;
    rec.step = step.accepted ? step.step : 0.0;
    if (step.accepted) {
      theta = theta.with_values(step.theta);
      normalize_angles(theta);
      rejections = 0;
    } else {
      ++rejections;
    }
    hist.iterations.push_back(rec);
    if (observer) observer(rec, theta);
    if (!step.accepted && (deterministic || rejections >= cfg.max_rejections)) {
      // A deterministic path would only repeat the same failed search.
      hist.stop_reason = "line search failed";
      hist.final = theta;
      break;
    }
  }
  return hist;
}

SegmentSearchResult segment_search(const Scenario& sc,
                                   const std::function<TrajectorySet(std::size_t segments)>& init,
                                   const OptimizerConfig& cfg, std::size_t max_segments) {
  if (sc.agent_spec.family != Family::Ellipse) throw std::invalid_argument("segment search needs ellipse trajectories");
  if (max_segments == 0) throw std::invalid_argument("max_segments must be >= 1");
  SegmentSearchResult out;
  for (std::size_t E = 1; E <= max_segments; ++E) {
    Scenario s = sc;
    s.agent_spec.segments = E;
    s.initial.reset();
    out.per_count.push_back(optimize(s, init(E), cfg));
    if (E > 1 && out.per_count[E - 1].final_cost.total >= out.per_count[E - 2].final_cost.total) {
      out.best_segments = E - 1;
      out.best = out.per_count[E - 2];
      return out;
    }
  }
  out.cap_hit = true;
  std::size_t best = 0;
  for (std::size_t k = 1; k < out.per_count.size(); ++k)
    if (out.per_count[k].final_cost.total < out.per_count[best].final_cost.total) best = k;
  out.best_segments = best + 1;
  out.best = out.per_count[best];
  return out;
}

void write_history_csv(const OptimizationHistory& h, std::ostream& out) {
  out << "l,J,J1,J2,J3,Jf,penalty,step,gradnorm\n";
  char buf[512];
  for (const auto& r : h.iterations) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.6g,%.12g\n", r.l, r.cost.total,
                  r.cost.J1, r.cost.J2, r.cost.J3, r.cost.Jf, r.cost.penalty, r.step, r.grad_norm);
    out << buf;
  }
}

}  // namespace harvest
