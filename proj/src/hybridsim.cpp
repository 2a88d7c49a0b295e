#include "harvest/hybridsim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include "harvest/errors.hpp"
#include "harvest/idling.hpp"
#include "harvest/seeding.hpp"

namespace harvest {

namespace {

const Curve& curve_of(const TrajectorySet& traj, std::size_t j, std::size_t seg) {
  return traj.agents[j].segments[seg];
}

// Packed layout: X (M), Z (M*N row-major), Y (M), rho (N).
Vector pack(const HybridState& st) {
  const auto m = st.X.size(), n = st.rho.size();
  Vector y(2 * m + m * n + n);
  y.head(m) = st.X;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) y[m + i * n + j] = st.Z(i, j);
  y.segment(m + m * n, m) = st.Y;
  y.tail(n) = st.rho;
  return y;
}

void unpack(const Vector& y, HybridState& st, const TrajectorySet& traj) {
  const auto m = st.X.size(), n = st.rho.size();
  st.X = y.head(m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) st.Z(i, j) = y[m + i * n + j];
  st.Y = y.segment(m + m * n, m);
  st.rho = y.tail(n);
  for (Eigen::Index j = 0; j < n; ++j)
    st.s[j] = position(curve_of(traj, j, st.segment[j]), st.rho[j]);
}

Vector rates(const HybridState& st, const Modes& md, const SystemParams& sys, const TrajectorySet& traj) {
  const FlowRates f = queue_flow_rates(st, md, sys);
  const auto m = st.X.size(), n = st.rho.size();
  Vector d(2 * m + m * n + n);
  d.head(m) = f.X;
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d[m + i * n + j] = f.Z(i, j);
  d.segment(m + m * n, m) = f.Y;
  for (Eigen::Index j = 0; j < n; ++j) d[2 * m + m * n + j] = phase_rate(curve_of(traj, j, st.segment[j]), st.rho[j]);
  return d;
}

double service_rate(const HybridState& st, const SystemParams& sys, std::size_t i, int agent) {
  if (agent == kNoAgent) return 0.0;
  const auto j = static_cast<std::size_t>(agent);
  return sys.mu(i, j) * sys.proximity->rate((sys.targets[i] - st.s[j]).norm(), sys.range(i, j));
}

bool endogenous_kind(EventKind k) { return k != EventKind::Kappa; }

std::string describe(const PendingEvent& e) {
  std::string s = to_string(e.kind);
  if (e.target >= 0) s += " i=" + std::to_string(e.target + 1);
  if (e.agent >= 0) s += " j=" + std::to_string(e.agent + 1);
  return s;
}

struct KappaTime {
  double time;
  std::size_t target;
};

// Owns the evolving state of one simulation run.
class Simulator {
 public:
  Simulator(const SystemParams& sys, const std::vector<ArrivalSchedule>& arrivals, const TrajectorySet& traj,
            const SimulationOptions& opts)
      : sys_(sys), arrivals_(arrivals), traj_(traj), trace_(sys.target_count(), sys.agent_count(), opts.keep_samples) {}

  Trace run();

 private:
  void record(bool at_event);
  void process(std::vector<PendingEvent> events);
  void handle(const PendingEvent& ev);
  void enter_target(std::size_t i, std::size_t j);
  int leave_target(std::size_t i, std::size_t j, std::vector<PendingEvent>& induced, bool exogenous);
  void enter_base(std::size_t j);
  void refresh_target(std::size_t i, std::vector<PendingEvent>& induced, bool exogenous);

  const SystemParams& sys_;
  const std::vector<ArrivalSchedule>& arrivals_;
  const TrajectorySet& traj_;
  Trace trace_;
  HybridState st_;
  Modes md_;
  std::size_t mode_index_ = 0;
  std::vector<std::size_t> batch_;  // records created for the current event instant

  bool have_prev_ = false;
  double prev_t_ = 0.0;
  std::array<double, 4> prev_f_{};
};

void Simulator::record(bool at_event) {
  const std::size_t m = sys_.target_count(), n = sys_.agent_count();
  std::array<double, 4> f{};
  for (std::size_t i = 0; i < m; ++i) {
    f[0] += sys_.q[i] * st_.X[i];
    f[1] += sys_.q[i] * st_.Y[i];
    f[3] += st_.X[i];
  }
  for (std::size_t j = 0; j < n; ++j) f[2] += idling(st_.s[j], j, sys_);
  if (have_prev_) {
    const double w = 0.5 * (st_.t - prev_t_);
    trace_.integrals.weighted_backlog += w * (prev_f_[0] + f[0]);
    trace_.integrals.weighted_base += w * (prev_f_[1] + f[1]);
    trace_.integrals.idle += w * (prev_f_[2] + f[2]);
    trace_.integrals.backlog += w * (prev_f_[3] + f[3]);
  }
  have_prev_ = true;
  prev_t_ = st_.t;
  prev_f_ = f;
  if (trace_.keeps_samples()) {
    Vector arrived(static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) arrived[i] = arrivals_[i].cumulative(st_.t);
    trace_.push_sample(st_, mode_index_, arrived, at_event);
  }
}

void Simulator::enter_target(std::size_t i, std::size_t j) {
  md_.in_range[pair_index(i, j, sys_.agent_count())] = 1;
  if (md_.conn.target_agent[i] == kNoAgent) md_.conn.target_agent[i] = static_cast<int>(j);
}

int Simulator::leave_target(std::size_t i, std::size_t j, std::vector<PendingEvent>& induced, bool exogenous) {
  const std::size_t n = sys_.agent_count();
  md_.in_range[pair_index(i, j, n)] = 0;
  if (md_.conn.target_agent[i] != static_cast<int>(j)) return kNoAgent;
  int next = kNoAgent;
  for (std::size_t l = 0; l < n; ++l)
    if (md_.in_range[pair_index(i, l, n)]) {
      next = static_cast<int>(l);
      break;
    }
  md_.conn.target_agent[i] = next;
  refresh_target(i, induced, exogenous);
  return next;
}

void Simulator::enter_base(std::size_t j) {
  const std::size_t n = sys_.agent_count();
  md_.conn.at_base[j] = 1;
  for (std::size_t i = 0; i < sys_.target_count(); ++i) md_.z_free[pair_index(i, j, n)] = st_.Z(i, j) > 0.0;
}

// A pinned target queue starts to fill once arrivals outpace service.
void Simulator::refresh_target(std::size_t i, std::vector<PendingEvent>& induced, bool exogenous) {
  if (md_.x_free[i]) return;
  if (st_.sigma[i] > service_rate(st_, sys_, i, md_.conn.target_agent[i])) {
    md_.x_free[i] = 1;
    induced.push_back({EventKind::XiPlus, static_cast<int>(i), -1});
    if (exogenous) induced.back().agent = -2;  // marker: exogenous cause
  }
}

void Simulator::handle(const PendingEvent& ev) {
  const std::size_t n = sys_.agent_count();
  const auto i = static_cast<std::size_t>(std::max(ev.target, 0));
  const auto j = static_cast<std::size_t>(std::max(ev.agent, 0));

  EventRecord rec;
  rec.time = st_.t;
  rec.kind = ev.kind;
  rec.target = ev.target;
  rec.agent = ev.agent;
  rec.endogenous = endogenous_kind(ev.kind);
  rec.modes_before = md_;

  rec.state = st_;
  rec.flow_before = queue_flow_rates(st_, md_, sys_);

  std::vector<PendingEvent> induced;
  switch (ev.kind) {
    case EventKind::XiZero:
      md_.x_free[i] = 0;
      break;
    case EventKind::XiPlus:
      md_.x_free[i] = 1;
      break;
    case EventKind::ZetaZero:
      md_.z_free[pair_index(i, j, n)] = 0;
      break;
    case EventKind::DeltaZero:
      enter_target(i, j);
      break;
    case EventKind::DeltaPlus:
      rec.handover = leave_target(i, j, induced, false);
      break;
    case EventKind::BaseZero:
      enter_base(j);
      break;
    case EventKind::BasePlus:
      md_.conn.at_base[j] = 0;
      break;
    case EventKind::Kappa:
      st_.sigma[i] = arrivals_[i].rate_at(st_.t);
      refresh_target(i, induced, true);
      break;
    case EventKind::SegmentSwitch: {
      st_.segment[j] += 1;
      st_.rho[j] = 0.0;
      st_.s[j] = position(curve_of(traj_, j, st_.segment[j]), 0.0);
      for (std::size_t t = 0; t < sys_.target_count(); ++t) {
        const bool inside = (sys_.targets[t] - st_.s[j]).norm() < sys_.range(t, j);
        if (inside == static_cast<bool>(md_.in_range[pair_index(t, j, n)])) continue;
        induced.push_back({inside ? EventKind::DeltaZero : EventKind::DeltaPlus, static_cast<int>(t),
                           static_cast<int>(j)});
        if (inside) enter_target(t, j);
        else leave_target(t, j, induced, false);
      }
      const bool at_base = (sys_.base - st_.s[j]).norm() < sys_.base_range[j];
      if (at_base != static_cast<bool>(md_.conn.at_base[j])) {
        induced.push_back({at_base ? EventKind::BaseZero : EventKind::BasePlus, -1, static_cast<int>(j)});
        if (at_base) enter_base(j);
        else md_.conn.at_base[j] = 0;
      }
      break;
    }
  }

  rec.after = st_;
  rec.modes_after = md_;
  rec.flow_after = queue_flow_rates(st_, md_, sys_);
  trace_.events.push_back(rec);
  batch_.push_back(trace_.events.size() - 1);

  for (const auto& e : induced) {
    EventRecord r;
    r.time = st_.t;
    r.kind = e.kind;
    r.target = e.target;
    r.agent = e.agent == -2 ? -1 : e.agent;
    r.endogenous = e.agent != -2;
    r.induced = true;
    r.state = r.after = st_;
    r.modes_before = r.modes_after = md_;
    r.flow_before = r.flow_after = rec.flow_after;
    trace_.events.push_back(std::move(r));
    batch_.push_back(trace_.events.size() - 1);
  }
}

void Simulator::process(std::vector<PendingEvent> events) {
  std::stable_sort(events.begin(), events.end(), [](const PendingEvent& a, const PendingEvent& b) {
    return processing_rank(a.kind) < processing_rank(b.kind);
  });
  const auto endo = std::count_if(events.begin(), events.end(),
                                  [](const PendingEvent& e) { return endogenous_kind(e.kind); });
  if (endo > 1) {
    std::string msg = "SimultaneousEvents at t=" + std::to_string(st_.t) + ":";
    for (const auto& e : events)
      if (endogenous_kind(e.kind)) msg += " [" + describe(e) + "]";
    trace_.warnings.push_back(msg);
  }

  // The localized state sits just past the crossing; move the overshoot below
  // zero into the downstream queue so nothing is created or lost.
  for (const auto& e : events) {
    const auto i = static_cast<std::size_t>(std::max(e.target, 0));
    if (e.kind == EventKind::XiZero) {
      const int jc = md_.conn.target_agent[i];
      if (jc != kNoAgent) st_.Z(i, static_cast<std::size_t>(jc)) += st_.X[i];
      st_.X[i] = 0.0;
    } else if (e.kind == EventKind::ZetaZero) {
      const auto j = static_cast<std::size_t>(e.agent);
      st_.Y[i] += st_.Z(i, j);
      st_.Z(i, j) = 0.0;
    }
  }
  record(true);
  batch_.clear();
  for (const auto& e : events) handle(e);
  if (!(md_ == trace_.mode_table.back())) {
    trace_.mode_table.push_back(md_);
    mode_index_ = trace_.mode_table.size() - 1;
  }
  record(true);
  const std::size_t post = trace_.keeps_samples() ? trace_.sample_count() - 1 : 0;
  for (auto k : batch_) trace_.events[k].sample = post;
}

Trace Simulator::run() {
  const std::size_t m = sys_.target_count(), n = sys_.agent_count();
  if (traj_.agents.size() != n) throw std::invalid_argument("trajectory set does not match the agent count");
  if (arrivals_.size() != m) throw std::invalid_argument("one arrival realization per target required");
  for (const auto& a : traj_.agents)
    if (a.segments.empty()) throw std::invalid_argument("every agent needs at least one segment");

  const double horizon = sys_.horizon, h = sys_.step;
  trace_.trajectories = traj_;
  trace_.horizon = horizon;

  st_ = HybridState::zero(m, n);
  for (std::size_t i = 0; i < m; ++i) st_.sigma[i] = arrivals_[i].rate_at(0.0);
  for (std::size_t j = 0; j < n; ++j) st_.s[j] = position(curve_of(traj_, j, 0), 0.0);
  md_ = classify(st_, sys_, ConnectionMap{});
  trace_.mode_table.push_back(md_);
  record(false);

  std::vector<KappaTime> kappas;
  for (std::size_t i = 0; i < m; ++i)
    for (double t : arrivals_[i].jump_times())
      if (t > 0.0 && t < horizon) kappas.push_back({t, i});
  std::stable_sort(kappas.begin(), kappas.end(), [](const KappaTime& a, const KappaTime& b) { return a.time < b.time; });

  constexpr double kMerge = 1e-12;
  const auto steps = static_cast<std::size_t>(std::ceil(horizon / h - 1e-9));
  std::size_t k = 0, next_kappa = 0, stalled = 0;
  double last_t = -1.0;

  try {
    while (k < steps) {
      const double tg = k + 1 == steps ? horizon : static_cast<double>(k + 1) * h;
      double next = tg;
      bool kappa_here = false;
      if (next_kappa < kappas.size() && kappas[next_kappa].time <= tg + kMerge) {
        kappa_here = true;
        if (kappas[next_kappa].time < tg - kMerge) next = kappas[next_kappa].time;
      }
      const double dt = next - st_.t;

      // Most steps cross nothing, so the full step doubles as the detection trial.
      std::optional<Localized> loc;
      std::optional<HybridState> clean;
      if (dt > 0.0) {
        HybridState trial = advance(st_, md_, sys_, traj_, dt);
        if (crossed_guards(trial, md_, sys_, traj_).empty()) clean = std::move(trial);
        else loc = detect_and_localize(st_, md_, dt, sys_, traj_);
      }
      if (loc && loc->dt < dt) {
        const double t0 = st_.t;
        st_ = std::move(loc->state);
        st_.t = t0 + loc->dt;
        process(std::move(loc->events));
        if (st_.t == last_t) {
          if (++stalled > 64) throw NumericalError("event cascade does not advance time at t=" + std::to_string(st_.t));
        } else {
          stalled = 0;
          last_t = st_.t;
        }
        continue;
      }

      std::vector<PendingEvent> events;
      if (loc) {
        st_ = std::move(loc->state);
        events = std::move(loc->events);
      } else if (clean) {
        st_ = std::move(*clean);
      }
      st_.t = next;
      if (next == tg) ++k;
      if (kappa_here) {
        while (next_kappa < kappas.size() && kappas[next_kappa].time <= next + kMerge)
          events.push_back({EventKind::Kappa, static_cast<int>(kappas[next_kappa++].target), -1});
      }
      if (events.empty()) record(false);
      else process(std::move(events));
    }
  } catch (const DegenerateTrajectory& e) {
    throw DegenerateTrajectory(std::string(e.what()) + " (t=" + std::to_string(st_.t) + ")");
  }

  trace_.final_state = st_;
  trace_.complete = true;
  return std::move(trace_);
}

}  // namespace

const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::XiZero: return "xi0";
    case EventKind::XiPlus: return "xi+";
    case EventKind::ZetaZero: return "zeta0";
    case EventKind::DeltaPlus: return "delta+";
    case EventKind::DeltaZero: return "delta0";
    case EventKind::BasePlus: return "Delta+";
    case EventKind::BaseZero: return "Delta0";
    case EventKind::Kappa: return "kappa";
    case EventKind::SegmentSwitch: return "switch";
  }
  return "?";
}

int processing_rank(EventKind k) {
  switch (k) {
    case EventKind::ZetaZero: return 0;
    case EventKind::XiZero: return 1;
    case EventKind::XiPlus: return 2;
    case EventKind::DeltaZero: return 3;
    case EventKind::DeltaPlus: return 4;
    case EventKind::BaseZero: return 5;
    case EventKind::BasePlus: return 6;
    case EventKind::Kappa: return 7;
    case EventKind::SegmentSwitch: return 8;
  }
  return 9;
}

Trace::Trace(std::size_t targets, std::size_t agents, bool keep_samples) : m_(targets), n_(agents), keep_(keep_samples) {}

void Trace::push_sample(const HybridState& st, std::size_t modes, const Vector& arrived, bool at_event) {
  t_.push_back(st.t);
  for (std::size_t i = 0; i < m_; ++i) {
    x_.push_back(st.X[i]);
    y_.push_back(st.Y[i]);
    arrived_.push_back(arrived[i]);
    for (std::size_t j = 0; j < n_; ++j) z_.push_back(st.Z(i, j));
  }
  for (std::size_t j = 0; j < n_; ++j) {
    rho_.push_back(st.rho[j]);
    seg_.push_back(static_cast<std::uint32_t>(st.segment[j]));
    pos_.push_back(st.s[j].x());
    pos_.push_back(st.s[j].y());
  }
  modes_.push_back(static_cast<std::uint32_t>(modes));
  tag_.push_back(at_event ? 1 : 0);
}

HybridState Trace::state(std::size_t k) const {
  HybridState st = HybridState::zero(m_, n_);
  st.sigma.resize(0);
  st.t = t_[k];
  for (std::size_t i = 0; i < m_; ++i) {
    st.X[i] = X(k, i);
    st.Y[i] = Y(k, i);
    for (std::size_t j = 0; j < n_; ++j) st.Z(i, j) = Z(k, i, j);
  }
  for (std::size_t j = 0; j < n_; ++j) {
    st.rho[j] = rho(k, j);
    st.segment[j] = segment(k, j);
    st.s[j] = position(k, j);
  }
  return st;
}

HybridState advance(const HybridState& state, const Modes& modes, const SystemParams& sys, const TrajectorySet& traj,
                    double h) {
  const Vector y0 = pack(state);
  HybridState stage = state;
  const Vector k1 = rates(state, modes, sys, traj);
  unpack(y0 + 0.5 * h * k1, stage, traj);
  const Vector k2 = rates(stage, modes, sys, traj);
  unpack(y0 + 0.5 * h * k2, stage, traj);
  const Vector k3 = rates(stage, modes, sys, traj);
  unpack(y0 + h * k3, stage, traj);
  const Vector k4 = rates(stage, modes, sys, traj);
  unpack(y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), stage, traj);
  stage.t = state.t + h;
  return stage;
}

std::vector<PendingEvent> crossed_guards(const HybridState& trial, const Modes& md, const SystemParams& sys,
                                         const TrajectorySet& traj) {
  const std::size_t m = sys.target_count(), n = sys.agent_count();
  std::vector<PendingEvent> out;
  const auto I = [](std::size_t x) { return static_cast<int>(x); };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (md.conn.at_base[j] && md.z_free[pair_index(i, j, n)] && trial.Z(i, j) < 0.0)
        out.push_back({EventKind::ZetaZero, I(i), I(j)});
  for (std::size_t i = 0; i < m; ++i) {
    if (md.x_free[i] && trial.X[i] < 0.0) out.push_back({EventKind::XiZero, I(i), -1});
    const int jc = md.conn.target_agent[i];
    if (!md.x_free[i] && jc != kNoAgent && trial.sigma[i] - service_rate(trial, sys, i, jc) > 0.0)
      out.push_back({EventKind::XiPlus, I(i), -1});
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const bool inside = (sys.targets[i] - trial.s[j]).norm() < sys.range(i, j);
      if (inside != static_cast<bool>(md.in_range[pair_index(i, j, n)]))
        out.push_back({inside ? EventKind::DeltaZero : EventKind::DeltaPlus, I(i), I(j)});
    }
  for (std::size_t j = 0; j < n; ++j) {
    const bool inside = (sys.base - trial.s[j]).norm() < sys.base_range[j];
    if (inside != static_cast<bool>(md.conn.at_base[j]))
      out.push_back({inside ? EventKind::BaseZero : EventKind::BasePlus, -1, I(j)});
  }
  for (std::size_t j = 0; j < n; ++j)
    if (trial.segment[j] + 1 < traj.agents[j].segments.size() && trial.rho[j] >= kTwoPi)
      out.push_back({EventKind::SegmentSwitch, -1, I(j)});
  std::stable_sort(out.begin(), out.end(), [](const PendingEvent& a, const PendingEvent& b) {
    return processing_rank(a.kind) < processing_rank(b.kind);
  });
  return out;
}

std::optional<Localized> detect_and_localize(const HybridState& state, const Modes& modes, double h,
                                             const SystemParams& sys, const TrajectorySet& traj) {
  HybridState trial = advance(state, modes, sys, traj, h);
  auto fired = crossed_guards(trial, modes, sys, traj);
  if (fired.empty()) return std::nullopt;
  double lo = 0.0, hi = h;
  HybridState at_hi = std::move(trial);
  while (hi - lo > sys.event_tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    HybridState probe = advance(state, modes, sys, traj, mid);
    auto f = crossed_guards(probe, modes, sys, traj);
    if (f.empty()) {
      lo = mid;
    } else {
      hi = mid;
      at_hi = std::move(probe);
      fired = std::move(f);
    }
  }
  return Localized{hi, std::move(at_hi), std::move(fired)};
}

Trace simulate(const SystemParams& sys, const std::vector<ArrivalSchedule>& arrivals, const TrajectorySet& traj,
               const SimulationOptions& opts) {
  Simulator sim(sys, arrivals, traj, opts);
  return sim.run();
}

std::vector<ArrivalSchedule> realize_arrivals(const Scenario& sc, std::uint64_t seed) {
  std::vector<ArrivalSchedule> out;
  out.reserve(sc.arrivals.size());
  for (std::size_t i = 0; i < sc.arrivals.size(); ++i)
    out.push_back(realize(sc.arrivals[i], sc.system.horizon, derive_seed(seed, i)));
  return out;
}

Trace simulate(const Scenario& sc, const TrajectorySet& traj, std::uint64_t seed, const SimulationOptions& opts) {
  return simulate(sc.system, realize_arrivals(sc, seed), traj, opts);
}

double conservation_residual(const Trace& tr) {
  double worst = 0.0;
  for (std::size_t k = 0; k < tr.sample_count(); ++k)
    for (std::size_t i = 0; i < tr.targets(); ++i) {
      double total = tr.X(k, i) + tr.Y(k, i);
      for (std::size_t j = 0; j < tr.agents(); ++j) total += tr.Z(k, i, j);
      const double a = tr.arrived(k, i);
      worst = std::max(worst, std::abs(total - a) / (1.0 + a));
    }
  return worst;
}

namespace {
void put(std::ostream& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, ",%.10g", v);
  out << buf;
}
}  // namespace

void write_trace_csv(const Trace& tr, std::ostream& out) {
  const std::size_t m = tr.targets(), n = tr.agents();
  out << "t,event";
  for (std::size_t j = 1; j <= n; ++j) out << ",x" << j << ",y" << j;
  for (std::size_t i = 1; i <= m; ++i) out << ",X" << i;
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= n; ++j) out << ",Z" << i << "_" << j;
  for (std::size_t i = 1; i <= m; ++i) out << ",Y" << i;
  out << "\n";
  char buf[32];
  for (std::size_t k = 0; k < tr.sample_count(); ++k) {
    std::snprintf(buf, sizeof buf, "%.10g", tr.time(k));
    int flag = 0;
    if (tr.at_event(k)) {
      const bool before = k + 1 < tr.sample_count() && tr.at_event(k + 1) && tr.time(k + 1) == tr.time(k);
      flag = before ? 1 : 2;
    }
    out << buf << "," << flag;
    for (std::size_t j = 0; j < n; ++j) {
      const Vec2 s = tr.position(k, j);
      put(out, s.x());
      put(out, s.y());
    }
    for (std::size_t i = 0; i < m; ++i) put(out, tr.X(k, i));
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) put(out, tr.Z(k, i, j));
    for (std::size_t i = 0; i < m; ++i) put(out, tr.Y(k, i));
    out << "\n";
  }
}

void write_events_csv(const Trace& tr, std::ostream& out) {
  out << "t,kind,i,j,endogenous,induced\n";
  char buf[32];
  for (const auto& e : tr.events) {
    std::snprintf(buf, sizeof buf, "%.12g", e.time);
    out << buf << "," << to_string(e.kind) << "," << (e.target + 1) << "," << (e.agent + 1) << ","
        << (e.endogenous ? 1 : 0) << "," << (e.induced ? 1 : 0) << "\n";
  }
}

}  // namespace harvest
