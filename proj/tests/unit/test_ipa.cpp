#include <doctest.h>

#include <random>

#include "harvest/errors.hpp"
#include "harvest/hybridsim.hpp"
#include "harvest/ipa.hpp"
#include "harvest/objective.hpp"

using namespace harvest;

namespace {

SystemParams crossing_system(double horizon) {
  SystemParams s;
  s.l1 = s.l2 = 10;
  s.base = Vec2(2, 5);
  s.agents = 1;
  s.targets = {Vec2(8, 5)};
  s.q = {1};
  s.range = Matrix::Constant(1, 1, 1.0);
  s.base_range = Vector::Constant(1, 1.0);
  s.mu = Matrix::Constant(1, 1, 50.0);
  s.beta = Matrix::Constant(1, 1, 500.0);
  s.horizon = horizon;
  return s;
}

TrajectorySet one_ellipse(const EllipseParams& e) { return {Family::Ellipse, {SegmentedTrajectory{{e}}}}; }

std::vector<ArrivalSchedule> constant(std::size_t m, double rate) {
  return std::vector<ArrivalSchedule>(m, ArrivalSchedule({0.0}, {rate}));
}

EventRecord bare_event(EventKind kind, std::size_t m, std::size_t n) {
  EventRecord ev;
  ev.kind = kind;
  ev.state = ev.after = HybridState::zero(m, n);
  ev.flow_before = ev.flow_after = FlowRates{Vector::Zero(m), Matrix::Zero(m, n), Vector::Zero(m)};
  ev.modes_before.conn.target_agent.assign(m, kNoAgent);
  ev.modes_before.conn.at_base.assign(n, 0);
  ev.modes_after = ev.modes_before;
  return ev;
}

Eigen::RowVectorXd row(std::initializer_list<double> v) {
  Eigen::RowVectorXd r(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) r[k++] = x;
  return r;
}

}  // namespace

TEST_CASE("proximity partial: examples and finite differences") {
  LinearRamp ramp;
  Matrix sp = Matrix::Zero(2, 1);
  sp(0, 0) = 0.2;  // dD/dtheta = 0.2 when s - w points along x
  CHECK(proximity_partial(Vec2(0, 0), Vec2(0.5, 0), sp, 1.0, ramp)[0] == doctest::Approx(-0.2));
  CHECK(proximity_partial(Vec2(0, 0), Vec2(1.5, 0), sp, 1.0, ramp)[0] == 0.0);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  const Vec2 w(5, 5);
  for (int draw = 0; draw < 100; ++draw) {
    const EllipseParams e{5 + u(rng), 5 + u(rng), 1.0 + 0.3 * u(rng), 0.8 + 0.3 * u(rng), u(rng)};
    const double rho = 3 * (1 + u(rng));
    const double r = 1.5;
    const Vec2 s = position(e, rho);
    if ((s - w).norm() >= r - 1e-3) continue;
    const Matrix partial = param_partials(e, rho);
    const Eigen::RowVectorXd got = proximity_partial(w, s, partial, r, ramp);
    const Vector th = to_vector(e);
    for (Eigen::Index k = 0; k < th.size(); ++k) {
      const double h = 1e-6;
      Vector tp = th, tm = th;
      tp[k] += h;
      tm[k] -= h;
      const double fd = (proximity_rate(w, position(with_values(e, tp), rho), r) -
                         proximity_rate(w, position(with_values(e, tm), rho), r)) /
                        (2 * h);
      CHECK(std::abs(got[k] - fd) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("event time derivative examples") {
  const TrajectorySet traj = one_ellipse({5, 5, 1, 1, 0});
  SystemParams sys = crossing_system(10);
  SensitivityState s = SensitivityState::zero(1, 1, 5);

  EventRecord xi = bare_event(EventKind::XiZero, 1, 1);
  xi.target = 0;
  xi.flow_before.X[0] = 0.5 - 1.5;
  s.X(0, 0) = 0.2;
  CHECK(event_time_derivative(xi, s, traj, sys, IpaMode::Paper)[0] == doctest::Approx(0.2));

  EventRecord zeta = bare_event(EventKind::ZetaZero, 1, 1);
  zeta.target = 0;
  zeta.agent = 0;
  zeta.flow_before.Z(0, 0) = -5.0;  // beta P_B = 5
  s.Z(0, 0) = 0.3;
  CHECK(event_time_derivative(zeta, s, traj, sys, IpaMode::Paper)[0] == doctest::Approx(0.06));

  EventRecord kappa = bare_event(EventKind::Kappa, 1, 1);
  kappa.target = 0;
  kappa.endogenous = false;
  CHECK(event_time_derivative(kappa, s, traj, sys, IpaMode::Augmented).isZero());

  // A vanishing denominator is refused.
  xi.flow_before.X[0] = 1e-12;
  CHECK_THROWS_AS(event_time_derivative(xi, s, traj, sys, IpaMode::Paper), TangentialCrossing);
}

TEST_CASE("range crossing tau' against the analytic crossing time") {
  // Unit circle centred at (c, 0) crosses |s| = 1.5 from the origin; move c and
  // re-solve for the first crossing time numerically.
  SystemParams sys = crossing_system(10);
  sys.targets = {Vec2(0, 0)};
  sys.range(0, 0) = 1.5;
  auto first_crossing = [](double cx) {
    // |(cx + cos t, sin t)| = 1.5  <=>  cx^2 + 1 + 2 cx cos t = 2.25
    return std::acos((2.25 - cx * cx - 1) / (2 * cx));
  };
  const double cx = 1.2;
  const TrajectorySet traj = one_ellipse({cx, 0, 1, 1, 0});
  EventRecord ev = bare_event(EventKind::DeltaPlus, 1, 1);
  ev.target = ev.agent = 0;
  const double tau = first_crossing(cx);
  ev.state.rho[0] = tau;
  ev.state.s[0] = position(traj.agents[0].segments[0], tau);
  const SensitivityState s = SensitivityState::zero(1, 1, 5);
  const double h = 1e-6;
  const double fd = (first_crossing(cx + h) - first_crossing(cx - h)) / (2 * h);
  CHECK(event_time_derivative(ev, s, traj, sys, IpaMode::Paper)[0] == doctest::Approx(fd).epsilon(1e-6));
}

TEST_CASE("jump rules") {
  const TrajectorySet traj = one_ellipse({5, 5, 1, 1, 0});

  SUBCASE("xi0 moves X' into the connected Z'") {
    EventRecord ev = bare_event(EventKind::XiZero, 1, 1);
    ev.target = 0;
    ev.modes_before.conn.target_agent[0] = 0;
    ev.flow_before.X[0] = -1.0;
    ev.flow_before.Z(0, 0) = 1.5;
    ev.flow_after.Z(0, 0) = 0.5;
    SensitivityState s = SensitivityState::zero(1, 1, 2);
    s.X.row(0) = row({0.2, -0.1});
    s.Z.row(0) = row({1.0, 2.0});
    const auto tau = -s.X.row(0) / ev.flow_before.X[0];
    const SensitivityState out = apply_event_jump(ev, s, tau, traj, IpaMode::Paper);
    CHECK(out.X.row(0) == row({0.0, 0.0}));
    CHECK(out.Z.row(0).isApprox(row({1.2, 1.9}), 1e-15));
    CHECK(out.Y.isZero());
  }

  SUBCASE("zeta0 moves Z' into Y'") {
    EventRecord ev = bare_event(EventKind::ZetaZero, 1, 1);
    ev.target = ev.agent = 0;
    ev.flow_before.Z(0, 0) = -5.0;
    ev.flow_before.Y[0] = 5.0;
    SensitivityState s = SensitivityState::zero(1, 1, 2);
    s.Z.row(0) = row({0.3, -0.4});
    s.Y.row(0) = row({1.0, 1.0});
    s.X.row(0) = row({7.0, 8.0});
    const SensitivityState out = apply_event_jump(ev, s, -s.Z.row(0) / -5.0, traj, IpaMode::Paper);
    CHECK(out.Z.row(0) == row({0.0, 0.0}));
    CHECK(out.Y.row(0).isApprox(row({1.3, 0.6}), 1e-15));
    CHECK(out.X.row(0) == s.X.row(0));
  }

  SUBCASE("Delta0 and delta+ without handover leave sensitivities unchanged") {
    for (EventKind k : {EventKind::BaseZero, EventKind::DeltaPlus, EventKind::DeltaZero, EventKind::BasePlus}) {
      EventRecord ev = bare_event(k, 1, 1);
      ev.target = ev.agent = 0;
      ev.flow_before.X[0] = ev.flow_after.X[0] = 0.5;  // P = 0 on the boundary: flows continuous
      SensitivityState s = SensitivityState::zero(1, 1, 2);
      s.X.row(0) = row({0.4, 0.1});
      s.Z.row(0) = row({0.2, 0.3});
      const SensitivityState out = apply_event_jump(ev, s, row({0.7, -2.0}), traj, IpaMode::Paper);
      CHECK(out.X == s.X);
      CHECK(out.Z == s.Z);
      CHECK(out.Y == s.Y);
    }
  }

  SUBCASE("delta+ with handover adds the new agent's service times tau'") {
    const TrajectorySet two{Family::Ellipse,
                            {SegmentedTrajectory{{EllipseParams{5, 5, 1, 1, 0}}},
                             SegmentedTrajectory{{EllipseParams{5, 5, 1, 1, 0}}}}};
    EventRecord ev = bare_event(EventKind::DeltaPlus, 1, 2);
    ev.target = 0;
    ev.agent = 0;
    ev.handover = 1;
    const double sigma = 0.5, mu_p = 12.0;
    ev.flow_before.X[0] = sigma;
    ev.flow_after.X[0] = sigma - mu_p;
    ev.flow_after.Z(0, 1) = mu_p;
    SensitivityState s = SensitivityState::zero(1, 2, 2);
    s.X.row(0) = row({1.0, 2.0});
    const auto tau = row({0.1, -0.3});
    const SensitivityState out = apply_event_jump(ev, s, tau, two, IpaMode::Paper);
    CHECK(out.X.row(0).isApprox(s.X.row(0) + mu_p * tau, 1e-15));
    CHECK(out.Z.row(pair_index(0, 1, 2)).isApprox(-mu_p * tau, 1e-15));
    CHECK(out.Z.row(pair_index(0, 0, 2)).isZero());
  }
}

TEST_CASE("inter-event integration: pass-through, delivery and unserved targets") {
  SystemParams sys = crossing_system(10);
  const TrajectorySet traj = one_ellipse({3, 5, 0.5, 0.5, 0});  // circles inside the base range
  Modes md;
  md.conn.target_agent = {kNoAgent};
  md.conn.at_base = {1};
  md.in_range = {0};
  md.x_free = {1};
  md.z_free = {1};
  SensitivityState s = SensitivityState::zero(1, 1, 5);
  s.X.row(0) = row({1, 2, 3, 4, 5});
  s.Z.row(0) = row({0.5, -0.5, 0.25, 0, 1});
  const Vector rho = Vector::Constant(1, 0.3);
  const SensitivityState out =
      propagate_interevent(s, rho, {0}, md, 0.2, traj, sys, IpaMode::Augmented);
  CHECK(out.X == s.X);  // unserved: X' constant
  CHECK(!(out.Z - s.Z).isZero());
  // Whatever leaves Z' arrives in Y'.
  CHECK(((out.Z - s.Z) + (out.Y - s.Y)).cwiseAbs().maxCoeff() <= 1e-9);

  // Collecting with an empty queue: the pass-through rate is sigma, so Z' holds.
  const TrajectorySet near = one_ellipse({8, 5, 0.3, 0.3, 0});
  md.conn.target_agent = {0};
  md.conn.at_base = {0};
  md.in_range = {1};
  md.x_free = {0};
  md.z_free = {1};
  const SensitivityState pinned = propagate_interevent(s, rho, {0}, md, 0.2, near, sys, IpaMode::Augmented);
  CHECK(pinned.Z == s.Z);
  CHECK(pinned.X == s.X);
}

TEST_CASE("trajectories that never meet anything have zero queue sensitivities") {
  SystemParams sys = crossing_system(10);
  sys.base = Vec2(9, 1);
  const Trace tr = simulate(sys, constant(1, 0.5), one_ellipse({3, 7, 1, 0.7, 0.2}));
  for (IpaMode mode : {IpaMode::Paper, IpaMode::Augmented}) {
    const IpaResult r = run_ipa(tr, sys, mode);
    CHECK(r.final.X.isZero());
    CHECK(r.final.Z.isZero());
    CHECK(r.final.Y.isZero());
    CHECK(r.backlog.isZero());
    CHECK(!r.idle.isZero());
  }
}

TEST_CASE("final sensitivities match brute-force perturbation in augmented mode") {
  const SystemParams sys = crossing_system(9);
  const TrajectorySet traj = one_ellipse({5, 5.2, 3.3, 1.5, 0.1});
  const auto arr = constant(1, 0.5);
  const Trace tr = simulate(sys, arr, traj);
  const IpaResult r = run_ipa(tr, sys, IpaMode::Augmented);
  const Vector th = traj.flatten();
  const double h = 1e-4;
  for (Eigen::Index k = 0; k < th.size(); ++k) {
    Vector tp = th, tm = th;
    tp[k] += h;
    tm[k] -= h;
    const HybridState up = simulate(sys, arr, traj.with_values(tp)).final_state;
    const HybridState dn = simulate(sys, arr, traj.with_values(tm)).final_state;
    const double fx = (up.X[0] - dn.X[0]) / (2 * h);
    const double fz = (up.Z(0, 0) - dn.Z(0, 0)) / (2 * h);
    const double fy = (up.Y[0] - dn.Y[0]) / (2 * h);
    CAPTURE(k);
    CHECK(std::abs(r.final.X(0, k) - fx) <= 1e-2 * std::max(std::abs(fx), 1e-3));
    CHECK(std::abs(r.final.Z(0, k) - fz) <= 1e-2 * std::max(std::abs(fz), 1e-3));
    CHECK(std::abs(r.final.Y(0, k) - fy) <= 1e-2 * std::max(std::abs(fy), 1e-3));
  }
}

TEST_CASE("sensitivity invariants along a full run") {
  SystemParams sys = crossing_system(30);
  sys.agents = 2;
  sys.targets = {Vec2(8, 5), Vec2(5, 8.5)};
  sys.q = {1, 2};
  sys.range = Matrix::Constant(2, 2, 1.0);
  sys.base_range = Vector::Constant(2, 1.0);
  sys.mu = Matrix::Constant(2, 2, 50.0);
  sys.beta = Matrix::Constant(2, 2, 500.0);
  const TrajectorySet traj{Family::Ellipse,
                           {SegmentedTrajectory{{EllipseParams{5, 5.2, 3.3, 1.5, 0.1}}},
                            SegmentedTrajectory{{EllipseParams{3.5, 6.5, 2.2, 2.0, 0.7}}}}};
  const Trace tr = simulate(sys, constant(2, 0.6), traj);
  REQUIRE(tr.events.size() > 6);

  for (IpaMode mode : {IpaMode::Paper, IpaMode::Augmented}) {
    // X' vanishes wherever X is pinned at zero.
    std::size_t pinned = 0;
    run_ipa(tr, sys, mode, [&](std::size_t k, const SensitivityState& s) {
      for (std::size_t i = 0; i < 2; ++i)
        if (tr.X(k, i) == 0.0 && !tr.modes(k).x_free[i] && !tr.at_event(k)) {
          ++pinned;
          CHECK(s.X.row(i).isZero());
        }
    });
    CHECK(pinned > 0);
  }

  // Jump locality on every recorded event.
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto p = static_cast<Eigen::Index>(traj.size());
  for (const auto& ev : tr.events) {
    if (ev.kind != EventKind::XiZero && ev.kind != EventKind::ZetaZero) continue;
    SensitivityState s = SensitivityState::zero(2, 2, traj.size());
    for (auto* m : {&s.X, &s.Z, &s.Y})
      for (Eigen::Index a = 0; a < m->rows(); ++a)
        for (Eigen::Index b = 0; b < p; ++b) (*m)(a, b) = g(rng);
    const auto tau = event_time_derivative(ev, s, traj, sys, IpaMode::Paper);
    const SensitivityState out = apply_event_jump(ev, s, tau, traj, IpaMode::Paper);
    const auto i = static_cast<Eigen::Index>(ev.target);
    for (Eigen::Index r = 0; r < 2; ++r) {
      if (ev.kind == EventKind::XiZero && r == i) continue;
      CHECK(out.X.row(r).isApprox(s.X.row(r), 1e-12));
    }
    for (Eigen::Index r = 0; r < 2; ++r) {
      if (ev.kind == EventKind::ZetaZero && r == i) continue;
      CHECK(out.Y.row(r).isApprox(s.Y.row(r), 1e-12));
    }
    for (Eigen::Index r = 0; r < 4; ++r) {
      const int touched = ev.kind == EventKind::XiZero
                              ? static_cast<int>(pair_index(ev.target, ev.modes_before.conn.target_agent[ev.target], 2))
                              : static_cast<int>(pair_index(ev.target, ev.agent, 2));
      if (r == touched) continue;
      CHECK(out.Z.row(r).isApprox(s.Z.row(r), 1e-12));
    }
  }
}

TEST_CASE("sensitivities ignore arrival values that leave the event schedule alone") {
  // The queue never empties at this rate, so only sigma differs between the two runs.
  SystemParams sys = crossing_system(12);
  sys.mu(0, 0) = 2.0;
  const TrajectorySet traj = one_ellipse({5, 5.2, 3.3, 1.5, kPi});
  const std::vector<ArrivalSchedule> a{ArrivalSchedule({0.0, 2.5, 7.0}, {0.3, 0.7, 0.3})};
  const std::vector<ArrivalSchedule> b{ArrivalSchedule({0.0, 2.5, 7.0}, {0.7, 0.3, 0.7})};
  const Trace ta = simulate(sys, a, traj);
  const Trace tb = simulate(sys, b, traj);
  REQUIRE(ta.events.size() == tb.events.size());
  for (std::size_t k = 0; k < ta.events.size(); ++k) REQUIRE(ta.events[k].time == tb.events[k].time);
  for (IpaMode mode : {IpaMode::Paper, IpaMode::Augmented}) {
    const IpaResult ra = run_ipa(ta, sys, mode), rb = run_ipa(tb, sys, mode);
    CHECK(ra.final.X == rb.final.X);
    CHECK(ra.final.Z == rb.final.Z);
    CHECK(ra.final.Y == rb.final.Y);
    CHECK(ra.backlog == rb.backlog);
    CHECK(ra.idle == rb.idle);
  }
}
