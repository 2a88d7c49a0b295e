#include <doctest.h>

#include <cmath>
#include <random>

#include "harvest/errors.hpp"
#include "harvest/trajectory.hpp"

using namespace harvest;

namespace {

FourierParams random_fourier(std::mt19937_64& rng, std::size_t gx, std::size_t gy) {
  std::uniform_real_distribution<double> amp(0.3, 2.0), ph(-3.0, 3.0), fr(0.6, 1.4), pos(0.0, 10.0);
  FourierParams f;
  f.fx = fr(rng);
  for (std::size_t n = 0; n < gx; ++n) {
    f.ax.push_back(amp(rng) / (n + 1));
    f.phix.push_back(ph(rng));
  }
  for (std::size_t n = 0; n < gy; ++n) {
    f.by.push_back(amp(rng) / (n + 1));
    f.phiy.push_back(ph(rng));
  }
  f.anchor = Vec2(pos(rng), pos(rng));
  return f;
}

EllipseParams random_ellipse(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> c(0.0, 10.0), ax(0.5, 4.0), ph(0.0, 6.2);
  return {c(rng), c(rng), ax(rng), ax(rng), ph(rng)};
}

double rel_err(double a, double b, double floor) { return std::abs(a - b) / std::max(std::abs(b), floor); }

// Central differences of a vector-valued function of the curve parameters.
template <class F>
Matrix fd_jacobian(const Curve& c, F&& f, int rows, double h = 1e-6) {
  const Vector theta = to_vector(c);
  Matrix J(rows, theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Vector p = theta, m = theta;
    p[k] += h;
    m[k] -= h;
    J.col(k) = (f(with_values(c, p)) - f(with_values(c, m))) / (2 * h);
  }
  return J;
}

double max_rel(const Matrix& analytic, const Matrix& fd) {
  const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
  return (analytic - fd).cwiseAbs().maxCoeff() / scale;
}

}  // namespace

TEST_CASE("ellipse position examples") {
  const EllipseParams e{2, 1, 2, 1, 0};
  CHECK((position(e, 0.0) - Vec2(4, 1)).norm() < 1e-15);
  CHECK((position(e, kPi / 2) - Vec2(2, 2)).norm() < 1e-15);
}

TEST_CASE("fourier curve starts at its anchor") {
  FourierParams f;
  f.ax = {1};
  f.by = {1};
  f.phix = {0};
  f.phiy = {0};
  CHECK(position(f, 0.0).norm() < 1e-15);

  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const auto g = random_fourier(rng, 1 + k % 5, 1 + (k / 5) % 5);
    CHECK((position(g, 0.0) - g.anchor).norm() < 1e-12);
  }
}

TEST_CASE("phase rate examples") {
  CHECK(phase_rate(EllipseParams{0, 0, 2, 2, 0}, 1.234) == doctest::Approx(0.5));
  CHECK(phase_rate(EllipseParams{0, 0, 2, 1, 0}, 0.0) == doctest::Approx(1.0));

  // a cos(2 pi rho) vanishes at rho = 1/4 in both coordinates.
  FourierParams f;
  f.ax = {1};
  f.by = {1};
  f.phix = {0};
  f.phiy = {0};
  CHECK_THROWS_AS(phase_rate(f, 0.25), DegenerateTrajectory);
}

TEST_CASE("velocity has unit length and follows increasing phase") {
  CHECK((velocity(EllipseParams{0, 0, 1, 1, 0}, 0.0) - Vec2(0, 1)).norm() < 1e-15);

  const Vec2 v0 = velocity(EllipseParams{0, 0, 2, 1, 0}, 0.0);
  const Vec2 v1 = velocity(EllipseParams{0, 0, 2, 1, kPi / 2}, 0.0);
  CHECK((v1 - Vec2(-v0.y(), v0.x())).norm() < 1e-12);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> r(0, kTwoPi);
  for (int k = 0; k < 200; ++k) {
    CHECK(std::abs(velocity(random_ellipse(rng), r(rng)).norm() - 1.0) < 1e-12);
    CHECK(std::abs(velocity(random_fourier(rng, 3, 2), r(rng)).norm() - 1.0) < 1e-12);
  }
}

TEST_CASE("ellipse partial columns for A, B, a, b") {
  std::mt19937_64 rng(3);
  const auto e = random_ellipse(rng);
  const Jacobian2 J = param_partials(e, 0.77);
  CHECK(J.col(0) == Vec2(1, 0));
  CHECK(J.col(1) == Vec2(0, 1));

  const Jacobian2 K = param_partials(EllipseParams{1, 1, 2, 3, 0}, 0.0);
  CHECK((K.col(2) - Vec2(1, 0)).norm() < 1e-15);
  CHECK(K.col(3).norm() < 1e-15);
}

TEST_CASE("position, tangent and phase-rate partials match finite differences") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> r(0, kTwoPi);
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    for (const Curve c : {Curve(random_ellipse(rng)), Curve(random_fourier(rng, 1 + k % 5, 1 + k % 3))}) {
      const double rho = r(rng);
      const Matrix fd = fd_jacobian(c, [&](const Curve& x) -> Vector { return position(x, rho); }, 2);
      worst = std::max(worst, max_rel(param_partials(c, rho), fd));
      const Matrix fdt = fd_jacobian(c, [&](const Curve& x) -> Vector { return phase_tangent(x, rho); }, 2);
      CHECK(max_rel(tangent_partials(c, rho), fdt) < 1e-6);
      const Matrix fdr = fd_jacobian(c, [&](const Curve& x) -> Vector { return Vector::Constant(1, phase_rate(x, rho)); }, 1);
      CHECK(max_rel(phase_rate_partials(c, rho), fdr) < 1e-6);

      const double h = 1e-6;
      const Vec2 dt = (phase_tangent(c, rho + h) - phase_tangent(c, rho - h)) / (2 * h);
      CHECK((phase_curvature(c, rho) - dt).norm() / std::max(1.0, dt.norm()) < 1e-6);
      const double dr = (phase_rate(c, rho + h) - phase_rate(c, rho - h)) / (2 * h);
      CHECK(rel_err(phase_rate_slope(c, rho), dr, 1.0) < 1e-6);
    }
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("unchained fourier partials drop the anchoring term") {
  FourierParams f;
  f.ax = {1.5};
  f.by = {0.7};
  f.phix = {0.4};
  f.phiy = {1.1};
  const double rho = 0.3;
  const Jacobian2 c = param_partials(f, rho, FourierChain::Chained);
  const Jacobian2 u = param_partials(f, rho, FourierChain::Unchained);
  CHECK(c(0, 1) == doctest::Approx(u(0, 1) - std::sin(0.4)));
  CHECK(c(0, 3) == doctest::Approx(u(0, 3) - 1.5 * std::cos(0.4)));
  CHECK(c(0, 0) == u(0, 0));
}

TEST_CASE("base penalty values") {
  CHECK(ellipse_base_penalty({0, 0, 1, 1, 0}, Vec2(1, 0)).value == doctest::Approx(0.0));
  CHECK(ellipse_base_penalty({0, 0, 1, 1, 0}, Vec2(0, 0)).value == doctest::Approx(1.0));
}

TEST_CASE("base penalty vanishes exactly on the ellipse") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> r(0, kTwoPi);
  for (int k = 0; k < 100; ++k) {
    const auto e = random_ellipse(rng);
    const Vec2 on = position(e, r(rng));
    CHECK(ellipse_base_penalty(e, on).value < 1e-20);
    const Vec2 off = on + 0.1 * (on - Vec2(e.A, e.B)).normalized();
    CHECK(ellipse_base_penalty(e, off).value > 1e-6);
  }
}

TEST_CASE("base penalty gradient matches finite differences") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> c(0.0, 10.0);
  for (int k = 0; k < 100; ++k) {
    const auto e = random_ellipse(rng);
    const Vec2 base(c(rng), c(rng));
    const Curve curve = e;
    const Matrix fd = fd_jacobian(
        curve, [&](const Curve& x) -> Vector {
          return Vector::Constant(1, ellipse_base_penalty(std::get<EllipseParams>(x), base).value);
        }, 1, 1e-6);
    const auto pen = ellipse_base_penalty(e, base);
    for (int p = 0; p < 5; ++p) CHECK(rel_err(pen.gradient[p], fd(0, p), 1e-3 * fd.cwiseAbs().maxCoeff() + 1e-8) < 1e-6);
  }
}

TEST_CASE("revolution time of circles and ellipses") {
  CHECK(revolution_time(EllipseParams{0, 0, 1.5, 1.5, 0.3}) == doctest::Approx(kTwoPi * 1.5).epsilon(1e-12));
  // Ramanujan's approximation is accurate to ~1e-10 relative at this eccentricity.
  const double a = 3, b = 2, h = (a - b) * (a - b) / ((a + b) * (a + b));
  const double ram = kPi * (a + b) * (1 + 3 * h / (10 + std::sqrt(4 - 3 * h)));
  CHECK(revolution_time(EllipseParams{0, 0, a, b, 1.0}) == doctest::Approx(ram).epsilon(1e-8));
}

TEST_CASE("active segment") {
  SegmentedTrajectory one{{EllipseParams{0, 0, 1, 1, 0}}};
  CHECK(active_segment(one, 0.0).segment == 0);
  CHECK(active_segment(one, 50.0).segment == 0);
  // Beyond the last completion the phase wraps.
  CHECK(active_segment(one, kTwoPi + 1.0).rho == doctest::Approx(1.0));

  SegmentedTrajectory two{{EllipseParams{0, 0, 1, 1, 0}, EllipseParams{3, 0, 1, 1, 0}}};
  // Integrating drho/dt = 1 for a unit circle gives the first completion at 2 pi.
  const double t1 = kTwoPi;
  CHECK(active_segment(two, t1 - 1e-6).segment == 0);
  CHECK(active_segment(two, t1 + 1e-6).segment == 1);
  CHECK(active_segment(two, t1 + 0.5).rho == doctest::Approx(0.5));

  SegmentedTrajectory ell{{EllipseParams{0, 0, 2, 1, 0}}};
  // Arc length inversion: phase at half the perimeter is pi by symmetry.
  CHECK(active_segment(ell, 0.5 * revolution_time(ell.segments[0])).rho == doctest::Approx(kPi).epsilon(1e-10));
}

TEST_CASE("trajectory set layout") {
  FourierParams f;
  f.ax = {1, 2};
  f.by = {3};
  f.phix = {0.1, 0.2};
  f.phiy = {0.3};
  TrajectorySet set{Family::Fourier, {SegmentedTrajectory{{f}}, SegmentedTrajectory{{f}}}};
  CHECK(set.size() == 14);
  CHECK(set.agent_offset(1) == 7);
  const auto names = set.parameter_names();
  CHECK(names[0] == "agent1.seg1.fx");
  CHECK(names[8] == "agent2.seg1.a1");
  Vector theta = set.flatten();
  theta[7] = 0.9;
  const auto moved = set.with_values(theta);
  CHECK(std::get<FourierParams>(moved.agents[1].segments[0]).fx == 0.9);
  CHECK(moved.flatten() == theta);

  TrajectorySet e{Family::Ellipse, {SegmentedTrajectory{{EllipseParams{0, 0, 1, 1, -0.5}, EllipseParams{0, 0, 1, 1, 7.0}}}}};
  const Vec2 before = position(e.agents[0].segments[0], 0.4);
  normalize_angles(e);
  CHECK(std::get<EllipseParams>(e.agents[0].segments[0]).phi == doctest::Approx(kTwoPi - 0.5));
  CHECK(std::get<EllipseParams>(e.agents[0].segments[1]).phi == doctest::Approx(7.0 - kTwoPi));
  CHECK((position(e.agents[0].segments[0], 0.4) - before).norm() < 1e-12);
}
