#include "harvest/trajectory.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

#include "harvest/errors.hpp"

namespace harvest {

namespace {

constexpr double kDegenerateSpeed = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGlNodes = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
    0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGlWeights = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
    0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

double speed_in_phase(const Curve& c, double rho) { return phase_tangent(c, rho).norm(); }

// Arc length of rho in [lo, hi].
double arc_length(const Curve& c, double lo, double hi, int panels = 128) {
  const double w = (hi - lo) / panels;
  double sum = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * w;
    for (std::size_t k = 0; k < kGlNodes.size(); ++k)
      sum += kGlWeights[k] * speed_in_phase(c, mid + 0.5 * w * kGlNodes[k]);
  }
  return 0.5 * w * sum;
}

// Phase reached after travelling `length` from rho = 0, for 0 <= length <= revolution.
double phase_at_length(const Curve& c, double length, double revolution) {
  double lo = 0.0, hi = kTwoPi;
  double rho = kTwoPi * length / revolution;
  for (int it = 0; it < 60; ++it) {
    const double f = arc_length(c, 0.0, rho, 32) - length;
    if (std::abs(f) < 1e-13 * (1.0 + revolution)) break;
    if (f > 0) hi = rho; else lo = rho;
    const double d = speed_in_phase(c, rho);
    double next = d > 0 ? rho - f / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    rho = next;
  }
  return rho;
}

}  // namespace

const char* to_string(Family f) { return f == Family::Ellipse ? "ellipse" : "fourier"; }

Family family_from_string(const std::string& s) {
  if (s == "ellipse") return Family::Ellipse;
  if (s == "fourier") return Family::Fourier;
  throw std::invalid_argument("unknown trajectory family '" + s + "'");
}

double FourierParams::a0() const {
  double v = anchor.x();
  for (std::size_t n = 0; n < ax.size(); ++n) v -= ax[n] * std::sin(phix[n]);
  return v;
}

double FourierParams::b0() const {
  double v = anchor.y();
  for (std::size_t n = 0; n < by.size(); ++n) v -= by[n] * std::sin(phiy[n]);
  return v;
}

std::size_t parameter_count(const Curve& c) {
  return std::visit(overloaded{[](const EllipseParams&) { return EllipseParams::kSize; },
                               [](const FourierParams& f) { return f.size(); }},
                    c);
}

Vector to_vector(const Curve& c) {
  return std::visit(
      overloaded{[](const EllipseParams& e) {
                   Vector v(5);
                   v << e.A, e.B, e.a, e.b, e.phi;
                   return v;
                 },
                 [](const FourierParams& f) {
                   Vector v(f.size());
                   Eigen::Index k = 0;
                   v[k++] = f.fx;
                   for (double x : f.ax) v[k++] = x;
                   for (double x : f.by) v[k++] = x;
                   for (double x : f.phix) v[k++] = x;
                   for (double x : f.phiy) v[k++] = x;
                   return v;
                 }},
      c);
}

Curve with_values(const Curve& shape, const Vector& v) {
  if (static_cast<std::size_t>(v.size()) != parameter_count(shape))
    throw std::invalid_argument("parameter vector length does not match the curve");
  return std::visit(overloaded{[&](const EllipseParams&) -> Curve {
                                 return EllipseParams{v[0], v[1], v[2], v[3], v[4]};
                               },
                               [&](const FourierParams& f) -> Curve {
                                 FourierParams out = f;
                                 Eigen::Index k = 0;
                                 out.fx = v[k++];
                                 for (double& x : out.ax) x = v[k++];
                                 for (double& x : out.by) x = v[k++];
                                 for (double& x : out.phix) x = v[k++];
                                 for (double& x : out.phiy) x = v[k++];
                                 return out;
                               }},
                    shape);
}

Vec2 position(const Curve& c, double rho) {
  return std::visit(
      overloaded{[rho](const EllipseParams& e) {
                   const double cr = std::cos(rho), sr = std::sin(rho);
                   const double cp = std::cos(e.phi), sp = std::sin(e.phi);
                   return Vec2(e.A + e.a * cr * cp - e.b * sr * sp,
                               e.B + e.a * cr * sp + e.b * sr * cp);
                 },
                 [rho](const FourierParams& f) {
                   Vec2 s(f.a0(), f.b0());
                   for (std::size_t n = 0; n < f.ax.size(); ++n)
                     s.x() += f.ax[n] * std::sin(kTwoPi * (n + 1) * f.fx * rho + f.phix[n]);
                   for (std::size_t n = 0; n < f.by.size(); ++n)
                     s.y() += f.by[n] * std::sin(kTwoPi * (n + 1) * rho + f.phiy[n]);
                   return s;
                 }},
      c);
}

Vec2 phase_tangent(const Curve& c, double rho) {
  return std::visit(
      overloaded{[rho](const EllipseParams& e) {
                   const double cr = std::cos(rho), sr = std::sin(rho);
                   const double cp = std::cos(e.phi), sp = std::sin(e.phi);
                   return Vec2(-e.a * sr * cp - e.b * cr * sp, -e.a * sr * sp + e.b * cr * cp);
                 },
                 [rho](const FourierParams& f) {
                   Vec2 d = Vec2::Zero();
                   for (std::size_t n = 0; n < f.ax.size(); ++n) {
                     const double w = kTwoPi * (n + 1) * f.fx;
                     d.x() += f.ax[n] * w * std::cos(w * rho + f.phix[n]);
                   }
                   for (std::size_t n = 0; n < f.by.size(); ++n) {
                     const double w = kTwoPi * (n + 1);
                     d.y() += f.by[n] * w * std::cos(w * rho + f.phiy[n]);
                   }
                   return d;
                 }},
      c);
}

Vec2 phase_curvature(const Curve& c, double rho) {
  return std::visit(
      overloaded{[rho](const EllipseParams& e) {
                   const double cr = std::cos(rho), sr = std::sin(rho);
                   const double cp = std::cos(e.phi), sp = std::sin(e.phi);
                   return Vec2(-e.a * cr * cp + e.b * sr * sp, -e.a * cr * sp - e.b * sr * cp);
                 },
                 [rho](const FourierParams& f) {
                   Vec2 d = Vec2::Zero();
                   for (std::size_t n = 0; n < f.ax.size(); ++n) {
                     const double w = kTwoPi * (n + 1) * f.fx;
                     d.x() -= f.ax[n] * w * w * std::sin(w * rho + f.phix[n]);
                   }
                   for (std::size_t n = 0; n < f.by.size(); ++n) {
                     const double w = kTwoPi * (n + 1);
                     d.y() -= f.by[n] * w * w * std::sin(w * rho + f.phiy[n]);
                   }
                   return d;
                 }},
      c);
}

double phase_rate(const Curve& c, double rho) {
  const double speed = phase_tangent(c, rho).norm();
  if (!(speed >= kDegenerateSpeed))
    throw DegenerateTrajectory("trajectory is stationary in phase at rho=" + std::to_string(rho));
  return 1.0 / speed;
}

Vec2 velocity(const Curve& c, double rho) {
  const Vec2 d = phase_tangent(c, rho);
  return d * phase_rate(c, rho);
}

Jacobian2 param_partials(const Curve& c, double rho, FourierChain chain) {
  return std::visit(
      overloaded{
          [rho](const EllipseParams& e) {
            const double cr = std::cos(rho), sr = std::sin(rho);
            const double cp = std::cos(e.phi), sp = std::sin(e.phi);
            Jacobian2 J(2, 5);
            J << 1.0, 0.0, cr * cp, -sr * sp, -e.a * cr * sp - e.b * sr * cp,  //
                0.0, 1.0, cr * sp, sr * cp, e.a * cr * cp - e.b * sr * sp;
            return J;
          },
          [rho, chain](const FourierParams& f) {
            const std::size_t gx = f.ax.size(), gy = f.by.size();
            const bool chained = chain == FourierChain::Chained;
            Jacobian2 J = Jacobian2::Zero(2, static_cast<Eigen::Index>(f.size()));
            const Eigen::Index oa = 1, ob = oa + gx, opx = ob + gy, opy = opx + gx;
            for (std::size_t n = 0; n < gx; ++n) {
              const double k = kTwoPi * (n + 1);
              const double arg = k * f.fx * rho + f.phix[n];
              J(0, 0) += f.ax[n] * k * rho * std::cos(arg);
              J(0, oa + n) = std::sin(arg) - (chained ? std::sin(f.phix[n]) : 0.0);
              J(0, opx + n) = f.ax[n] * (std::cos(arg) - (chained ? std::cos(f.phix[n]) : 0.0));
            }
            for (std::size_t n = 0; n < gy; ++n) {
              const double arg = kTwoPi * (n + 1) * rho + f.phiy[n];
              J(1, ob + n) = std::sin(arg) - (chained ? std::sin(f.phiy[n]) : 0.0);
              J(1, opy + n) = f.by[n] * (std::cos(arg) - (chained ? std::cos(f.phiy[n]) : 0.0));
            }
            return J;
          }},
      c);
}

Jacobian2 tangent_partials(const Curve& c, double rho) {
  return std::visit(
      overloaded{[rho](const EllipseParams& e) {
                   const double cr = std::cos(rho), sr = std::sin(rho);
                   const double cp = std::cos(e.phi), sp = std::sin(e.phi);
                   Jacobian2 J(2, 5);
                   J << 0.0, 0.0, -sr * cp, -cr * sp, e.a * sr * sp - e.b * cr * cp,  //
                       0.0, 0.0, -sr * sp, cr * cp, -e.a * sr * cp - e.b * cr * sp;
                   return J;
                 },
                 [rho](const FourierParams& f) {
                   const std::size_t gx = f.ax.size(), gy = f.by.size();
                   Jacobian2 J = Jacobian2::Zero(2, static_cast<Eigen::Index>(f.size()));
                   const Eigen::Index oa = 1, ob = oa + gx, opx = ob + gy, opy = opx + gx;
                   for (std::size_t n = 0; n < gx; ++n) {
                     const double k = kTwoPi * (n + 1);
                     const double w = k * f.fx;
                     const double arg = w * rho + f.phix[n];
                     J(0, 0) += f.ax[n] * (k * std::cos(arg) - w * k * rho * std::sin(arg));
                     J(0, oa + n) = w * std::cos(arg);
                     J(0, opx + n) = -f.ax[n] * w * std::sin(arg);
                   }
                   for (std::size_t n = 0; n < gy; ++n) {
                     const double w = kTwoPi * (n + 1);
                     const double arg = w * rho + f.phiy[n];
                     J(1, ob + n) = w * std::cos(arg);
                     J(1, opy + n) = -f.by[n] * w * std::sin(arg);
                   }
                   return J;
                 }},
      c);
}

Eigen::RowVectorXd phase_rate_partials(const Curve& c, double rho) {
  const Vec2 d = phase_tangent(c, rho);
  const double n = d.norm();
  if (!(n >= kDegenerateSpeed)) throw DegenerateTrajectory("trajectory is stationary in phase");
  return -(d.transpose() * tangent_partials(c, rho)) / (n * n * n);
}

double phase_rate_slope(const Curve& c, double rho) {
  const Vec2 d = phase_tangent(c, rho);
  const double n = d.norm();
  if (!(n >= kDegenerateSpeed)) throw DegenerateTrajectory("trajectory is stationary in phase");
  return -d.dot(phase_curvature(c, rho)) / (n * n * n);
}

BasePenalty ellipse_base_penalty(const EllipseParams& e, const Vec2& base) {
  const double dx = base.x() - e.A, dy = base.y() - e.B;
  const double a = e.a, b = e.b;
  const double a2 = a * a, b2 = b * b, a3 = a2 * a, b3 = b2 * b;
  const double c = std::cos(e.phi), s = std::sin(e.phi);
  const double c2 = c * c, s2 = s * s, sin2 = std::sin(2 * e.phi), cos2 = std::cos(2 * e.phi);

  const double f1 = dx * dx / a2 + dy * dy / b2;
  const double f2 = dx * dx / b2 + dy * dy / a2;
  const double f3 = (b2 - a2) * dx * dy / (a2 * b2);
  const double residual = 1.0 - f1 * c2 - f2 * s2 - f3 * sin2;

  // d f / d(A, B, a, b)
  const double f1A = -2 * dx / a2, f1B = -2 * dy / b2, f1a = -2 * dx * dx / a3, f1b = -2 * dy * dy / b3;
  const double f2A = -2 * dx / b2, f2B = -2 * dy / a2, f2a = -2 * dy * dy / a3, f2b = -2 * dx * dx / b3;
  const double f3A = -(b2 - a2) * dy / (a2 * b2), f3B = -(b2 - a2) * dx / (a2 * b2);
  const double f3a = -2 * dx * dy / a3, f3b = 2 * dx * dy / b3;

  auto inner = [&](double d1, double d2, double d3) { return -c2 * d1 - s2 * d2 - sin2 * d3; };

  BasePenalty p;
  p.value = residual * residual;
  p.gradient << 2 * residual * inner(f1A, f2A, f3A), 2 * residual * inner(f1B, f2B, f3B),
      2 * residual * inner(f1a, f2a, f3a), 2 * residual * inner(f1b, f2b, f3b),
      2 * residual * ((f1 - f2) * sin2 - 2 * f3 * cos2);
  return p;
}

double revolution_time(const Curve& c) { return arc_length(c, 0.0, kTwoPi); }

ActiveSegment active_segment(const SegmentedTrajectory& traj, double t) {
  if (traj.segments.empty()) throw std::invalid_argument("trajectory has no segments");
  double start = 0.0;
  for (std::size_t k = 0; k < traj.segments.size(); ++k) {
    const Curve& c = traj.segments[k];
    const double dur = revolution_time(c);
    const bool last = k + 1 == traj.segments.size();
    if (t < start + dur || last) {
      double local = t - start;
      if (last && local >= dur) local = std::fmod(local, dur);
      return {k, phase_at_length(c, local, dur)};
    }
    start += dur;
  }
  return {};
}

std::size_t TrajectorySet::size() const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < agents.size(); ++j) n += agent_size(j);
  return n;
}

std::size_t TrajectorySet::agent_offset(std::size_t agent) const {
  std::size_t n = 0;
  for (std::size_t j = 0; j < agent; ++j) n += agent_size(j);
  return n;
}

std::size_t TrajectorySet::agent_size(std::size_t agent) const {
  std::size_t n = 0;
  for (const auto& c : agents.at(agent).segments) n += parameter_count(c);
  return n;
}

std::size_t TrajectorySet::segment_offset(std::size_t agent, std::size_t segment) const {
  std::size_t n = agent_offset(agent);
  for (std::size_t k = 0; k < segment; ++k) n += parameter_count(agents[agent].segments[k]);
  return n;
}

Vector TrajectorySet::flatten() const {
  Vector theta(static_cast<Eigen::Index>(size()));
  Eigen::Index k = 0;
  for (const auto& a : agents)
    for (const auto& c : a.segments) {
      const Vector v = to_vector(c);
      theta.segment(k, v.size()) = v;
      k += v.size();
    }
  return theta;
}

TrajectorySet TrajectorySet::with_values(const Vector& theta) const {
  if (static_cast<std::size_t>(theta.size()) != size())
    throw std::invalid_argument("parameter vector length does not match the trajectory set");
  TrajectorySet out = *this;
  Eigen::Index k = 0;
  for (auto& a : out.agents)
    for (auto& c : a.segments) {
      const auto n = static_cast<Eigen::Index>(parameter_count(c));
      c = harvest::with_values(c, theta.segment(k, n));
      k += n;
    }
  return out;
}

std::vector<std::string> TrajectorySet::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t j = 0; j < agents.size(); ++j)
    for (std::size_t k = 0; k < agents[j].segments.size(); ++k) {
      const std::string prefix = "agent" + std::to_string(j + 1) + ".seg" + std::to_string(k + 1) + ".";
      std::visit(overloaded{[&](const EllipseParams&) {
                              for (const char* n : {"A", "B", "a", "b", "phi"}) names.push_back(prefix + n);
                            },
                            [&](const FourierParams& f) {
                              names.push_back(prefix + "fx");
                              for (std::size_t n = 0; n < f.ax.size(); ++n)
                                names.push_back(prefix + "a" + std::to_string(n + 1));
                              for (std::size_t n = 0; n < f.by.size(); ++n)
                                names.push_back(prefix + "b" + std::to_string(n + 1));
                              for (std::size_t n = 0; n < f.phix.size(); ++n)
                                names.push_back(prefix + "phix" + std::to_string(n + 1));
                              for (std::size_t n = 0; n < f.phiy.size(); ++n)
                                names.push_back(prefix + "phiy" + std::to_string(n + 1));
                            }},
                 agents[j].segments[k]);
    }
  return names;
}

void normalize_angles(TrajectorySet& set) {
  for (auto& a : set.agents)
    for (auto& c : a.segments)
      if (auto* e = std::get_if<EllipseParams>(&c)) {
        e->phi = std::fmod(e->phi, kTwoPi);
        if (e->phi < 0) e->phi += kTwoPi;
      }
}

}  // namespace harvest
