#include "harvest/idling.hpp"

#include <algorithm>
#include <cmath>

namespace harvest {

namespace {

struct Factor {
  double excess;        // D+ = max(0, D - r)
  Eigen::RowVector2d d; // dD+/ds
};

Factor excess(const Vec2& w, const Vec2& s, double r, const Vec2& side) {
  const Vec2 diff = s - w;
  const double d = diff.norm();
  if ((side - w).norm() <= r || d == 0.0) return {0.0, Eigen::RowVector2d::Zero()};
  return {std::max(d - r, 0.0), (diff / d).transpose()};
}

std::vector<Factor> factors(const Vec2& s, const Vec2& side, std::size_t j, const SystemParams& sys) {
  std::vector<Factor> out;
  out.reserve(sys.target_count() + 1);
  out.push_back(excess(sys.base, s, sys.base_range[j], side));
  for (std::size_t i = 0; i < sys.target_count(); ++i)
    out.push_back(excess(sys.targets[i], s, sys.range(i, j), side));
  return out;
}

std::vector<Factor> factors(const Vec2& s, std::size_t j, const SystemParams& sys) { return factors(s, s, j, sys); }

}  // namespace

double idling(const Vec2& s, std::size_t agent, const SystemParams& sys) {
  double prod = 1.0;
  for (const auto& f : factors(s, agent, sys)) prod *= f.excess;
  return std::log1p(prod);
}

Vector idling(const std::vector<Vec2>& positions, const SystemParams& sys) {
  Vector out(static_cast<Eigen::Index>(positions.size()));
  for (std::size_t j = 0; j < positions.size(); ++j) out[j] = idling(positions[j], j, sys);
  return out;
}

Eigen::RowVector2d idling_gradient(const Vec2& s, std::size_t agent, const SystemParams& sys) {
  return idling_gradient(s, s, agent, sys);
}

Eigen::RowVector2d idling_gradient(const Vec2& s, const Vec2& side, std::size_t agent, const SystemParams& sys) {
  const auto fs = factors(s, side, agent, sys);
  double prod = 1.0;
  for (const auto& f : fs) prod *= f.excess;
  Eigen::RowVector2d dq = Eigen::RowVector2d::Zero();
  for (std::size_t k = 0; k < fs.size(); ++k) {
    if (fs[k].d.isZero()) continue;
    double others = 1.0;
    for (std::size_t m = 0; m < fs.size(); ++m)
      if (m != k) others *= fs[m].excess;
    dq += others * fs[k].d;
  }
  return dq / (1.0 + prod);
}

}  // namespace harvest
