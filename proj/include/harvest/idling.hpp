#pragma once

#include <vector>

#include "harvest/geometry.hpp"
#include "harvest/system.hpp"

namespace harvest {

/// I_j = log(1 + D+_Bj * prod_i D+_ij) with D+ = max(0, D - r).
/// Zero exactly when agent j is within range of some target or of the base.
double idling(const Vec2& s, std::size_t agent, const SystemParams& sys);
Vector idling(const std::vector<Vec2>& positions, const SystemParams& sys);

/// dI_j/ds_j (a row 2-vector). Uses subgradient 0 for factors sitting at D = r.
Eigen::RowVector2d idling_gradient(const Vec2& s, std::size_t agent, const SystemParams& sys);
/// One-sided dI_j/ds_j at s: a factor counts as outside its range when `side`
/// is. Used at event instants where s sits on a range boundary and `side` is a
/// nearby point of the trajectory.
Eigen::RowVector2d idling_gradient(const Vec2& s, const Vec2& side, std::size_t agent, const SystemParams& sys);

}  // namespace harvest
