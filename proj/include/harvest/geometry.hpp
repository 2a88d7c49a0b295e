#pragma once

#include <Eigen/Core>

namespace harvest {

using Vec2 = Eigen::Vector2d;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
/// 2 x k block of partial derivatives of a planar point.
using Jacobian2 = Eigen::Matrix<double, 2, Eigen::Dynamic>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;
inline constexpr double kPi = 3.141592653589793238462643383280;

}  // namespace harvest
