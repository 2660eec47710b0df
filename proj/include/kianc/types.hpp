#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace kianc {

using Complex = std::complex<double>;
using Vec3 = Eigen::Vector3d;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

using PointList = std::vector<Vec3>;
using PointSpan = std::span<const Vec3>;

inline constexpr double kPi = 3.14159265358979323846;

}  // namespace kianc
