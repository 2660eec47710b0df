#include "kianc/geometry.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "kianc/rng.hpp"

namespace kianc {
namespace {

bool finite(const Vec3& p) { return p.allFinite(); }

double deg2rad(double deg) { return deg * kPi / 180.0; }

}  // namespace

double Cuboid::volume() const { return 8.0 * half_extents.prod(); }

bool Cuboid::contains(const Vec3& p, double margin) const {
  const Vec3 offset = (p - center).cwiseAbs();
  return (offset.array() <= half_extents.array() + margin).all();
}

void Cuboid::validate() const {
  if (!finite(center) || !finite(half_extents))
    throw std::invalid_argument("cuboid: non-finite center or extents");
  if ((half_extents.array() <= 0.0).any())
    throw std::invalid_argument("cuboid: half extents must be positive");
}

void Scenario::validate() const {
  region.validate();
  if (secondary_sources.empty())
    throw std::invalid_argument("scenario: no secondary sources");
  if (error_mics.empty())
    throw std::invalid_argument("scenario: no error microphones");
  if (num_reference < 1)
    throw std::invalid_argument("scenario: need at least one reference signal");
  if (!(sound_speed > 0.0) || !std::isfinite(sound_speed))
    throw std::invalid_argument("scenario: sound speed must be positive");
  if (!finite(primary_source))
    throw std::invalid_argument("scenario: non-finite primary source");
  if (mic_stagger < 0.0)
    throw std::invalid_argument("scenario: negative microphone stagger");
  for (std::size_t m = 0; m < error_mics.size(); ++m) {
    if (!finite(error_mics[m]) ||
        !region.contains(error_mics[m], mic_stagger + 1e-12))
      throw std::invalid_argument("scenario: error mic " + std::to_string(m) +
                                  " outside the target region");
    for (std::size_t n = 0; n < m; ++n) {
      if (error_mics[m] == error_mics[n])
        throw std::invalid_argument("scenario: error mics " + std::to_string(n) +
                                    " and " + std::to_string(m) + " coincide");
    }
  }
  for (std::size_t l = 0; l < secondary_sources.size(); ++l) {
    if (!finite(secondary_sources[l]) ||
        region.contains(secondary_sources[l]))
      throw std::invalid_argument("scenario: secondary source " +
                                  std::to_string(l) +
                                  " must lie strictly outside the region");
  }
  if (region.contains(primary_source))
    throw std::invalid_argument("scenario: primary source inside the region");
}

PointList square_perimeter(double half, std::size_t count, double z,
                           double stagger) {
  if (count == 0) throw std::invalid_argument("square_perimeter: count is 0");
  const std::array<Eigen::Vector2d, 4> corners = {
      Eigen::Vector2d(-half, -half), Eigen::Vector2d(half, -half),
      Eigen::Vector2d(half, half), Eigen::Vector2d(-half, half)};
  const std::array<Eigen::Vector2d, 4> normals = {
      Eigen::Vector2d(0, -1), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
      Eigen::Vector2d(-1, 0)};

  PointList points;
  points.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Position along the perimeter in edge units, 4 * i / count, kept in
    // integers so corners are hit exactly.
    const std::size_t scaled = 4 * i;
    const std::size_t edge = scaled / count;
    const double frac = static_cast<double>(scaled - edge * count) /
                        static_cast<double>(count);
    const Eigen::Vector2d& a = corners[edge];
    const Eigen::Vector2d& b = corners[(edge + 1) % 4];
    Eigen::Vector2d p = a + (b - a) * frac;
    if (i % 2 == 1) p += stagger * normals[edge];
    points.emplace_back(p.x(), p.y(), z);
  }
  return points;
}

Scenario build_default_scenario() {
  Scenario s;
  s.region.center = Vec3::Zero();
  s.region.half_extents = Vec3(0.3, 0.3, 0.05);
  s.mic_stagger = 0.03;
  for (double z : {0.1, -0.1}) {
    for (const Vec3& p : square_perimeter(1.0, 8, z)) s.secondary_sources.push_back(p);
  }
  for (double z : {0.05, -0.05}) {
    for (const Vec3& p : square_perimeter(0.3, 24, z, s.mic_stagger))
      s.error_mics.push_back(p);
  }
  s.primary_source = Vec3(-2.8, 0.3, 0.0);
  s.num_reference = 1;
  s.sound_speed = 343.0;
  return s;
}

SampleSet eval_grid(const Cuboid& region, GridCounts counts) {
  region.validate();
  if (counts.nx == 0 || counts.ny == 0 || counts.nz == 0)
    throw std::invalid_argument("eval_grid: zero grid count");
  const Vec3 lo = region.min_corner();
  const Vec3 hi = region.max_corner();
  auto axis = [](double a, double b, double c, std::size_t n, std::size_t i) {
    if (n == 1) return c;
    return std::lerp(a, b, static_cast<double>(i) / static_cast<double>(n - 1));
  };

  SampleSet grid;
  grid.weight = 1.0;
  grid.points.reserve(counts.nx * counts.ny * counts.nz);
  for (std::size_t i = 0; i < counts.nx; ++i) {
    for (std::size_t j = 0; j < counts.ny; ++j) {
      for (std::size_t l = 0; l < counts.nz; ++l) {
        grid.points.emplace_back(axis(lo.x(), hi.x(), region.center.x(), counts.nx, i),
                                 axis(lo.y(), hi.y(), region.center.y(), counts.ny, j),
                                 axis(lo.z(), hi.z(), region.center.z(), counts.nz, l));
      }
    }
  }
  return grid;
}

SampleSet monte_carlo_samples(const Cuboid& region, std::size_t n,
                              std::uint64_t seed) {
  region.validate();
  if (n == 0) throw std::invalid_argument("monte_carlo_samples: n must be >= 1");
  Rng rng(seed);
  const Vec3 lo = region.min_corner();
  const Vec3 hi = region.max_corner();
  std::uniform_real_distribution<double> ux(lo.x(), hi.x());
  std::uniform_real_distribution<double> uy(lo.y(), hi.y());
  std::uniform_real_distribution<double> uz(lo.z(), hi.z());

  SampleSet set;
  set.weight = region.volume() / static_cast<double>(n);
  set.points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = ux(rng);
    const double y = uy(rng);
    const double z = uz(rng);
    set.points.emplace_back(x, y, z);
  }
  return set;
}

Vec3 perturb_primary_source(const Vec3& nominal, const PerturbationStd& std_dev,
                            std::uint64_t seed) {
  const double radius = nominal.norm();
  if (!(radius > 0.0))
    throw std::invalid_argument("perturb_primary_source: nominal at the origin");
  if (std_dev.radial_m < 0.0 || std_dev.azimuth_deg < 0.0 ||
      std_dev.zenith_deg < 0.0)
    throw std::invalid_argument("perturb_primary_source: negative std");
  if (std_dev.radial_m == 0.0 && std_dev.azimuth_deg == 0.0 &&
      std_dev.zenith_deg == 0.0)
    return nominal;

  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double dr = normal(rng) * std_dev.radial_m;
  const double daz = normal(rng) * deg2rad(std_dev.azimuth_deg);
  const double dzen = normal(rng) * deg2rad(std_dev.zenith_deg);

  const double r = radius + dr;
  const double zenith = std::acos(std::clamp(nominal.z() / radius, -1.0, 1.0)) + dzen;
  const double azimuth = std::atan2(nominal.y(), nominal.x()) + daz;
  return Vec3(r * std::sin(zenith) * std::cos(azimuth),
              r * std::sin(zenith) * std::sin(azimuth), r * std::cos(zenith));
}

Vec3 direction_to(const Vec3& point, const Vec3& origin) {
  const Vec3 d = point - origin;
  const double n = d.norm();
  if (!(n > 0.0)) throw std::invalid_argument("direction_to: point equals origin");
  return d / n;
}

}  // namespace kianc
