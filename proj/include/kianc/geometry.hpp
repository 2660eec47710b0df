#pragma once

#include <cstddef>
#include <cstdint>

#include "kianc/types.hpp"

namespace kianc {

/// Axis-aligned box. Half extents must be strictly positive.
struct Cuboid {
  Vec3 center = Vec3::Zero();
  Vec3 half_extents = Vec3::Ones();

  double volume() const;
  Vec3 min_corner() const { return center - half_extents; }
  Vec3 max_corner() const { return center + half_extents; }
  /// Containment with an optional outward margin (meters).
  bool contains(const Vec3& p, double margin = 0.0) const;
  void validate() const;
};

/// Full experiment geometry.
struct Scenario {
  PointList secondary_sources;
  PointList error_mics;
  Vec3 primary_source = Vec3::Zero();
  Cuboid region;
  int num_reference = 1;
  double sound_speed = 343.0;
  /// Outward offset applied to staggered microphones; error mics may sit
  /// this far outside the region.
  double mic_stagger = 0.0;

  std::size_t num_sources() const { return secondary_sources.size(); }
  std::size_t num_mics() const { return error_mics.size(); }

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

/// A set of points in a region with a uniform quadrature weight.
struct SampleSet {
  PointList points;
  double weight = 1.0;

  std::size_t size() const { return points.size(); }
};

struct GridCounts {
  std::size_t nx = 17;
  std::size_t ny = 17;
  std::size_t nz = 5;
};

struct PerturbationStd {
  double radial_m = 0.0;
  double azimuth_deg = 0.0;
  double zenith_deg = 0.0;
};

/// Default setup: 16 loudspeakers on two 2 m squares at z = +-0.1 m,
/// 48 microphones on the top/bottom face borders of a 0.6 x 0.6 x 0.1 m
/// cuboid (every second one pushed outward by 3 cm), primary source at
/// (-2.8, 0.3, 0).
Scenario build_default_scenario();

/// `count` points equally spaced by arc length along the border of an
/// axis-aligned square of half-width `half` at height `z`, starting at the
/// (-half, -half) corner and running counter-clockwise. Every odd-indexed
/// point is moved `stagger` meters outward, normal to its edge.
PointList square_perimeter(double half, std::size_t count, double z,
                           double stagger = 0.0);

/// Regular grid spanning the cuboid faces inclusive. A count of 1 on an
/// axis places that coordinate at the center.
SampleSet eval_grid(const Cuboid& region, GridCounts counts = {});

/// i.i.d. uniform points in the cuboid, weight = volume / n.
SampleSet monte_carlo_samples(const Cuboid& region, std::size_t n,
                              std::uint64_t seed);

/// Gaussian jitter of the spherical coordinates (about the origin) of a
/// nominal position. Zenith is measured from +z, azimuth from +x.
Vec3 perturb_primary_source(const Vec3& nominal, const PerturbationStd& std_dev,
                            std::uint64_t seed);

/// Unit vector pointing from `origin` toward `point`.
Vec3 direction_to(const Vec3& point, const Vec3& origin);

}  // namespace kianc
