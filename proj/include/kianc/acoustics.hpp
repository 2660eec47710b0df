#pragma once

#include "kianc/types.hpp"

namespace kianc {

struct Wavenumber {
  double k = 0.0;      // rad/m
  double omega = 0.0;  // rad/s
  double c = 0.0;      // m/s

  static Wavenumber from_frequency(double hz, double sound_speed);
};

// Free-field forward model. Time dependence is exp(+j*omega*t), so a point
// source radiates exp(-jkd)/(4*pi*d) and a wave arriving from direction xi
// reads exp(+jk xi^T r). This matches the plane-wave expansion used by the
// directional kernel.

/// Point-source Green's function. Throws if src and rcv coincide.
Complex green(const Vec3& src, const Vec3& rcv, const Wavenumber& k);

/// Entry (m, l) is green(sources[l], receivers[m]).
CMat transfer_matrix(PointSpan sources, PointSpan receivers,
                     const Wavenumber& k);

/// amplitude * green(primary_src, r_j) for every point.
CVec primary_field(const Vec3& primary_src, PointSpan points,
                   const Wavenumber& k, Complex amplitude = 1.0);

/// u_p + sum_l green(source_l, r_j) * y_l.
CVec total_field(const CVec& primary, PointSpan sources, const CVec& y,
                 PointSpan points, const Wavenumber& k);

/// Same as total_field with a precomputed points x sources transfer matrix.
CVec total_field(const CVec& primary, const CMat& transfer, const CVec& y);

}  // namespace kianc
