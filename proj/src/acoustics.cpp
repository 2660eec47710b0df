#include "kianc/acoustics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kianc {

Wavenumber Wavenumber::from_frequency(double hz, double sound_speed) {
  if (!(hz > 0.0) || !std::isfinite(hz))
    throw std::invalid_argument("wavenumber: frequency must be positive");
  if (!(sound_speed > 0.0) || !std::isfinite(sound_speed))
    throw std::invalid_argument("wavenumber: sound speed must be positive");
  Wavenumber w;
  w.omega = 2.0 * kPi * hz;
  w.c = sound_speed;
  w.k = w.omega / sound_speed;
  return w;
}

Complex green(const Vec3& src, const Vec3& rcv, const Wavenumber& k) {
  const double d = (rcv - src).norm();
  if (!(d > 0.0)) throw std::invalid_argument("green: source and receiver coincide");
  return std::polar(1.0 / (4.0 * kPi * d), -k.k * d);
}

CMat transfer_matrix(PointSpan sources, PointSpan receivers,
                     const Wavenumber& k) {
  CMat g(receivers.size(), sources.size());
  for (std::size_t l = 0; l < sources.size(); ++l) {
    for (std::size_t m = 0; m < receivers.size(); ++m) {
      if (sources[l] == receivers[m])
        throw std::invalid_argument("transfer_matrix: source " + std::to_string(l) +
                                    " coincides with receiver " + std::to_string(m));
      g(m, l) = green(sources[l], receivers[m], k);
    }
  }
  return g;
}

CVec primary_field(const Vec3& primary_src, PointSpan points,
                   const Wavenumber& k, Complex amplitude) {
  CVec u(points.size());
  for (std::size_t j = 0; j < points.size(); ++j)
    u(j) = amplitude * green(primary_src, points[j], k);
  return u;
}

CVec total_field(const CVec& primary, const CMat& transfer, const CVec& y) {
  if (transfer.rows() != primary.size() || transfer.cols() != y.size())
    throw std::invalid_argument("total_field: dimension mismatch");
  return primary + transfer * y;
}

CVec total_field(const CVec& primary, PointSpan sources, const CVec& y,
                 PointSpan points, const Wavenumber& k) {
  if (static_cast<std::size_t>(y.size()) != sources.size())
    throw std::invalid_argument("total_field: y must have one entry per source");
  return total_field(primary, transfer_matrix(sources, points, k), y);
}

}  // namespace kianc
