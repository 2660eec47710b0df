#include "kianc/kernel.hpp"

#include <cmath>
#include <stdexcept>

namespace kianc {
namespace {

constexpr double kSeriesRadius = 1e-4;

void check_unit(const Vec3& v, const char* what) {
  if (!v.allFinite() || std::abs(v.norm() - 1.0) > 1e-12)
    throw std::invalid_argument(std::string(what) + ": direction must be a unit vector");
}

// Rows: z_{y,l}(r_s)^T G_l for every loudspeaker l, i.e. zeta_y(r_s)^T.
CMat secondary_filters(PointSpan points, PointSpan mics, const Wavenumber& k,
                       PointSpan secondary_dirs, double beta_secondary,
                       double lambda, const CMat& g_hat) {
  CMat zeta(points.size(), secondary_dirs.size());
  for (std::size_t l = 0; l < secondary_dirs.size(); ++l) {
    const Interpolator interp(mics, k, KernelParams{beta_secondary, secondary_dirs[l], lambda});
    zeta.col(l) = interp.filters(points) * g_hat.col(l);
  }
  return zeta;
}

void check_individual_dims(PointSpan mics, PointSpan secondary_dirs,
                           const CMat& g_hat) {
  if (g_hat.rows() != static_cast<Eigen::Index>(mics.size()) ||
      g_hat.cols() != static_cast<Eigen::Index>(secondary_dirs.size()))
    throw std::invalid_argument(
        "individual interpolation: G_hat must be M x L with L secondary directions");
}

}  // namespace

void KernelParams::validate() const {
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::invalid_argument("kernel: beta must be >= 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("kernel: lambda must be > 0");
  check_unit(eta, "kernel");
}

Complex sph_j0(Complex z) {
  if (std::abs(z) < kSeriesRadius) {
    const Complex z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

Complex kappa(const Vec3& r1, const Vec3& r2, double k, double beta,
              const Vec3& eta) {
  // v = j beta eta - k (r1 - r2); the argument is sqrt(v^T v) without
  // conjugation. j0 is even, so the square-root branch does not matter.
  const Vec3 kr = k * (r1 - r2);
  const double re = kr.squaredNorm() - beta * beta;
  const double im = -2.0 * beta * eta.dot(kr);
  return sph_j0(std::sqrt(Complex(re, im)));
}

CMat gram(PointSpan mics, const Wavenumber& k, const KernelParams& params) {
  params.validate();
  const std::size_t m = mics.size();
  CMat g(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    g(i, i) = kappa(mics[i], mics[i], k.k, params.beta, params.eta);
    for (std::size_t j = 0; j < i; ++j) {
      g(i, j) = kappa(mics[i], mics[j], k.k, params.beta, params.eta);
      g(j, i) = std::conj(g(i, j));
    }
  }
  return g;
}

Interpolator::Interpolator(PointSpan mics, const Wavenumber& k,
                           const KernelParams& params)
    : mics_(mics.begin(), mics.end()), k_(k.k), params_(params),
      gram_(kianc::gram(mics, k, params)) {
  if (mics_.empty()) throw std::invalid_argument("interpolator: no microphones");
  const auto m = static_cast<Eigen::Index>(mics_.size());
  factor_.compute(gram_ + params_.lambda * CMat::Identity(m, m));
  if (factor_.info() != Eigen::Success)
    throw std::runtime_error("interpolator: K + lambda I is not positive definite");
}

CVec Interpolator::kernel_vector(const Vec3& r) const {
  CVec v(mics_.size());
  for (std::size_t m = 0; m < mics_.size(); ++m)
    v(m) = kappa(r, mics_[m], k_, params_.beta, params_.eta);
  return v;
}

CVec Interpolator::filter(const Vec3& r) const {
  // (K + lambda I) is Hermitian, so P^T = conj(P) and z = conj(P conj(kappa)).
  return factor_.solve(kernel_vector(r).conjugate()).conjugate();
}

CMat Interpolator::filters(PointSpan points) const {
  CMat rhs(mics_.size(), points.size());
  for (std::size_t s = 0; s < points.size(); ++s)
    rhs.col(s) = kernel_vector(points[s]).conjugate();
  // Each column is conj(z(r_s)); the adjoint gives rows z(r_s)^T.
  return factor_.solve(rhs).adjoint();
}

CMat interp_matrix_total(PointSpan mics, const Wavenumber& k,
                         const KernelParams& params, const SampleSet& samples) {
  const Interpolator interp(mics, k, params);
  const CMat z = interp.filters(samples.points);
  return samples.weight * (z.adjoint() * z);
}

InterpMatrices interp_matrices_individual(PointSpan mics, const Wavenumber& k,
                                          const KernelParams& primary,
                                          PointSpan secondary_dirs,
                                          double beta_secondary,
                                          const CMat& g_hat,
                                          const SampleSet& samples) {
  check_individual_dims(mics, secondary_dirs, g_hat);
  const Interpolator interp(mics, k, primary);
  const CMat zd = interp.filters(samples.points);
  const CMat zeta = secondary_filters(samples.points, mics, k, secondary_dirs,
                                      beta_secondary, primary.lambda, g_hat);
  InterpMatrices out;
  out.dd = samples.weight * (zd.adjoint() * zd);
  out.yd = samples.weight * (zeta.adjoint() * zd);
  out.yy = samples.weight * (zeta.adjoint() * zeta);
  out.num_samples = samples.size();
  return out;
}

FieldEstimator::FieldEstimator(PointSpan points, PointSpan mics,
                               const Wavenumber& k, const KernelParams& primary,
                               PointSpan secondary_dirs, double beta_secondary,
                               const CMat& g_hat) {
  check_individual_dims(mics, secondary_dirs, g_hat);
  zd_ = Interpolator(mics, k, primary).filters(points);
  zeta_ = kianc::secondary_filters(points, mics, k, secondary_dirs, beta_secondary,
                            primary.lambda, g_hat);
}

FieldEstimate FieldEstimator::estimate(const CVec& d_hat, const CVec& y) const {
  if (d_hat.size() != zd_.cols() || y.size() != zeta_.cols())
    throw std::invalid_argument("estimate_fields: dimension mismatch");
  FieldEstimate f;
  f.primary = zd_ * d_hat;
  f.secondary = zeta_ * y;
  f.total = f.primary + f.secondary;
  return f;
}

}  // namespace kianc
