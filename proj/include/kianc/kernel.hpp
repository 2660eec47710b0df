#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Cholesky>

#include "kianc/acoustics.hpp"
#include "kianc/geometry.hpp"

namespace kianc {

struct KernelParams {
  double beta = 0.0;           // directional sharpness
  Vec3 eta = Vec3::UnitX();    // prior arrival direction (unit)
  double lambda = 1e-3;        // ridge regularization

  void validate() const;
};

/// Spherical Bessel j0(z) = sin(z)/z on the complex plane.
Complex sph_j0(Complex z);

/// Directional kernel: the closed form of
///   (1/4pi) * integral over the sphere of exp(beta xi^T eta) exp(jk xi^T (r1 - r2)),
/// i.e. j0(sqrt((j beta eta - k (r1 - r2))^T (j beta eta - k (r1 - r2)))).
/// Satisfies kappa(r1, r2) = conj(kappa(r2, r1)).
Complex kappa(const Vec3& r1, const Vec3& r2, double k, double beta,
              const Vec3& eta);

/// K[m, m'] = kappa(r_m, r_m').
CMat gram(PointSpan mics, const Wavenumber& k, const KernelParams& params);

/// Kernel ridge interpolator for one microphone array and one kernel. The
/// regularized Gram matrix is factored once on construction.
class Interpolator {
 public:
  Interpolator(PointSpan mics, const Wavenumber& k, const KernelParams& params);

  std::size_t num_mics() const { return mics_.size(); }
  const CMat& gram() const { return gram_; }
  const KernelParams& params() const { return params_; }

  /// kappa(r) with entries kappa(r, r_m).
  CVec kernel_vector(const Vec3& r) const;
  /// z(r) = ((K + lambda I)^-1)^T kappa(r), so that u_hat(r) = z(r)^T e.
  CVec filter(const Vec3& r) const;
  /// One row z(r_s)^T per point.
  CMat filters(PointSpan points) const;

 private:
  PointList mics_;
  double k_;
  KernelParams params_;
  CMat gram_;
  Eigen::LLT<CMat> factor_;
};

/// A = w * sum_s conj(z(r_s)) z(r_s)^T, Hermitian PSD.
CMat interp_matrix_total(PointSpan mics, const Wavenumber& k,
                         const KernelParams& params, const SampleSet& samples);

/// Region-integral matrices of the individual interpolation.
struct InterpMatrices {
  CMat dd;  // M x M
  CMat yd;  // L x M
  CMat yy;  // L x L
  std::size_t num_samples = 0;
};

/// Builds A_dd, A_yd, A_yy on one sample set. The primary field uses
/// `primary`; loudspeaker l uses direction secondary_dirs[l] with
/// beta_secondary and the same lambda.
InterpMatrices interp_matrices_individual(PointSpan mics, const Wavenumber& k,
                                          const KernelParams& primary,
                                          PointSpan secondary_dirs,
                                          double beta_secondary,
                                          const CMat& g_hat,
                                          const SampleSet& samples);

struct FieldEstimate {
  CVec primary;
  CVec secondary;
  CVec total;
};

/// Cached interpolation filters on a fixed point set for the individual
/// estimate u_hat = z_d^T d_hat + zeta_y^T y.
class FieldEstimator {
 public:
  FieldEstimator(PointSpan points, PointSpan mics, const Wavenumber& k,
                 const KernelParams& primary, PointSpan secondary_dirs,
                 double beta_secondary, const CMat& g_hat);

  FieldEstimate estimate(const CVec& d_hat, const CVec& y) const;

  const CMat& primary_filters() const { return zd_; }
  const CMat& secondary_filters() const { return zeta_; }

 private:
  CMat zd_;    // points x M
  CMat zeta_;  // points x L
};

}  // namespace kianc
