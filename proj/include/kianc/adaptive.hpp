#pragma once

#include <string>
#include <utility>

#include "kianc/types.hpp"

namespace kianc {

struct NlmsParams {
  double mu0 = 0.5;
  double epsilon = 1e-3;

  void validate() const;
};

enum class AlgorithmKind { kMpc, kTotalKi, kIndividualKi };

std::string to_string(AlgorithmKind kind);

struct SpectralNorm {
  double value = 0.0;
  bool converged = false;
  int iterations = 0;
};

/// Largest singular value by power iteration on M^H M from a fixed
/// unit-modulus start vector.
SpectralNorm spectral_norm(const CMat& m, double rel_tol = 1e-8,
                           int max_iterations = 10000);

/// y = W x.
CVec drive(const CMat& w, const CVec& x);

/// W <- W - mu0 / (norm_gag ||x||^2 + eps) * G^H A e x^H, with
/// norm_gag = ||G^H A G||_2 precomputed by the caller.
void update_total_ki(CMat& w, const CVec& x, const CVec& e, const CMat& g_hat,
                     const CMat& a, double norm_gag, const NlmsParams& params);

/// W <- W - mu0 / (norm_yy ||x||^2 + eps) * [A_yd e + (A_yy - A_yd G) W x] x^H,
/// with norm_yy = ||A_yy||_2 precomputed by the caller.
void update_individual_ki(CMat& w, const CVec& x, const CVec& e,
                          const CMat& g_hat, const CMat& a_yd, const CMat& a_yy,
                          double norm_yy, const NlmsParams& params);

/// Real part of e^H A e.
double cost_total(const CVec& e, const CMat& a);

/// d^H A_dd d + y^H A_yd d + d^H A_yd^H y + y^H A_yy y (real part).
double cost_individual(const CVec& d_hat, const CVec& y, const CMat& a_dd,
                       const CMat& a_yd, const CMat& a_yy);

/// Splits e into (d_hat, s) with s = G y and d_hat = e - s.
std::pair<CVec, CVec> decompose_error(const CVec& e, const CMat& g_hat,
                                      const CVec& y);

/// Frequency-domain NLMS controller for one algorithm. Everything that does
/// not change between iterations (G^H A, A_yy - A_yd G, the spectral-norm
/// normalizer) is computed once here.
class NlmsController {
 public:
  static NlmsController mpc(const CMat& g_hat, const NlmsParams& params);
  static NlmsController total_ki(const CMat& g_hat, const CMat& a,
                                 const NlmsParams& params);
  static NlmsController individual_ki(const CMat& g_hat, const CMat& a_dd,
                                      const CMat& a_yd, const CMat& a_yy,
                                      const NlmsParams& params);

  AlgorithmKind kind() const { return kind_; }
  std::size_t num_sources() const { return static_cast<std::size_t>(g_hat_.cols()); }
  std::size_t num_mics() const { return static_cast<std::size_t>(g_hat_.rows()); }
  double norm() const { return norm_; }
  bool norm_converged() const { return norm_converged_; }

  /// Wirtinger gradient direction dJ/dW* for the controller's cost.
  CMat gradient(const CMat& w, const CVec& x, const CVec& e) const;
  /// mu0 / (norm ||x||^2 + eps).
  double step_size(const CVec& x) const;
  void update(CMat& w, const CVec& x, const CVec& e) const;
  /// The cost this controller descends, given the observed e and the drive
  /// y that produced it: ||e||^2, e^H A e or the individual form.
  double cost(const CVec& e, const CVec& y) const;

 private:
  NlmsController(AlgorithmKind kind, CMat g_hat, NlmsParams params);

  AlgorithmKind kind_;
  CMat g_hat_;
  NlmsParams params_;
  CMat error_gain_;     // G^H A (total), A_yd (individual)
  CMat feedback_gain_;  // A_yy - A_yd G (individual only)
  CMat a_;              // A (total) or A_dd (individual)
  CMat a_yd_;
  CMat a_yy_;
  double norm_ = 0.0;
  bool norm_converged_ = true;
};

}  // namespace kianc
