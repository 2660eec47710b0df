#pragma once

// Independent reference computations used only by tests. None of these share
// code paths with the library routines they check.

#include <cstdint>
#include <functional>

#include "kianc/types.hpp"

namespace kianc::oracle {

/// Monte Carlo estimate of (1/4pi) * integral over the unit sphere of
/// exp(beta xi^T eta) * exp(j k xi^T (r1 - r2)), uniform directions.
Complex kappa_sphere(const Vec3& r1, const Vec3& r2, double k, double beta,
                     const Vec3& eta, std::size_t n_samples, std::uint64_t seed);

/// Largest singular value from a dense SVD.
double svd_norm(const CMat& m);

/// Wirtinger derivative dJ/dW* = (dJ/dRe W + j dJ/dIm W) / 2 by central
/// differences, perturbing real and imaginary parts separately.
CMat wirtinger_fd(const std::function<double(const CMat&)>& cost, const CMat& w,
                  double h = 1e-6);

/// sum_i sum_j conj(e_i) A_ij e_j, summed term by term.
Complex quadratic_double_sum(const CVec& e, const CMat& a);

CMat random_complex(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);
CVec random_complex_vec(Eigen::Index n, std::uint64_t seed);
/// B B^H for random B, so Hermitian PSD.
CMat random_psd(Eigen::Index n, std::uint64_t seed);

/// Field of a unit plane wave arriving from direction `from` under the
/// exp(+j omega t) convention: exp(j k from^T r).
Complex plane_wave(const Vec3& from, double k, const Vec3& r);

/// Smallest eigenvalue of a Hermitian matrix (dense solver).
double min_eigenvalue(const CMat& h);

double hermitian_defect(const CMat& m);

}  // namespace kianc::oracle
