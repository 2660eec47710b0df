#include "kianc/adaptive.hpp"

#include <cmath>
#include <stdexcept>

namespace kianc {
namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

}  // namespace

void NlmsParams::validate() const {
  require(mu0 > 0.0 && mu0 < 2.0, "nlms: mu0 must lie in (0, 2)");
  require(epsilon > 0.0 && std::isfinite(epsilon), "nlms: epsilon must be > 0");
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::kMpc: return "MPC";
    case AlgorithmKind::kTotalKi: return "TotalKI";
    case AlgorithmKind::kIndividualKi: return "IndividualKI";
  }
  return "unknown";
}

SpectralNorm spectral_norm(const CMat& m, double rel_tol, int max_iterations) {
  require(m.allFinite(), "spectral_norm: non-finite matrix");
  SpectralNorm out;
  if (m.size() == 0) {
    out.converged = true;
    return out;
  }
  // Unit-modulus start with golden-ratio phases. An all-ones start lies in
  // the invariant subspace of symmetric arrays and can miss the top mode.
  const Eigen::Index n = m.cols();
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double turns = std::fmod(0.6180339887498949 * static_cast<double>(i + 1), 1.0);
    v(i) = std::polar(1.0 / std::sqrt(static_cast<double>(n)), 2.0 * kPi * turns);
  }
  double sigma2 = 0.0;
  for (int it = 1; it <= max_iterations; ++it) {
    CVec w = m.adjoint() * (m * v);
    const double next = w.norm();
    out.iterations = it;
    if (next == 0.0) {
      // v is in the null space of M^H M.
      if (m.squaredNorm() == 0.0) {
        out.converged = true;
        out.value = 0.0;
        return out;
      }
      v = CVec::Zero(m.cols());
      v(it % m.cols()) = 1.0;
      continue;
    }
    v = w / next;
    if (std::abs(next - sigma2) <= rel_tol * next) {
      sigma2 = next;
      out.converged = true;
      break;
    }
    sigma2 = next;
  }
  out.value = std::sqrt(sigma2);
  return out;
}

CVec drive(const CMat& w, const CVec& x) {
  require(w.cols() == x.size(), "drive: W columns must match x length");
  return w * x;
}

void update_total_ki(CMat& w, const CVec& x, const CVec& e, const CMat& g_hat,
                     const CMat& a, double norm_gag, const NlmsParams& params) {
  require(g_hat.rows() == e.size() && a.rows() == e.size() && a.cols() == e.size(),
          "update_total_ki: dimension mismatch");
  require(w.rows() == g_hat.cols() && w.cols() == x.size(),
          "update_total_ki: W dimension mismatch");
  const double step = params.mu0 / (norm_gag * x.squaredNorm() + params.epsilon);
  const CVec grad = g_hat.adjoint() * (a * e);
  w.noalias() -= step * grad * x.adjoint();
}

void update_individual_ki(CMat& w, const CVec& x, const CVec& e,
                          const CMat& g_hat, const CMat& a_yd, const CMat& a_yy,
                          double norm_yy, const NlmsParams& params) {
  require(a_yd.cols() == e.size() && a_yd.rows() == w.rows() &&
              a_yy.rows() == w.rows() && a_yy.cols() == w.rows(),
          "update_individual_ki: dimension mismatch");
  require(g_hat.rows() == e.size() && g_hat.cols() == w.rows() && w.cols() == x.size(),
          "update_individual_ki: W/G dimension mismatch");
  const double step = params.mu0 / (norm_yy * x.squaredNorm() + params.epsilon);
  const CVec y = w * x;
  const CVec grad = a_yd * e + a_yy * y - a_yd * (g_hat * y);
  w.noalias() -= step * grad * x.adjoint();
}

double cost_total(const CVec& e, const CMat& a) {
  require(a.rows() == e.size() && a.cols() == e.size(), "cost_total: dimension mismatch");
  return e.dot(a * e).real();
}

double cost_individual(const CVec& d_hat, const CVec& y, const CMat& a_dd,
                       const CMat& a_yd, const CMat& a_yy) {
  require(a_dd.rows() == d_hat.size() && a_dd.cols() == d_hat.size() &&
              a_yd.rows() == y.size() && a_yd.cols() == d_hat.size() &&
              a_yy.rows() == y.size() && a_yy.cols() == y.size(),
          "cost_individual: dimension mismatch");
  const Complex cross = y.dot(a_yd * d_hat);
  const Complex j = d_hat.dot(a_dd * d_hat) + cross + std::conj(cross) +
                    y.dot(a_yy * y);
  return j.real();
}

std::pair<CVec, CVec> decompose_error(const CVec& e, const CMat& g_hat,
                                      const CVec& y) {
  require(g_hat.rows() == e.size() && g_hat.cols() == y.size(),
          "decompose_error: dimension mismatch");
  CVec s = g_hat * y;
  CVec d_hat = e - s;
  return {std::move(d_hat), std::move(s)};
}

NlmsController::NlmsController(AlgorithmKind kind, CMat g_hat, NlmsParams params)
    : kind_(kind), g_hat_(std::move(g_hat)), params_(params) {
  params_.validate();
}

NlmsController NlmsController::mpc(const CMat& g_hat, const NlmsParams& params) {
  NlmsController c(AlgorithmKind::kMpc, g_hat, params);
  c.error_gain_ = g_hat.adjoint();
  const SpectralNorm n = spectral_norm(g_hat.adjoint() * g_hat);
  c.norm_ = n.value;
  c.norm_converged_ = n.converged;
  return c;
}

NlmsController NlmsController::total_ki(const CMat& g_hat, const CMat& a,
                                        const NlmsParams& params) {
  require(a.rows() == g_hat.rows() && a.cols() == g_hat.rows(),
          "total_ki: A must be M x M");
  NlmsController c(AlgorithmKind::kTotalKi, g_hat, params);
  c.error_gain_ = g_hat.adjoint() * a;
  c.a_ = a;
  const SpectralNorm n = spectral_norm(c.error_gain_ * g_hat);
  c.norm_ = n.value;
  c.norm_converged_ = n.converged;
  return c;
}

NlmsController NlmsController::individual_ki(const CMat& g_hat, const CMat& a_dd,
                                             const CMat& a_yd, const CMat& a_yy,
                                             const NlmsParams& params) {
  require(a_yd.rows() == g_hat.cols() && a_yd.cols() == g_hat.rows() &&
              a_yy.rows() == g_hat.cols() && a_yy.cols() == g_hat.cols() &&
              a_dd.rows() == g_hat.rows() && a_dd.cols() == g_hat.rows(),
          "individual_ki: need A_dd M x M, A_yd L x M, A_yy L x L");
  NlmsController c(AlgorithmKind::kIndividualKi, g_hat, params);
  c.error_gain_ = a_yd;
  c.feedback_gain_ = a_yy - a_yd * g_hat;
  c.a_ = a_dd;
  c.a_yd_ = a_yd;
  c.a_yy_ = a_yy;
  const SpectralNorm n = spectral_norm(a_yy);
  c.norm_ = n.value;
  c.norm_converged_ = n.converged;
  return c;
}

CMat NlmsController::gradient(const CMat& w, const CVec& x, const CVec& e) const {
  require(w.rows() == g_hat_.cols() && w.cols() == x.size() && e.size() == g_hat_.rows(),
          "nlms: dimension mismatch");
  CVec g = error_gain_ * e;
  if (kind_ == AlgorithmKind::kIndividualKi) g.noalias() += feedback_gain_ * (w * x);
  return g * x.adjoint();
}

double NlmsController::step_size(const CVec& x) const {
  return params_.mu0 / (norm_ * x.squaredNorm() + params_.epsilon);
}

void NlmsController::update(CMat& w, const CVec& x, const CVec& e) const {
  w.noalias() -= step_size(x) * gradient(w, x, e);
}


double NlmsController::cost(const CVec& e, const CVec& y) const {
  switch (kind_) {
    case AlgorithmKind::kMpc: return e.squaredNorm();
    case AlgorithmKind::kTotalKi: return cost_total(e, a_);
    case AlgorithmKind::kIndividualKi: {
      const auto [d_hat, s] = decompose_error(e, g_hat_, y);
      return cost_individual(d_hat, y, a_, a_yd_, a_yy_);
    }
  }
  return 0.0;
}

}  // namespace kianc
