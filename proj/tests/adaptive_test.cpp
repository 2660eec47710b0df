#include "kianc/adaptive.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "kianc/acoustics.hpp"
#include "kianc/geometry.hpp"
#include "kianc/kernel.hpp"
#include "support/oracles.hpp"

namespace kianc {
namespace {

using oracle::random_complex;
using oracle::random_complex_vec;
using oracle::random_psd;

double rel(const CMat& a, const CMat& b) { return (a - b).norm() / b.norm(); }

TEST(SpectralNorm, IdentityAndDiagonal) {
  EXPECT_NEAR(spectral_norm(CMat::Identity(3, 3)).value, 1.0, 1e-12);
  CMat d = CMat::Zero(2, 2);
  d(0, 0) = 2.0;
  d(1, 1) = Complex(0.0, 1.0);
  const SpectralNorm n = spectral_norm(d);
  EXPECT_NEAR(n.value, 2.0, 1e-8);
  EXPECT_TRUE(n.converged);
  EXPECT_EQ(spectral_norm(CMat::Zero(4, 3)).value, 0.0);
}

TEST(SpectralNorm, SymmetricArrayGeometry) {
  const Scenario sc = build_default_scenario();
  for (double f : {150.0, 350.0, 500.0}) {
    const auto k = Wavenumber::from_frequency(f, sc.sound_speed);
    const CMat g = transfer_matrix(sc.secondary_sources, sc.error_mics, k);
    const CMat m = g.adjoint() * g;
    EXPECT_NEAR(spectral_norm(m).value, oracle::svd_norm(m), 1e-7 * oracle::svd_norm(m)) << f;
  }
}

TEST(SpectralNorm, MatchesDenseSvd) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const CMat m = random_complex(5, 5, seed);
    const SpectralNorm n = spectral_norm(m);
    EXPECT_TRUE(n.converged);
    const double ref = oracle::svd_norm(m);
    EXPECT_LT(std::abs(n.value - ref) / ref, 1e-7) << seed;
  }
  const CMat tall = random_complex(48, 16, 77);
  EXPECT_LT(std::abs(spectral_norm(tall).value - oracle::svd_norm(tall)) / oracle::svd_norm(tall),
            1e-7);
}

TEST(SpectralNorm, ReportsNonConvergence) {
  // Two nearly equal top singular values converge slowly.
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0 - 1e-9;
  m(0, 1) = 1e-3;
  const SpectralNorm n = spectral_norm(m, 1e-300, 3);
  EXPECT_FALSE(n.converged);
  EXPECT_EQ(n.iterations, 3);
  EXPECT_GT(n.value, 0.0);
}

TEST(Drive, Basics) {
  const CMat w = random_complex(4, 1, 1);
  CVec x(1);
  x(0) = 1.0;
  EXPECT_EQ(drive(w, x), w.col(0));
  EXPECT_EQ(drive(CMat::Zero(4, 2), random_complex_vec(2, 3)).norm(), 0.0);
  const CMat w2 = random_complex(3, 2, 2);
  const CVec x2 = random_complex_vec(2, 4);
  const Complex c(0.3, -1.2);
  EXPECT_LT((drive(w2, c * x2) - c * drive(w2, x2)).norm(), 1e-14);
  EXPECT_THROW(drive(w2, CVec::Zero(3)), std::invalid_argument);
}

TEST(Costs, TotalMatchesDoubleSum) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const CMat a = random_psd(7, seed);
    const CVec e = random_complex_vec(7, seed + 10);
    const Complex ref = oracle::quadratic_double_sum(e, a);
    EXPECT_NEAR(cost_total(e, a), ref.real(), 1e-12 * std::abs(ref));
    EXPECT_LT(std::abs(ref.imag()), 1e-12 * std::abs(ref));
    EXPECT_GE(cost_total(e, a), 0.0);
  }
  EXPECT_EQ(cost_total(CVec::Zero(3), random_psd(3, 1)), 0.0);
  const CVec e = random_complex_vec(5, 2);
  EXPECT_NEAR(cost_total(e, CMat::Identity(5, 5)), e.squaredNorm(), 1e-13);
}

TEST(Costs, IndividualSpecialCases) {
  const CMat add = random_psd(6, 1), ayy = random_psd(3, 2);
  const CMat ayd = random_complex(3, 6, 3);
  const CVec d = random_complex_vec(6, 4), y = random_complex_vec(3, 5);
  EXPECT_NEAR(cost_individual(d, CVec::Zero(3), add, ayd, ayy), cost_total(d, add), 1e-12);
  EXPECT_NEAR(cost_individual(CVec::Zero(6), y, add, ayd, ayy), cost_total(y, ayy), 1e-12);
  EXPECT_THROW(cost_individual(d, CVec::Zero(2), add, ayd, ayy), std::invalid_argument);
}

TEST(Costs, IndividualWithReducedMatricesEqualsTotal) {
  const CMat a = random_psd(6, 11);
  const CMat g = random_complex(6, 3, 12);
  const CVec d = random_complex_vec(6, 13), y = random_complex_vec(3, 14);
  const CVec e = d + g * y;
  const double ji = cost_individual(d, y, a, g.adjoint() * a, g.adjoint() * a * g);
  const double jt = cost_total(e, a);
  EXPECT_LT(std::abs(ji - jt) / jt, 1e-9);
}

TEST(DecomposeError, Identities) {
  const CMat g = random_complex(6, 3, 1);
  const CVec e = random_complex_vec(6, 2), y = random_complex_vec(3, 3);
  const auto [d0, s0] = decompose_error(e, g, CVec::Zero(3));
  EXPECT_EQ(d0, e);
  EXPECT_EQ(s0.norm(), 0.0);
  const auto [d1, s1] = decompose_error(g * y, g, y);
  EXPECT_EQ(d1.norm(), 0.0);
  const auto [d2, s2] = decompose_error(e, g, y);
  EXPECT_LT((d2 + s2 - e).norm(), 1e-15 * e.norm());
  EXPECT_THROW(decompose_error(e, g, CVec::Zero(2)), std::invalid_argument);
}

TEST(DecomposeError, RecoversPrimaryFromSimulatedMics) {
  const Scenario s = build_default_scenario();
  const Wavenumber k = Wavenumber::from_frequency(300.0, 343.0);
  const CMat g = transfer_matrix(s.secondary_sources, s.error_mics, k);
  const CVec d = primary_field(s.primary_source, s.error_mics, k);
  const CVec y = random_complex_vec(16, 8);
  const CVec noise = 1e-4 * random_complex_vec(48, 9);
  const auto [d_hat, s_part] = decompose_error(d + g * y + noise, g, y);
  EXPECT_LT((d_hat - d - noise).norm(), 1e-14 * d.norm());
}

TEST(NlmsParams, Validation) {
  EXPECT_NO_THROW((NlmsParams{0.5, 1e-3}.validate()));
  EXPECT_THROW((NlmsParams{0.0, 1e-3}.validate()), std::invalid_argument);
  EXPECT_THROW((NlmsParams{2.0, 1e-3}.validate()), std::invalid_argument);
  EXPECT_THROW((NlmsParams{0.5, 0.0}.validate()), std::invalid_argument);
}

struct SmallInstance {
  CMat g, a, add, ayd, ayy;
  CVec d, x;
  CMat w;
  explicit SmallInstance(std::uint64_t seed, Eigen::Index m = 6, Eigen::Index l = 3,
                         Eigen::Index r = 2)
      : g(random_complex(m, l, seed)),
        a(random_psd(m, seed + 1)),
        add(random_psd(m, seed + 2)),
        ayd(random_complex(l, m, seed + 3)),
        ayy(random_psd(l, seed + 4)),
        d(random_complex_vec(m, seed + 5)),
        x(random_complex_vec(r, seed + 6)),
        w(0.1 * random_complex(l, r, seed + 7)) {}
};

TEST(Update, ZeroErrorOrZeroReferenceLeavesWUnchanged) {
  const SmallInstance in(3);
  const NlmsParams p;
  const double n = spectral_norm(in.g.adjoint() * in.a * in.g).value;
  CMat w = in.w;
  update_total_ki(w, in.x, CVec::Zero(6), in.g, in.a, n, p);
  EXPECT_EQ(w, in.w);
  update_total_ki(w, CVec::Zero(2), in.d, in.g, in.a, n, p);
  EXPECT_EQ(w, in.w);

  CMat w0 = CMat::Zero(3, 2);
  update_individual_ki(w0, in.x, CVec::Zero(6), in.g, in.ayd, in.ayy,
                       spectral_norm(in.ayy).value, p);
  EXPECT_EQ(w0.norm(), 0.0);
}

TEST(Update, DimensionMismatchRejected) {
  const SmallInstance in(4);
  CMat w = in.w;
  EXPECT_THROW(update_total_ki(w, in.x, CVec::Zero(5), in.g, in.a, 1.0, {}),
               std::invalid_argument);
  EXPECT_THROW(update_individual_ki(w, in.x, in.d, in.g, in.ayd, CMat::Identity(2, 2), 1.0, {}),
               std::invalid_argument);
}

TEST(Update, FreeFunctionsMatchController) {
  const SmallInstance in(5);
  const NlmsParams p{0.7, 1e-2};
  const CVec e = in.d + in.g * in.w * in.x;

  const NlmsController tot = NlmsController::total_ki(in.g, in.a, p);
  CMat w1 = in.w, w2 = in.w;
  tot.update(w1, in.x, e);
  update_total_ki(w2, in.x, e, in.g, in.a, tot.norm(), p);
  EXPECT_LT(rel(w1, w2), 1e-13);

  const NlmsController ind = NlmsController::individual_ki(in.g, in.add, in.ayd, in.ayy, p);
  w1 = in.w;
  w2 = in.w;
  ind.update(w1, in.x, e);
  update_individual_ki(w2, in.x, e, in.g, in.ayd, in.ayy, ind.norm(), p);
  EXPECT_LT(rel(w1, w2), 1e-13);
}

TEST(Update, MpcIsTotalWithIdentity) {
  const SmallInstance in(6);
  const NlmsController mpc = NlmsController::mpc(in.g, {});
  const NlmsController tot = NlmsController::total_ki(in.g, CMat::Identity(6, 6), {});
  EXPECT_NEAR(mpc.norm(), tot.norm(), 1e-12 * tot.norm());
  EXPECT_NEAR(mpc.norm(), oracle::svd_norm(in.g.adjoint() * in.g), 1e-7 * mpc.norm());
  const CVec e = random_complex_vec(6, 1);
  EXPECT_LT(rel(mpc.gradient(in.w, in.x, e), tot.gradient(in.w, in.x, e)), 1e-14);
}

TEST(Update, NormalizerPositiveAndUpdateFinite) {
  const SmallInstance in(7);
  const NlmsParams p{0.5, 1e-3};
  const NlmsController zero = NlmsController::individual_ki(
      in.g, in.add, CMat::Zero(3, 6), CMat::Zero(3, 3), p);
  EXPECT_EQ(zero.norm(), 0.0);
  EXPECT_DOUBLE_EQ(zero.step_size(CVec::Zero(2)), p.mu0 / p.epsilon);
  CMat w = in.w;
  zero.update(w, 1e6 * in.x, 1e6 * in.d);
  EXPECT_TRUE(w.allFinite());
}

// Analytic Wirtinger gradients against central differences of the costs.
TEST(Gradient, MatchesFiniteDifferences) {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    const SmallInstance in(seed);
    const NlmsParams p;
    auto error = [&](const CMat& w) { return CVec(in.d + in.g * (w * in.x)); };

    const NlmsController tot = NlmsController::total_ki(in.g, in.a, p);
    const CMat fd_t = oracle::wirtinger_fd([&](const CMat& w) { return cost_total(error(w), in.a); },
                                           in.w);
    EXPECT_LT(rel(tot.gradient(in.w, in.x, error(in.w)), fd_t), 1e-6) << seed;

    const NlmsController ind = NlmsController::individual_ki(in.g, in.add, in.ayd, in.ayy, p);
    auto j_ind = [&](const CMat& w) {
      const CVec y = w * in.x;
      const auto [d_hat, s] = decompose_error(error(w), in.g, y);
      return cost_individual(d_hat, y, in.add, in.ayd, in.ayy);
    };
    const CMat fd_i = oracle::wirtinger_fd(j_ind, in.w);
    EXPECT_LT(rel(ind.gradient(in.w, in.x, error(in.w)), fd_i), 1e-6) << seed;
  }
}

TEST(Descent, NoiselessStationaryCostIsNonIncreasing) {
  for (std::uint64_t seed = 200; seed < 205; ++seed) {
    const SmallInstance in(seed);
    const NlmsParams p{0.5, 1e-3};
    const NlmsController ctrls[] = {
        NlmsController::mpc(in.g, p), NlmsController::total_ki(in.g, in.a, p),
        NlmsController::individual_ki(in.g, in.add, in.ayd, in.ayy, p)};
    for (const auto& c : ctrls) {
      CMat w = CMat::Zero(3, 2);
      double previous = 0.0, first = 0.0;
      for (int n = 0; n < 500; ++n) {
        const CVec y = w * in.x;
        const CVec e = in.d + in.g * y;
        const double j = c.cost(e, y);
        if (n == 0) first = previous = j;
        EXPECT_LE(j, previous + 1e-12 * std::abs(first)) << to_string(c.kind()) << " n=" << n;
        previous = j;
        c.update(w, in.x, e);
      }
    }
  }
}

// Identical kernels for the primary and every loudspeaker make the individual
// update collapse to the total one at every iteration.
TEST(Equivalence, IndividualEqualsTotalWithUniformKernels) {
  const Wavenumber k = Wavenumber::from_frequency(250.0, 343.0);
  const Cuboid region{Vec3::Zero(), Vec3(0.3, 0.3, 0.05)};
  PointList mics = square_perimeter(0.3, 6, 0.05, 0.02);
  for (const Vec3& p : square_perimeter(0.3, 6, -0.05, 0.02)) mics.push_back(p);
  const PointList sources = square_perimeter(1.0, 4, 0.1);
  const Vec3 primary(-2.8, 0.3, 0.0);
  const Vec3 eta = direction_to(primary, Vec3::Zero());
  const CMat g = transfer_matrix(sources, mics, k);
  const SampleSet samples = monte_carlo_samples(region, 800, 3);
  const KernelParams kp{2.0, eta, 1e-3};
  const CMat a = interp_matrix_total(mics, k, kp, samples);
  const InterpMatrices im =
      interp_matrices_individual(mics, k, kp, PointList(4, eta), 2.0, g, samples);

  const NlmsParams p;
  const NlmsController tot = NlmsController::total_ki(g, a, p);
  const NlmsController ind = NlmsController::individual_ki(g, im.dd, im.yd, im.yy, p);
  EXPECT_LT(std::abs(tot.norm() - ind.norm()) / tot.norm(), 1e-10);

  const CVec gp = primary_field(primary, mics, k);
  std::mt19937_64 rng_a(1), rng_b(1);
  CMat wt = CMat::Zero(4, 1), wi = CMat::Zero(4, 1);
  auto step = [&](const NlmsController& c, CMat& w, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0, 1);
    CVec x(1);
    const double re = normal(rng);
    const double im_part = normal(rng);
    x(0) = Complex(re, im_part);
    CVec e = gp * x(0) + g * (w * x);
    for (Eigen::Index m = 0; m < e.size(); ++m) {
      const double nr = normal(rng);
      const double ni = normal(rng);
      e(m) += 1e-4 * Complex(nr, ni);
    }
    c.update(w, x, e);
  };
  for (int n = 0; n < 100; ++n) {
    step(tot, wt, rng_a);
    step(ind, wi, rng_b);
    ASSERT_LT(rel(wi, wt), 1e-10) << "iteration " << n;
  }
  EXPECT_GT(wt.norm(), 0.0);
}

}  // namespace
}  // namespace kianc
