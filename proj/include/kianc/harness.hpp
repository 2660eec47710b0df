#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kianc/acoustics.hpp"
#include "kianc/adaptive.hpp"
#include "kianc/geometry.hpp"
#include "kianc/kernel.hpp"

namespace kianc {

/// One algorithm under comparison. beta applies to the total-KI kernel or to
/// the primary kernel of the individual method; beta_secondary (individual
/// only) defaults to beta.
struct MethodSpec {
  AlgorithmKind kind = AlgorithmKind::kMpc;
  double beta = 0.0;
  std::optional<double> beta_secondary;

  double secondary_beta() const { return beta_secondary.value_or(beta); }
  /// "MPC", "TotalKI(beta=2)", "IndividualKI(beta=10)", ...
  std::string label() const;
  /// Parses "MPC", "TotalKI:<beta>", "IndividualKI:<beta>[:<beta_secondary>]".
  static MethodSpec parse(std::string_view text);
};

/// MPC, TotalKI(beta=0), TotalKI(beta=2), IndividualKI(beta=10).
std::vector<MethodSpec> default_methods();

enum class Excitation { kGaussian, kConstant };

/// Everything that defines a run besides geometry, frequency and method.
struct Settings {
  double lambda = 1e-3;
  std::size_t mc_samples = 2500;
  GridCounts grid;
  NlmsParams nlms;
  std::size_t iterations = 12000;
  std::size_t checkpoint_every = 100;
  double snr_db = 40.0;  // +inf disables measurement noise
  Excitation excitation = Excitation::kGaussian;
  Complex primary_amplitude = 1.0;
  /// Relative std of multiplicative complex Gaussian error injected into the
  /// secondary-path model. 0 means G_hat = G.
  double model_error_std = 0.0;
  std::uint64_t seed = 20210601;
  /// When set, region-integral matrices are cached here as binary sidecars.
  std::optional<std::string> cache_dir;

  void validate() const;
};

/// Regional noise power reduction 10 log10(sum|u_e|^2 / sum|u_p|^2), floored
/// at kPredFloorDb when u_e vanishes.
inline constexpr double kPredFloorDb = -300.0;
double p_red_db(const CVec& u_e, const CVec& u_p);

/// Per-frequency precomputation shared by every run at that frequency:
/// transfer matrices, the evaluation grid, the Monte Carlo sample set and
/// one controller per method. Read-only once built.
class FrequencyContext {
 public:
  FrequencyContext(const Scenario& scenario, const Settings& settings,
                   std::span<const MethodSpec> methods, double frequency_hz);

  double frequency_hz() const { return frequency_hz_; }
  const Wavenumber& wavenumber() const { return k_; }
  const Scenario& scenario() const { return scenario_; }
  const Settings& settings() const { return settings_; }
  const SampleSet& grid() const { return grid_; }
  const SampleSet& samples() const { return samples_; }
  const CMat& g() const { return g_; }
  const CMat& g_hat() const { return g_hat_; }
  /// Grid points x loudspeakers.
  const CMat& grid_transfer() const { return grid_transfer_; }
  std::span<const MethodSpec> methods() const { return methods_; }
  const NlmsController& controller(std::size_t method_index) const;

 private:
  NlmsController build_controller(const MethodSpec& method) const;

  double frequency_hz_;
  Wavenumber k_;
  Scenario scenario_;
  Settings settings_;
  std::vector<MethodSpec> methods_;
  SampleSet grid_;
  SampleSet samples_;
  CMat g_;
  CMat g_hat_;
  CMat grid_transfer_;
  std::vector<NlmsController> controllers_;
};

struct Checkpoint {
  std::size_t iteration = 0;
  double p_red_db = 0.0;
};

struct RunResult {
  std::vector<Checkpoint> trajectory;
  CMat w;
  CVec u_p;  // true primary field on the grid
  CVec u_e;  // true total field on the grid at the last iteration
  std::vector<double> cost_trace;  // controller cost per iteration, if requested
  std::size_t iterations_run = 0;
  bool diverged = false;
  double wall_seconds = 0.0;

  double final_p_red_db() const { return trajectory.back().p_red_db; }
};

struct RunOptions {
  std::size_t iterations = 12000;
  /// Position of the physical primary source; may differ from the nominal
  /// one the kernels were oriented toward.
  std::optional<Vec3> true_primary;
  bool record_cost = false;
};

/// Adapts the control filter from W = 0 for one method at one frequency and
/// records P_red of the true fields at every checkpoint.
RunResult run_adaptation(const FrequencyContext& context,
                         std::size_t method_index, const RunOptions& options);

/// start, start + step, ... up to stop inclusive (with 1e-9 slack).
std::vector<double> frequency_grid(double start, double stop, double step);

struct ConvergenceRow {
  std::string method;
  RunResult result;
};

struct SweepRow {
  double frequency_hz = 0.0;
  std::string method;
  double p_red_db = 0.0;
  bool diverged = false;
};

struct PerturbRow {
  double frequency_hz = 0.0;
  std::string method;
  double mean_p_red_db = 0.0;
  double std_p_red_db = 0.0;
  std::size_t trials = 0;
  bool diverged = false;
};

std::vector<ConvergenceRow> convergence_study(const Scenario& scenario,
                                              const Settings& settings,
                                              std::span<const MethodSpec> methods,
                                              double frequency_hz,
                                              unsigned jobs = 1);

std::vector<SweepRow> frequency_sweep(const Scenario& scenario,
                                      const Settings& settings,
                                      std::span<const MethodSpec> methods,
                                      std::span<const double> frequencies,
                                      unsigned jobs = 1);

/// The physical primary source is jittered per trial while every kernel
/// keeps the nominal direction. Trial t uses the same perturbed position at
/// every frequency and for every method.
std::vector<PerturbRow> perturbation_study(const Scenario& scenario,
                                           const Settings& settings,
                                           std::span<const MethodSpec> methods,
                                           std::span<const double> frequencies,
                                           const PerturbationStd& std_dev,
                                           std::size_t trials,
                                           unsigned jobs = 1);

}  // namespace kianc
