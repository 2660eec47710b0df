#include "kianc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <stdexcept>
#include <thread>

#include "kianc/matrix_cache.hpp"
#include "kianc/rng.hpp"

namespace kianc {
namespace {

constexpr double kDivergenceFactor = 1e6;
constexpr std::size_t kDivergenceReferenceIteration = 100;

std::uint64_t frequency_key(double hz) {
  return static_cast<std::uint64_t>(std::llround(hz * 1000.0));
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string format_beta(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

template <typename Derived>
std::string hash_hex(const Eigen::MatrixBase<Derived>& m) {
  const auto& plain = m.eval();
  const std::string_view bytes(reinterpret_cast<const char*>(plain.data()),
                               sizeof(typename Derived::Scalar) * plain.size());
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string hash_points(PointSpan points) {
  Eigen::MatrixXd m(3, points.size());
  for (std::size_t i = 0; i < points.size(); ++i) m.col(i) = points[i];
  return hash_hex(m);
}

// Runs fn(0..n-1) on up to `jobs` threads. Each index writes only its own
// output slot, so results do not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, unsigned jobs, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(std::max(1u, jobs), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

CMat perturb_model(const CMat& g, double rel_std, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  CMat out = g;
  const double s = rel_std / std::sqrt(2.0);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double re = normal(rng);
    const double im = normal(rng);
    out.data()[i] *= Complex(1.0 + s * re, s * im);
  }
  return out;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

double parse_real(std::string_view text, std::string_view what) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw std::invalid_argument("method spec: bad " + std::string(what) + " '" + s + "'");
  return v;
}

}  // namespace

std::string MethodSpec::label() const {
  switch (kind) {
    case AlgorithmKind::kMpc:
      return "MPC";
    case AlgorithmKind::kTotalKi:
      return "TotalKI(beta=" + format_beta(beta) + ")";
    case AlgorithmKind::kIndividualKi:
      if (beta_secondary && *beta_secondary != beta)
        return "IndividualKI(beta=" + format_beta(beta) +
               ";beta_s=" + format_beta(*beta_secondary) + ")";
      return "IndividualKI(beta=" + format_beta(beta) + ")";
  }
  return "unknown";
}

MethodSpec MethodSpec::parse(std::string_view text) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(':', start);
    std::string part(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    part.erase(0, part.find_first_not_of(" \t"));
    part.erase(part.find_last_not_of(" \t") + 1);
    parts.push_back(std::move(part));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }

  MethodSpec m;
  const std::string name = lower(parts[0]);
  if (name == "mpc") {
    m.kind = AlgorithmKind::kMpc;
    if (parts.size() != 1)
      throw std::invalid_argument("method spec: MPC takes no parameters");
    return m;
  }
  if (name == "totalki" || name == "total_ki") {
    m.kind = AlgorithmKind::kTotalKi;
    if (parts.size() != 2)
      throw std::invalid_argument("method spec: expected TotalKI:<beta>");
  } else if (name == "individualki" || name == "individual_ki") {
    m.kind = AlgorithmKind::kIndividualKi;
    if (parts.size() != 2 && parts.size() != 3)
      throw std::invalid_argument(
          "method spec: expected IndividualKI:<beta>[:<beta_secondary>]");
  } else {
    throw std::invalid_argument("method spec: unknown method '" + parts[0] + "'");
  }
  m.beta = parse_real(parts[1], "beta");
  if (parts.size() == 3) m.beta_secondary = parse_real(parts[2], "beta_secondary");
  if (!(m.beta >= 0.0) || !(m.secondary_beta() >= 0.0))
    throw std::invalid_argument("method spec: beta must be >= 0");
  return m;
}

std::vector<MethodSpec> default_methods() {
  return {MethodSpec{AlgorithmKind::kMpc, 0.0, {}},
          MethodSpec{AlgorithmKind::kTotalKi, 0.0, {}},
          MethodSpec{AlgorithmKind::kTotalKi, 2.0, {}},
          MethodSpec{AlgorithmKind::kIndividualKi, 10.0, {}}};
}

void Settings::validate() const {
  if (!(lambda > 0.0)) throw std::invalid_argument("settings: lambda must be > 0");
  if (mc_samples == 0) throw std::invalid_argument("settings: mc_samples must be >= 1");
  if (grid.nx == 0 || grid.ny == 0 || grid.nz == 0)
    throw std::invalid_argument("settings: grid counts must be >= 1");
  nlms.validate();
  if (iterations == 0) throw std::invalid_argument("settings: iterations must be >= 1");
  if (checkpoint_every == 0)
    throw std::invalid_argument("settings: checkpoint_every must be >= 1");
  if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
    throw std::invalid_argument("settings: snr_db must be finite or +inf");
  if (!std::isfinite(primary_amplitude.real()) || !std::isfinite(primary_amplitude.imag()))
    throw std::invalid_argument("settings: non-finite primary amplitude");
  if (!(model_error_std >= 0.0))
    throw std::invalid_argument("settings: model_error_std must be >= 0");
}

double p_red_db(const CVec& u_e, const CVec& u_p) {
  if (u_e.size() != u_p.size())
    throw std::invalid_argument("p_red: field length mismatch");
  const double den = u_p.squaredNorm();
  if (!(den > 0.0)) throw std::invalid_argument("p_red: primary field has zero power");
  const double num = u_e.squaredNorm();
  if (num == 0.0) return kPredFloorDb;
  return std::max(kPredFloorDb, 10.0 * std::log10(num / den));
}

FrequencyContext::FrequencyContext(const Scenario& scenario,
                                   const Settings& settings,
                                   std::span<const MethodSpec> methods,
                                   double frequency_hz)
    : frequency_hz_(frequency_hz),
      k_(Wavenumber::from_frequency(frequency_hz, scenario.sound_speed)),
      scenario_(scenario),
      settings_(settings),
      methods_(methods.begin(), methods.end()) {
  scenario_.validate();
  settings_.validate();
  if (scenario_.num_reference != 1)
    throw std::invalid_argument(
        "harness: the reference signal is the primary source itself, R must be 1");

  const std::uint64_t fkey = frequency_key(frequency_hz_);
  grid_ = eval_grid(scenario_.region, settings_.grid);
  samples_ = monte_carlo_samples(scenario_.region, settings_.mc_samples,
                                 derive_seed(settings_.seed, "monte-carlo", fkey));
  g_ = transfer_matrix(scenario_.secondary_sources, scenario_.error_mics, k_);
  g_hat_ = settings_.model_error_std > 0.0
               ? perturb_model(g_, settings_.model_error_std,
                               derive_seed(settings_.seed, "model-error", fkey))
               : g_;
  grid_transfer_ = transfer_matrix(scenario_.secondary_sources, grid_.points, k_);

  controllers_.reserve(methods_.size());
  for (const MethodSpec& m : methods_) controllers_.push_back(build_controller(m));
}

const NlmsController& FrequencyContext::controller(std::size_t method_index) const {
  return controllers_.at(method_index);
}

NlmsController FrequencyContext::build_controller(const MethodSpec& method) const {
  if (method.kind == AlgorithmKind::kMpc)
    return NlmsController::mpc(g_hat_, settings_.nlms);

  const Vec3 center = scenario_.region.center;
  const KernelParams primary{method.beta,
                             direction_to(scenario_.primary_source, center),
                             settings_.lambda};

  std::optional<std::filesystem::path> sidecar;
  std::string key;
  if (settings_.cache_dir) {
    key = to_string(method.kind) + ";f=" + format_real(frequency_hz_) +
          ";c=" + format_real(scenario_.sound_speed) +
          ";beta=" + format_real(method.beta) +
          ";beta_s=" + format_real(method.secondary_beta()) +
          ";lambda=" + format_real(settings_.lambda) +
          ";eta=" + hash_hex(primary.eta) +
          ";n=" + std::to_string(settings_.mc_samples) +
          ";seed=" + std::to_string(settings_.seed) +
          ";region=" + hash_hex(scenario_.region.half_extents) +
          hash_hex(scenario_.region.center) +
          ";mics=" + hash_points(scenario_.error_mics);
    if (method.kind == AlgorithmKind::kIndividualKi)
      key += ";sources=" + hash_points(scenario_.secondary_sources) +
             ";ghat=" + hash_hex(g_hat_);
    char name[40];
    std::snprintf(name, sizeof(name), "interp-%016llx.kmat",
                  static_cast<unsigned long long>(fnv1a64(key)));
    sidecar = std::filesystem::path(*settings_.cache_dir) / name;
    if (auto bundle = load_matrix_bundle(*sidecar);
        bundle && bundle->contains("key:" + key)) {
      if (method.kind == AlgorithmKind::kTotalKi)
        return NlmsController::total_ki(g_hat_, bundle->at("A"), settings_.nlms);
      return NlmsController::individual_ki(g_hat_, bundle->at("A_dd"),
                                           bundle->at("A_yd"), bundle->at("A_yy"),
                                           settings_.nlms);
    }
  }

  if (method.kind == AlgorithmKind::kTotalKi) {
    CMat a = interp_matrix_total(scenario_.error_mics, k_, primary, samples_);
    if (sidecar) save_matrix_bundle(*sidecar, {{"key:" + key, CMat()}, {"A", a}});
    return NlmsController::total_ki(g_hat_, a, settings_.nlms);
  }

  PointList dirs;
  dirs.reserve(scenario_.num_sources());
  for (const Vec3& s : scenario_.secondary_sources) dirs.push_back(direction_to(s, center));
  InterpMatrices mats =
      interp_matrices_individual(scenario_.error_mics, k_, primary, dirs,
                                 method.secondary_beta(), g_hat_, samples_);
  if (sidecar)
    save_matrix_bundle(*sidecar, {{"key:" + key, CMat()},
                                  {"A_dd", mats.dd},
                                  {"A_yd", mats.yd},
                                  {"A_yy", mats.yy}});
  return NlmsController::individual_ki(g_hat_, mats.dd, mats.yd, mats.yy,
                                       settings_.nlms);
}

RunResult run_adaptation(const FrequencyContext& context,
                         std::size_t method_index, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  const NlmsController& ctrl = context.controller(method_index);
  const Settings& settings = context.settings();
  const Scenario& scenario = context.scenario();
  const Wavenumber& k = context.wavenumber();
  const std::size_t num_sources = scenario.num_sources();
  const std::size_t num_mics = scenario.num_mics();
  const Vec3 source = options.true_primary.value_or(scenario.primary_source);

  // Primary path to the mics (d = g_p x) and the true primary field on the
  // grid at unit reference.
  const CVec g_p = primary_field(source, scenario.error_mics, k, settings.primary_amplitude);
  RunResult result;
  result.u_p = primary_field(source, context.grid().points, k, settings.primary_amplitude);

  double noise_std = 0.0;
  if (std::isfinite(settings.snr_db)) {
    const double mean_power = g_p.squaredNorm() / static_cast<double>(num_mics);
    noise_std = std::sqrt(mean_power / std::pow(10.0, settings.snr_db / 10.0));
  }

  const std::uint64_t fkey = frequency_key(context.frequency_hz());
  Rng excitation_rng(derive_seed(settings.seed, "excitation", fkey));
  Rng noise_rng(derive_seed(settings.seed, "noise", fkey));
  std::normal_distribution<double> excitation_normal(0.0, 1.0);
  std::normal_distribution<double> noise_normal(0.0, 1.0);
  const double half = std::sqrt(0.5);

  CMat w = CMat::Zero(num_sources, 1);
  CVec x(1);
  CVec e(num_mics);
  const CVec unit_reference = CVec::Ones(1);

  auto record = [&](std::size_t n) {
    result.u_e = total_field(result.u_p, context.grid_transfer(), w * unit_reference);
    result.trajectory.push_back({n, p_red_db(result.u_e, result.u_p)});
  };
  record(0);

  double reference_norm = 0.0;
  for (std::size_t n = 1; n <= options.iterations; ++n) {
    if (settings.excitation == Excitation::kGaussian) {
      const double re = excitation_normal(excitation_rng);
      const double im = excitation_normal(excitation_rng);
      x(0) = Complex(re, im) * half;
    } else {
      x(0) = 1.0;
    }
    const CVec y = w * x;
    e.noalias() = g_p * x(0) + context.g() * y;
    if (noise_std > 0.0) {
      for (std::size_t m = 0; m < num_mics; ++m) {
        const double re = noise_normal(noise_rng);
        const double im = noise_normal(noise_rng);
        e(m) += Complex(re, im) * (half * noise_std);
      }
    }
    if (options.record_cost) result.cost_trace.push_back(ctrl.cost(e, y));
    ctrl.update(w, x, e);
    result.iterations_run = n;

    const double norm = w.norm();
    if (n == kDivergenceReferenceIteration) reference_norm = norm;
    const bool diverged =
        !std::isfinite(norm) ||
        (n > kDivergenceReferenceIteration && reference_norm > 0.0 &&
         norm > kDivergenceFactor * reference_norm);
    if (diverged) {
      result.diverged = true;
      if (w.allFinite()) record(n);
      break;
    }
    if (n % settings.checkpoint_every == 0 || n == options.iterations) record(n);
  }

  result.w = std::move(w);
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::vector<double> frequency_grid(double start, double stop, double step) {
  if (!(start > 0.0) || !std::isfinite(start) || !std::isfinite(stop))
    throw std::invalid_argument("frequency grid: start must be positive");
  if (!(step > 0.0) || !std::isfinite(step))
    throw std::invalid_argument("frequency grid: step must be positive");
  if (stop < start) throw std::invalid_argument("frequency grid: stop < start");
  std::vector<double> out;
  for (std::size_t i = 0;; ++i) {
    const double f = start + static_cast<double>(i) * step;
    if (f > stop + 1e-9) break;
    out.push_back(f);
  }
  return out;
}

std::vector<ConvergenceRow> convergence_study(const Scenario& scenario,
                                              const Settings& settings,
                                              std::span<const MethodSpec> methods,
                                              double frequency_hz, unsigned jobs) {
  const FrequencyContext context(scenario, settings, methods, frequency_hz);
  std::vector<ConvergenceRow> rows(methods.size());
  parallel_for(methods.size(), jobs, [&](std::size_t i) {
    RunOptions opts;
    opts.iterations = settings.iterations;
    rows[i] = {methods[i].label(), run_adaptation(context, i, opts)};
  });
  return rows;
}

namespace {

std::vector<std::unique_ptr<FrequencyContext>> build_contexts(
    const Scenario& scenario, const Settings& settings,
    std::span<const MethodSpec> methods, std::span<const double> frequencies,
    unsigned jobs) {
  std::vector<std::unique_ptr<FrequencyContext>> contexts(frequencies.size());
  parallel_for(frequencies.size(), jobs, [&](std::size_t i) {
    contexts[i] = std::make_unique<FrequencyContext>(scenario, settings, methods,
                                                     frequencies[i]);
  });
  return contexts;
}

}  // namespace

std::vector<SweepRow> frequency_sweep(const Scenario& scenario,
                                      const Settings& settings,
                                      std::span<const MethodSpec> methods,
                                      std::span<const double> frequencies,
                                      unsigned jobs) {
  const auto contexts = build_contexts(scenario, settings, methods, frequencies, jobs);
  const std::size_t nm = methods.size();
  std::vector<SweepRow> rows(frequencies.size() * nm);
  parallel_for(rows.size(), jobs, [&](std::size_t i) {
    const std::size_t f = i / nm;
    const std::size_t m = i % nm;
    RunOptions opts;
    opts.iterations = settings.iterations;
    const RunResult r = run_adaptation(*contexts[f], m, opts);
    rows[i] = {frequencies[f], methods[m].label(), r.final_p_red_db(), r.diverged};
  });
  return rows;
}

std::vector<PerturbRow> perturbation_study(const Scenario& scenario,
                                           const Settings& settings,
                                           std::span<const MethodSpec> methods,
                                           std::span<const double> frequencies,
                                           const PerturbationStd& std_dev,
                                           std::size_t trials, unsigned jobs) {
  if (trials == 0) throw std::invalid_argument("perturbation study: trials must be >= 1");
  std::vector<Vec3> positions(trials);
  for (std::size_t t = 0; t < trials; ++t)
    positions[t] = perturb_primary_source(scenario.primary_source, std_dev,
                                          derive_seed(settings.seed, "perturbation", t));

  const auto contexts = build_contexts(scenario, settings, methods, frequencies, jobs);
  const std::size_t nm = methods.size();
  const std::size_t per_frequency = nm * trials;
  std::vector<double> finals(frequencies.size() * per_frequency);
  std::vector<char> diverged(finals.size(), 0);
  parallel_for(finals.size(), jobs, [&](std::size_t i) {
    const std::size_t f = i / per_frequency;
    const std::size_t m = (i % per_frequency) / trials;
    const std::size_t t = i % trials;
    RunOptions opts;
    opts.iterations = settings.iterations;
    opts.true_primary = positions[t];
    const RunResult r = run_adaptation(*contexts[f], m, opts);
    finals[i] = r.final_p_red_db();
    diverged[i] = r.diverged ? 1 : 0;
  });

  std::vector<PerturbRow> rows;
  rows.reserve(frequencies.size() * nm);
  for (std::size_t f = 0; f < frequencies.size(); ++f) {
    for (std::size_t m = 0; m < nm; ++m) {
      const std::size_t base = f * per_frequency + m * trials;
      const auto first = finals.begin() + static_cast<std::ptrdiff_t>(base);
      const auto last = first + static_cast<std::ptrdiff_t>(trials);
      const bool constant = std::all_of(first, last, [&](double v) { return v == *first; });
      const double mean = constant ? *first
                                   : std::accumulate(first, last, 0.0) /
                                         static_cast<double>(trials);
      double var = 0.0;
      for (auto it = first; it != last; ++it) var += (*it - mean) * (*it - mean);
      const double sd = trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1)) : 0.0;
      const bool any_diverged =
          std::any_of(diverged.begin() + static_cast<std::ptrdiff_t>(base),
                      diverged.begin() + static_cast<std::ptrdiff_t>(base + trials),
                      [](char c) { return c != 0; });
      rows.push_back({frequencies[f], methods[m].label(), mean, sd, trials, any_diverged});
    }
  }
  return rows;
}

}  // namespace kianc
