#include "kianc/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>

#include "CLI11.hpp"
#include "kianc/config.hpp"

namespace kianc {
namespace {

namespace fs = std::filesystem;

std::string sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17e", v);
  return buf;
}

struct Overrides {
  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<double> freq;
  std::optional<std::size_t> iterations;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cache_dir;
  std::optional<double> f_start, f_stop, f_step;
  std::optional<std::size_t> trials;
  std::optional<std::string> freqs;
  std::optional<std::size_t> field_iteration;
  std::optional<std::string> field_method;
  unsigned jobs = 1;
};

ConfigFile resolve(const Overrides& o) {
  ConfigFile cfg = o.config_path ? load_config(*o.config_path) : ConfigFile{};
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  if (o.freq) cfg.frequency_hz = *o.freq;
  if (o.iterations) cfg.settings.iterations = *o.iterations;
  if (o.seed) cfg.settings.seed = *o.seed;
  if (o.cache_dir) cfg.settings.cache_dir = *o.cache_dir;
  if (o.f_start) cfg.sweep.start_hz = *o.f_start;
  if (o.f_stop) cfg.sweep.stop_hz = *o.f_stop;
  if (o.f_step) cfg.sweep.step_hz = *o.f_step;
  if (o.trials) cfg.perturb.trials = *o.trials;
  if (o.freqs) {
    try {
      cfg.perturb.frequencies_hz = parse_real_list(*o.freqs);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("--freqs: ") + e.what());
    }
  }
  if (o.field_iteration) cfg.field.iteration = *o.field_iteration;
  if (o.field_method) {
    try {
      cfg.field.method = MethodSpec::parse(*o.field_method);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("--method: ") + e.what());
    }
  }
  cfg.validate();
  return cfg;
}

class CsvFile {
 public:
  CsvFile(const fs::path& path, const std::string& header) : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << header << '\n';
  }
  template <typename... Fields>
  void row(const Fields&... fields) {
    bool first = true;
    ((out_ << (first ? "" : ",") << fields, first = false), ...);
    out_ << '\n';
  }

 private:
  std::ofstream out_;
};

void write_meta(const fs::path& dir, const std::string& command, const ConfigFile& cfg,
                const nlohmann::json& extra) {
  nlohmann::json meta;
  meta["version"] = kVersion;
  meta["command"] = command;
  meta["config_hash"] = config_hash(cfg);
  meta["config"] = to_json(cfg);
  meta["config"].erase("output");
  meta["seeds"] = {{"root", cfg.settings.seed},
                   {"streams", {"monte-carlo", "excitation", "noise", "perturbation",
                                "model-error"}}};
  for (const auto& [k, v] : extra.items()) meta[k] = v;
  std::ofstream out(dir / "meta.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

fs::path prepare_dir(const ConfigFile& cfg) {
  fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  return dir;
}

int cmd_convergence(const ConfigFile& cfg, unsigned jobs, std::ostream& out) {
  const auto rows =
      convergence_study(cfg.scenario, cfg.settings, cfg.methods, cfg.frequency_hz, jobs);
  const fs::path dir = prepare_dir(cfg);
  CsvFile csv(dir / "convergence.csv", "iteration,method,p_red_db");
  bool diverged = false;
  nlohmann::json finals = nlohmann::json::object();
  for (const auto& row : rows) {
    for (const auto& cp : row.result.trajectory) csv.row(cp.iteration, row.method, sci(cp.p_red_db));
    diverged = diverged || row.result.diverged;
    finals[row.method] = row.result.final_p_red_db();
    out << row.method << ": final P_red " << row.result.final_p_red_db() << " dB"
        << (row.result.diverged ? " (diverged)" : "") << '\n';
  }
  write_meta(dir, "convergence", cfg, {{"final_p_red_db", finals}});
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_sweep(const ConfigFile& cfg, unsigned jobs, std::ostream& out) {
  const auto freqs = frequency_grid(cfg.sweep.start_hz, cfg.sweep.stop_hz, cfg.sweep.step_hz);
  const auto rows = frequency_sweep(cfg.scenario, cfg.settings, cfg.methods, freqs, jobs);
  const fs::path dir = prepare_dir(cfg);
  CsvFile csv(dir / "sweep.csv", "frequency_hz,method,p_red_db");
  bool diverged = false;
  for (const auto& r : rows) {
    csv.row(sci(r.frequency_hz), r.method, sci(r.p_red_db));
    diverged = diverged || r.diverged;
  }
  write_meta(dir, "sweep", cfg, {{"frequencies", freqs}});
  out << "wrote " << rows.size() << " rows to " << (dir / "sweep.csv").string() << '\n';
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_perturb(const ConfigFile& cfg, unsigned jobs, std::ostream& out) {
  const auto freqs = cfg.perturb.frequencies_hz.empty()
                         ? frequency_grid(cfg.sweep.start_hz, cfg.sweep.stop_hz,
                                          cfg.sweep.step_hz)
                         : cfg.perturb.frequencies_hz;
  const auto rows = perturbation_study(cfg.scenario, cfg.settings, cfg.methods, freqs,
                                       cfg.perturb.std_dev, cfg.perturb.trials, jobs);
  const fs::path dir = prepare_dir(cfg);
  CsvFile csv(dir / "perturb.csv", "frequency_hz,method,mean_p_red_db,std_p_red_db,trials");
  bool diverged = false;
  for (const auto& r : rows) {
    csv.row(sci(r.frequency_hz), r.method, sci(r.mean_p_red_db), sci(r.std_p_red_db), r.trials);
    diverged = diverged || r.diverged;
  }
  write_meta(dir, "perturb", cfg, {{"frequencies", freqs}});
  out << "wrote " << rows.size() << " rows to " << (dir / "perturb.csv").string() << '\n';
  return diverged ? kExitDiverged : kExitOk;
}

int cmd_field(const ConfigFile& cfg, std::ostream& out) {
  if (cfg.field.iteration > cfg.settings.iterations)
    throw ConfigError("field: iteration " + std::to_string(cfg.field.iteration) +
                      " is outside [0, " + std::to_string(cfg.settings.iterations) + "]");
  const std::vector<MethodSpec> methods = {cfg.field.method};
  const FrequencyContext context(cfg.scenario, cfg.settings, methods, cfg.frequency_hz);
  RunOptions opts;
  opts.iterations = cfg.field.iteration;
  const RunResult r = run_adaptation(context, 0, opts);
  const fs::path dir = prepare_dir(cfg);
  CsvFile csv(dir / "field.csv", "x,y,z,re_up,im_up,re_ue,im_ue");
  const auto& pts = context.grid().points;
  for (std::size_t j = 0; j < pts.size(); ++j) {
    csv.row(sci(pts[j].x()), sci(pts[j].y()), sci(pts[j].z()), sci(r.u_p(j).real()),
            sci(r.u_p(j).imag()), sci(r.u_e(j).real()), sci(r.u_e(j).imag()));
  }
  write_meta(dir, "field", cfg,
             {{"iteration", r.iterations_run}, {"p_red_db", r.final_p_red_db()}});
  out << cfg.field.method.label() << " at iteration " << r.iterations_run << ": P_red "
      << r.final_p_red_db() << " dB\n";
  return r.diverged ? kExitDiverged : kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Kernel-interpolation spatial ANC simulator", "kianc"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", o.config_path, "INI config file (defaults: built-in setup)");
    sub->add_option("-o,--out", o.out_dir, "Output directory");
    sub->add_option("--freq", o.freq, "Frequency in Hz");
    sub->add_option("--iterations", o.iterations, "NLMS iterations");
    sub->add_option("--seed", o.seed, "Root seed");
    sub->add_option("--cache-dir", o.cache_dir, "Directory for interpolation-matrix sidecars");
    sub->add_option("-j,--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };
  auto* conv = app.add_subcommand("convergence", "P_red trajectory per method at one frequency");
  auto* sweep = app.add_subcommand("sweep", "Final P_red per method over a frequency grid");
  auto* perturb = app.add_subcommand("perturb", "Robustness to primary-source position errors");
  auto* field = app.add_subcommand("field", "Primary and total field on the evaluation grid");
  for (auto* sub : {conv, sweep, perturb, field}) common(sub);
  for (auto* sub : {sweep, perturb}) {
    sub->add_option("--f-start", o.f_start, "Sweep start (Hz)");
    sub->add_option("--f-stop", o.f_stop, "Sweep stop (Hz)");
    sub->add_option("--f-step", o.f_step, "Sweep step (Hz)");
  }
  perturb->add_option("--trials", o.trials, "Number of perturbation trials");
  perturb->add_option("--freqs", o.freqs, "Comma-separated frequencies (Hz)");
  field->add_option("--iteration", o.field_iteration, "Snapshot iteration");
  field->add_option("--method", o.field_method, "Method, e.g. IndividualKI:10");

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "kianc: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    const ConfigFile cfg = resolve(o);
    if (conv->parsed()) return cmd_convergence(cfg, o.jobs, out);
    if (sweep->parsed()) return cmd_sweep(cfg, o.jobs, out);
    if (perturb->parsed()) return cmd_perturb(cfg, o.jobs, out);
    return cmd_field(cfg, out);
  } catch (const ConfigError& e) {
    err << "kianc: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "kianc: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace kianc
