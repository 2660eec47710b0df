#include "kianc/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "kianc/rng.hpp"

namespace kianc {
namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"scenario", {"preset", "primary_source", "sound_speed", "primary_amplitude"}},
      {"kernel", {"lambda", "mc_samples"}},
      {"nlms", {"mu0", "epsilon"}},
      {"run",
       {"frequency_hz", "iterations", "checkpoint_every", "snr_db", "excitation",
        "model_error_std", "grid"}},
      {"methods", {"list"}},
      {"sweep", {"f_start", "f_stop", "f_step"}},
      {"perturb", {"radial_std_m", "azimuth_std_deg", "zenith_std_deg", "trials",
                   "frequencies"}},
      {"field", {"iteration", "method"}},
      {"seeds", {"root"}},
      {"output", {"directory", "cache_dir"}},
  };
  return keys;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_real(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v == "inf" || v == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw ConfigError("config: '" + key + "' expects a number, got '" + value + "'");
  return out;
}

std::uint64_t to_count(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  std::size_t used = 0;
  unsigned long long out = 0;
  try {
    if (!v.empty() && v[0] != '-') out = std::stoull(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != v.size())
    throw ConfigError("config: '" + key + "' expects a non-negative integer, got '" +
                      value + "'");
  return out;
}

Vec3 to_vec3(const std::string& key, const std::string& value) {
  const auto parts = split(value, ',');
  if (parts.size() != 3)
    throw ConfigError("config: '" + key + "' expects three comma-separated numbers");
  return Vec3(to_real(key, parts[0]), to_real(key, parts[1]), to_real(key, parts[2]));
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

std::vector<double> parse_real_list(const std::string& text) {
  std::vector<double> out;
  for (const auto& part : split(text, ',')) out.push_back(to_real("list", part));
  return out;
}

void ConfigFile::validate() const {
  try {
    scenario.validate();
    settings.validate();
    Wavenumber::from_frequency(frequency_hz, scenario.sound_speed);
    frequency_grid(sweep.start_hz, sweep.stop_hz, sweep.step_hz);
    if (perturb.std_dev.radial_m < 0 || perturb.std_dev.azimuth_deg < 0 ||
        perturb.std_dev.zenith_deg < 0)
      throw std::invalid_argument("perturb: standard deviations must be >= 0");
    if (perturb.trials == 0) throw std::invalid_argument("perturb: trials must be >= 1");
    for (double f : perturb.frequencies_hz)
      if (!(f > 0.0)) throw std::invalid_argument("perturb: frequencies must be positive");
    if (methods.empty()) throw std::invalid_argument("methods: list is empty");
    if (scenario.num_reference != 1)
      throw std::invalid_argument("scenario: only R = 1 is supported");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ConfigFile parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: " + std::string(e.what()));
  }

  for (const auto& [section, body] : tree) {
    const auto it = known_keys().find(section);
    if (it == known_keys().end()) {
      if (body.empty() && !body.data().empty())
        throw ConfigError("config: key '" + section + "' outside of a section");
      throw ConfigError("config: unknown section [" + section + "]");
    }
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key))
        throw ConfigError("config: unknown key '" + key + "' in [" + section + "]");
    }
  }

  auto get = [&](const std::string& section, const std::string& key)
      -> std::optional<std::string> {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "." + key, '.'));
    if (!v) return std::nullopt;
    return trim(*v);
  };

  ConfigFile cfg;
  if (auto v = get("scenario", "preset"); v && *v != "default")
    throw ConfigError("config: unknown scenario preset '" + *v + "'");
  if (auto v = get("scenario", "primary_source")) cfg.scenario.primary_source = to_vec3("primary_source", *v);
  if (auto v = get("scenario", "sound_speed")) cfg.scenario.sound_speed = to_real("sound_speed", *v);
  if (auto v = get("scenario", "primary_amplitude"))
    cfg.settings.primary_amplitude = to_real("primary_amplitude", *v);

  if (auto v = get("kernel", "lambda")) cfg.settings.lambda = to_real("lambda", *v);
  if (auto v = get("kernel", "mc_samples")) cfg.settings.mc_samples = to_count("mc_samples", *v);

  if (auto v = get("nlms", "mu0")) cfg.settings.nlms.mu0 = to_real("mu0", *v);
  if (auto v = get("nlms", "epsilon")) cfg.settings.nlms.epsilon = to_real("epsilon", *v);

  if (auto v = get("run", "frequency_hz")) cfg.frequency_hz = to_real("frequency_hz", *v);
  if (auto v = get("run", "iterations")) cfg.settings.iterations = to_count("iterations", *v);
  if (auto v = get("run", "checkpoint_every"))
    cfg.settings.checkpoint_every = to_count("checkpoint_every", *v);
  if (auto v = get("run", "snr_db")) cfg.settings.snr_db = to_real("snr_db", *v);
  if (auto v = get("run", "excitation")) {
    if (*v == "gaussian") cfg.settings.excitation = Excitation::kGaussian;
    else if (*v == "constant") cfg.settings.excitation = Excitation::kConstant;
    else throw ConfigError("config: excitation must be 'gaussian' or 'constant'");
  }
  if (auto v = get("run", "model_error_std"))
    cfg.settings.model_error_std = to_real("model_error_std", *v);
  if (auto v = get("run", "grid")) {
    const auto parts = split(*v, ',');
    if (parts.size() != 3) throw ConfigError("config: 'grid' expects nx, ny, nz");
    cfg.settings.grid = {to_count("grid", parts[0]), to_count("grid", parts[1]),
                         to_count("grid", parts[2])};
  }

  if (auto v = get("methods", "list")) {
    cfg.methods.clear();
    try {
      for (const auto& m : split(*v, ',')) cfg.methods.push_back(MethodSpec::parse(m));
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (auto v = get("sweep", "f_start")) cfg.sweep.start_hz = to_real("f_start", *v);
  if (auto v = get("sweep", "f_stop")) cfg.sweep.stop_hz = to_real("f_stop", *v);
  if (auto v = get("sweep", "f_step")) cfg.sweep.step_hz = to_real("f_step", *v);

  if (auto v = get("perturb", "radial_std_m")) cfg.perturb.std_dev.radial_m = to_real("radial_std_m", *v);
  if (auto v = get("perturb", "azimuth_std_deg"))
    cfg.perturb.std_dev.azimuth_deg = to_real("azimuth_std_deg", *v);
  if (auto v = get("perturb", "zenith_std_deg"))
    cfg.perturb.std_dev.zenith_deg = to_real("zenith_std_deg", *v);
  if (auto v = get("perturb", "trials")) cfg.perturb.trials = to_count("trials", *v);
  if (auto v = get("perturb", "frequencies")) {
    cfg.perturb.frequencies_hz.clear();
    for (const auto& part : split(*v, ','))
      cfg.perturb.frequencies_hz.push_back(to_real("frequencies", part));
  }

  if (auto v = get("field", "iteration")) cfg.field.iteration = to_count("iteration", *v);
  if (auto v = get("field", "method")) {
    try {
      cfg.field.method = MethodSpec::parse(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config: ") + e.what());
    }
  }

  if (auto v = get("seeds", "root")) cfg.settings.seed = to_count("root", *v);
  if (auto v = get("output", "directory")) cfg.output_dir = *v;
  if (auto v = get("output", "cache_dir"); v && !v->empty()) cfg.settings.cache_dir = *v;

  cfg.validate();
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file not found or unreadable: " + path.string());
  return parse_config(in);
}

nlohmann::json to_json(const ConfigFile& cfg) {
  using nlohmann::json;
  auto vec = [](const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); };
  auto points = [&](const PointList& list) {
    json a = json::array();
    for (const auto& p : list) a.push_back(vec(p));
    return a;
  };
  json methods = json::array();
  for (const auto& m : cfg.methods) methods.push_back(m.label());

  const Settings& s = cfg.settings;
  json j;
  j["scenario"] = {
      {"secondary_sources", points(cfg.scenario.secondary_sources)},
      {"error_mics", points(cfg.scenario.error_mics)},
      {"primary_source", vec(cfg.scenario.primary_source)},
      {"region", {{"center", vec(cfg.scenario.region.center)},
                  {"half_extents", vec(cfg.scenario.region.half_extents)}}},
      {"num_reference", cfg.scenario.num_reference},
      {"sound_speed", cfg.scenario.sound_speed},
      {"primary_amplitude", {s.primary_amplitude.real(), s.primary_amplitude.imag()}},
  };
  j["kernel"] = {{"lambda", s.lambda}, {"mc_samples", s.mc_samples}};
  j["nlms"] = {{"mu0", s.nlms.mu0}, {"epsilon", s.nlms.epsilon}};
  j["run"] = {
      {"frequency_hz", cfg.frequency_hz},
      {"iterations", s.iterations},
      {"checkpoint_every", s.checkpoint_every},
      {"snr_db", std::isfinite(s.snr_db) ? json(s.snr_db) : json("inf")},
      {"excitation", s.excitation == Excitation::kGaussian ? "gaussian" : "constant"},
      {"model_error_std", s.model_error_std},
      {"grid", {s.grid.nx, s.grid.ny, s.grid.nz}},
  };
  j["methods"] = methods;
  j["sweep"] = {{"f_start", cfg.sweep.start_hz},
                {"f_stop", cfg.sweep.stop_hz},
                {"f_step", cfg.sweep.step_hz}};
  j["perturb"] = {{"radial_std_m", cfg.perturb.std_dev.radial_m},
                  {"azimuth_std_deg", cfg.perturb.std_dev.azimuth_deg},
                  {"zenith_std_deg", cfg.perturb.std_dev.zenith_deg},
                  {"trials", cfg.perturb.trials},
                  {"frequencies", cfg.perturb.frequencies_hz}};
  j["field"] = {{"iteration", cfg.field.iteration}, {"method", cfg.field.method.label()}};
  j["seeds"] = {{"root", s.seed}};
  j["output"] = {{"directory", cfg.output_dir},
                 {"cache_dir", s.cache_dir ? json(*s.cache_dir) : json(nullptr)}};
  return j;
}

std::string config_hash(const ConfigFile& cfg) {
  nlohmann::json j = to_json(cfg);
  j.erase("output");
  return hex64(fnv1a64(j.dump()));
}

}  // namespace kianc
