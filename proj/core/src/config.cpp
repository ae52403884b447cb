#include "bdf/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bdf/errors.hpp"

namespace bdf {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError("config: " + path + ": " + what);
}

void reject_unknown(const json& j, const std::string& path,
                    const std::set<std::string>& known) {
  for (const auto& [key, _] : j.items())
    if (!known.contains(key)) fail(path + "." + key, "unknown key");
}

const json& require(const json& j, const std::string& path,
                    const std::string& key) {
  if (!j.contains(key)) fail(path + "." + key, "missing required key");
  return j.at(key);
}

double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& path) {
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<int>();
}

std::uint64_t get_seed(const json& j, const std::string& path) {
  if (!j.is_number_unsigned() && !j.is_number_integer())
    fail(path, "expected an integer seed");
  const auto v = j.get<std::int64_t>();
  if (v < 0) fail(path, "seed must be nonnegative");
  return static_cast<std::uint64_t>(v);
}

bool get_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected a boolean");
  return j.get<bool>();
}

std::string get_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

Eigen::Vector3d get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3)
    fail(path, "expected an array of 3 numbers");
  Eigen::Vector3d v;
  for (int c = 0; c < 3; ++c) v[c] = get_number(j.at(c), path);
  return v;
}

NucleusConfig parse_nucleus(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j, path, {"z", "m", "sigma", "x0", "v0"});
  NucleusConfig n;
  n.z = get_number(require(j, path, "z"), path + ".z");
  if (!(n.z > 0.0)) fail(path + ".z", "must be positive");
  n.m = get_number(require(j, path, "m"), path + ".m");
  if (!(n.m > 0.0)) fail(path + ".m", "must be positive");
  n.sigma = get_number(require(j, path, "sigma"), path + ".sigma");
  if (!(n.sigma > 0.0)) fail(path + ".sigma", "must be positive");
  n.x0 = get_vec3(require(j, path, "x0"), path + ".x0");
  if (j.contains("v0")) n.v0 = get_vec3(j.at("v0"), path + ".v0");
  return n;
}

InitialStateConfig parse_initial(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  reject_unknown(j, path, {"kind", "q", "epsilon", "seed"});
  InitialStateConfig s;
  s.kind = get_string(require(j, path, "kind"), path + ".kind");
  if (s.kind != "vacuum" && s.kind != "charged" && s.kind != "perturbed")
    fail(path + ".kind", "must be one of vacuum|charged|perturbed");
  if (j.contains("q")) {
    s.q = get_int(j.at("q"), path + ".q");
    if (s.q < 0) fail(path + ".q", "must be nonnegative");
  }
  if (j.contains("epsilon")) s.epsilon = get_number(j.at("epsilon"), path + ".epsilon");
  if (j.contains("seed")) s.seed = get_seed(j.at("seed"), path + ".seed");
  if (s.kind == "charged" && !j.contains("q"))
    fail(path + ".q", "missing required key for kind=charged");
  if (s.kind == "perturbed" && !j.contains("epsilon"))
    fail(path + ".epsilon", "missing required key for kind=perturbed");
  return s;
}

}  // namespace

bool SimConfig::alpha_outside_regime() const {
  return alpha >= 4.0 / std::numbers::pi;
}

SimConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("$", "top level must be an object");
  reject_unknown(j, "$",
                 {"alpha", "lambda_cutoff", "n_per_axis", "dt", "t_final",
                  "nuclei", "initial_state", "integrator", "output",
                  "constants"});

  SimConfig cfg;
  cfg.alpha = get_number(require(j, "$", "alpha"), "$.alpha");
  if (cfg.alpha < 0.0) fail("$.alpha", "must be nonnegative");
  cfg.lambda_cutoff =
      get_number(require(j, "$", "lambda_cutoff"), "$.lambda_cutoff");
  if (!(cfg.lambda_cutoff > 0.0)) fail("$.lambda_cutoff", "must be positive");
  cfg.n_per_axis = get_int(require(j, "$", "n_per_axis"), "$.n_per_axis");
  if (cfg.n_per_axis < 2) fail("$.n_per_axis", "must be >= 2");
  cfg.dt = get_number(require(j, "$", "dt"), "$.dt");
  if (!(cfg.dt > 0.0)) fail("$.dt", "must be positive");
  cfg.t_final = get_number(require(j, "$", "t_final"), "$.t_final");
  if (!(cfg.t_final > 0.0)) fail("$.t_final", "must be positive");

  if (j.contains("nuclei")) {
    const json& jn = j.at("nuclei");
    if (!jn.is_array()) fail("$.nuclei", "expected an array");
    for (std::size_t i = 0; i < jn.size(); ++i)
      cfg.nuclei.push_back(
          parse_nucleus(jn.at(i), "$.nuclei[" + std::to_string(i) + "]"));
  }

  cfg.initial_state =
      parse_initial(require(j, "$", "initial_state"), "$.initial_state");

  if (j.contains("integrator")) {
    const json& ji = j.at("integrator");
    if (!ji.is_object()) fail("$.integrator", "expected an object");
    reject_unknown(ji, "$.integrator", {"retraction", "retraction_period"});
    if (ji.contains("retraction"))
      cfg.integrator.retraction =
          get_bool(ji.at("retraction"), "$.integrator.retraction");
    if (ji.contains("retraction_period")) {
      cfg.integrator.retraction_period =
          get_int(ji.at("retraction_period"), "$.integrator.retraction_period");
      if (cfg.integrator.retraction_period < 1)
        fail("$.integrator.retraction_period", "must be >= 1");
    }
  }

  if (j.contains("output")) {
    const json& jo = j.at("output");
    if (!jo.is_object()) fail("$.output", "expected an object");
    reject_unknown(jo, "$.output", {"path", "sample_every"});
    if (jo.contains("path"))
      cfg.output.path = get_string(jo.at("path"), "$.output.path");
    if (jo.contains("sample_every")) {
      cfg.output.sample_every =
          get_int(jo.at("sample_every"), "$.output.sample_every");
      if (cfg.output.sample_every < 1)
        fail("$.output.sample_every", "must be >= 1");
    }
  }

  if (j.contains("constants")) {
    const json& jc = j.at("constants");
    if (!jc.is_object()) fail("$.constants", "expected an object");
    reject_unknown(jc, "$.constants", {"c_e", "samples", "seed"});
    if (jc.contains("c_e")) {
      cfg.constants.c_e = get_number(jc.at("c_e"), "$.constants.c_e");
      if (!(cfg.constants.c_e > 1.0)) fail("$.constants.c_e", "must be > 1");
    }
    if (jc.contains("samples")) {
      cfg.constants.samples = get_int(jc.at("samples"), "$.constants.samples");
      if (cfg.constants.samples < 1)
        fail("$.constants.samples", "must be >= 1");
    }
    if (jc.contains("seed"))
      cfg.constants.seed = get_seed(jc.at("seed"), "$.constants.seed");
  }

  return cfg;
}

SimConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace bdf
