#ifndef BDF_CONFIG_HPP
#define BDF_CONFIG_HPP

#include <Eigen/Core>

#include "bdf/errors.hpp"
#include <cstdint>
#include <string>
#include <vector>

namespace bdf {

struct NucleusConfig {
  double z = 1.0;
  double m = 1.0;
  double sigma = 1.0;
  Eigen::Vector3d x0 = Eigen::Vector3d::Zero();
  Eigen::Vector3d v0 = Eigen::Vector3d::Zero();
};

struct InitialStateConfig {
  std::string kind = "vacuum";  // vacuum | charged | perturbed
  int q = 0;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
};

struct IntegratorConfig {
  bool retraction = false;
  int retraction_period = 10;
};

struct OutputConfig {
  std::string path = "trajectory.csv";
  int sample_every = 10;
};

struct ConstantsConfig {
  double c_e = 2.0;
  int samples = 32;
  std::uint64_t seed = 1;
};

struct SimConfig {
  double alpha = 0.0;
  double lambda_cutoff = 1.0;
  int n_per_axis = 3;
  double dt = 1e-3;
  double t_final = 1.0;
  std::vector<NucleusConfig> nuclei;
  InitialStateConfig initial_state;
  IntegratorConfig integrator;
  OutputConfig output;
  ConstantsConfig constants;

  // alpha >= 4/pi leaves the proven global-existence regime; the run is
  // still allowed but flagged.
  bool alpha_outside_regime() const;
};

// Parses and fully validates a JSON document. Unknown keys are rejected;
// every error message carries the offending key path.
SimConfig parse_config(const std::string& text);
SimConfig load_config_file(const std::string& path);

}  // namespace bdf

#endif
