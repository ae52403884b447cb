#include <CLI11.hpp>
#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <string>

#include "bdf/config.hpp"
#include "bdf/dynamics.hpp"
#include "bdf/io.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitSuite = 2;
constexpr int kExitDivergence = 3;

bdf::InitialStateSpec initial_spec(const bdf::SimConfig& cfg) {
  bdf::InitialStateSpec spec;
  if (cfg.initial_state.kind == "vacuum") {
    spec.kind = bdf::InitialStateSpec::Kind::vacuum;
  } else if (cfg.initial_state.kind == "charged") {
    spec.kind = bdf::InitialStateSpec::Kind::charged;
  } else {
    spec.kind = bdf::InitialStateSpec::Kind::perturbed;
  }
  spec.q = cfg.initial_state.q;
  spec.epsilon = cfg.initial_state.epsilon;
  spec.seed = cfg.initial_state.seed;
  return spec;
}

std::vector<bdf::NucleusState> nuclei_from(const bdf::SimConfig& cfg) {
  std::vector<bdf::NucleusState> out;
  for (const auto& n : cfg.nuclei)
    out.push_back(bdf::NucleusState{n.z, n.m, bdf::GaussianShape{n.sigma},
                                    n.x0, n.v0});
  return out;
}

void warn_regime(const bdf::SimConfig& cfg) {
  if (cfg.alpha_outside_regime())
    std::fprintf(stderr,
                 "warning: alpha = %g is outside the proven global-existence "
                 "regime (alpha < 4/pi); the run proceeds anyway\n",
                 cfg.alpha);
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir) {
  const bdf::SimConfig cfg = bdf::load_config_file(config_path);
  warn_regime(cfg);

  auto lattice = bdf::build_lattice(cfg.lambda_cutoff, cfg.n_per_axis);
  const bdf::SystemState s0 = bdf::build_initial_state(
      initial_spec(cfg), lattice, nuclei_from(cfg), cfg.alpha);

  bdf::SimulateOptions opts;
  opts.sample_every = cfg.output.sample_every;
  opts.retraction = cfg.integrator.retraction;
  opts.retraction_period = cfg.integrator.retraction_period;
  const bdf::Trajectory traj =
      bdf::simulate(s0, cfg.dt, cfg.t_final, cfg.alpha, opts);

  fs::create_directories(out_dir);
  const fs::path csv = fs::path(out_dir) / cfg.output.path;
  bdf::write_trajectory_csv(csv.string(), traj);

  const auto& first = traj.rows.front();
  const auto& last = traj.rows.back();
  ordered_json summary;
  summary["steps"] =
      static_cast<long long>(std::llround((last.t - first.t) / cfg.dt));
  summary["t_final"] = last.t;
  summary["energy_initial"] = first.energy;
  summary["energy_final"] = last.energy;
  summary["energy_drift_rel"] = std::abs(last.energy - first.energy) /
                                std::max(1.0, std::abs(first.energy));
  summary["charge_initial"] = first.charge_tr_q3;
  summary["charge_final"] = last.charge_tr_q3;
  summary["charge_drift_abs"] =
      std::abs(last.charge_tr_q3 - first.charge_tr_q3);
  summary["projector_residual_final"] = last.projector_residual;
  summary["hs_norm_final"] = last.hs_norm_q;
  summary["aborted"] = traj.aborted;
  if (traj.aborted) summary["abort_reason"] = traj.abort_reason;
  std::ofstream((fs::path(out_dir) / "summary.json").string())
      << summary.dump(2) << "\n";

  std::printf("wrote %s (%zu rows)\n", csv.string().c_str(), traj.rows.size());
  std::printf("energy drift (rel): %.3e  charge drift: %.3e  residual: %.3e\n",
              summary["energy_drift_rel"].get<double>(),
              summary["charge_drift_abs"].get<double>(),
              last.projector_residual);
  if (traj.aborted) {
    std::fprintf(stderr, "divergence guard: %s\n", traj.abort_reason.c_str());
    return kExitDivergence;
  }
  return kExitOk;
}

struct SuiteRunner {
  int failures = 0;
  std::string first_failure;

  void check(const std::string& name, double measured, double bound,
             bool pass) {
    std::printf("%s %-46s measured=%.6e bound=%.6e\n", pass ? "PASS" : "FAIL",
                name.c_str(), measured, bound);
    if (!pass) {
      ++failures;
      if (first_failure.empty()) first_failure = name;
    }
  }
  void leq(const std::string& name, double measured, double bound) {
    check(name, measured, bound, measured <= bound);
  }
};

int cmd_check(const std::string& config_path, const std::string& suite) {
  const bdf::SimConfig cfg = bdf::load_config_file(config_path);
  warn_regime(cfg);
  SuiteRunner r;

  if (suite == "invariants") {
    auto lat = bdf::build_lattice(cfg.lambda_cutoff, cfg.n_per_axis);
    const auto nuclei = nuclei_from(cfg);
    const bdf::SystemState s0 =
        bdf::build_initial_state(initial_spec(cfg), lat, nuclei, cfg.alpha);

    double worst = 0.0;
    for (const auto& p : lat->points()) {
      const auto p0 = bdf::p0_symbol(p);
      worst = std::max(worst, (p0 * p0 - p0).norm());
    }
    r.leq("p0_symbol idempotency", worst, 1e-14);
    r.leq("free commutator [D0,P0]",
          bdf::hs_norm(bdf::commutator(bdf::free_dirac_op(lat),
                                       bdf::vacuum_projector_op(lat))),
          1e-13);
    const bdf::KernelOperator q = bdf::random_hs_sample(lat, 1.0, 1);
    r.leq("random sample hermiticity", bdf::hermiticity_defect(q), 1e-13);
    r.leq("mean-field hermiticity",
          bdf::hermiticity_defect(
              bdf::assemble_mean_field(q, nuclei, cfg.alpha)),
          1e-12);
    r.leq("bdf_rhs hermiticity",
          bdf::hermiticity_defect(bdf::bdf_rhs(q, nuclei, cfg.alpha)), 1e-12);
    r.leq("initial projector residual", bdf::projector_residual(s0.q), 1e-10);
    r.leq("initial split-trace vs tr Q^3",
          std::abs(bdf::p0_split_trace(s0.q) - bdf::charge_tr_q3(s0.q)), 1e-9);
    const double slack = bdf::coercivity_slack(s0, cfg.alpha);
    r.check("initial coercivity slack", slack, -1e-9, slack >= -1e-9);
    double leak = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
      const bdf::KernelOperator sample =
          bdf::random_hs_sample(lat, 1.0, 10 + s);
      const auto v = bdf::direct_potential_op(bdf::density_of(sample));
      leak = std::max(leak,
                      bdf::coulomb_norm(bdf::density_of(bdf::commutator(
                          v.op, bdf::vacuum_projector_op(lat)))));
    }
    r.leq("commutator-density annihilation", leak, 1e-12);
    const bdf::ChargeDensity rho_a = bdf::density_of(q);
    const bdf::ChargeDensity rho_b =
        bdf::density_of(bdf::random_hs_sample(lat, 2.0, 2));
    r.leq("Coulomb Cauchy-Schwarz",
          std::abs(bdf::coulomb_inner(rho_a, rho_b)) -
              bdf::coulomb_norm(rho_a) * bdf::coulomb_norm(rho_b),
          1e-12);
  } else if (suite == "oracle") {
    // pinned tiny instances, independent quadrature routes
    {
      auto lat7 = bdf::build_lattice(2.0, 7);
      const bdf::ChargeDensity rho1 =
          bdf::gaussian_density(lat7, bdf::GaussianShape{0.5});
      const bdf::ChargeDensity rho2 = bdf::gaussian_density(
          lat7, bdf::GaussianShape{0.6}, 1.0, {1.0, 0.0, 0.0});
      const double lattice_val = bdf::coulomb_inner(rho1, rho2).real();
      const double ref = bdf::oracle::gaussian_pair_energy(0.5, 0.6, 1.0);
      r.leq("coulomb_inner vs radial oracle (n=7)",
            std::abs(lattice_val - ref) / std::abs(ref), 0.02);
    }
    {
      auto lat3 = bdf::build_lattice(1.0, 3);
      Eigen::VectorXcd c(4 * lat3->size());
      for (int p = 0; p < lat3->size(); ++p)
        c.segment<4>(4 * p) = std::exp(-lat3->point(p).squaredNorm()) *
                              Eigen::Vector4cd(1.0, 0.5, 0.25, 0.0);
      c /= c.norm();
      const bdf::KernelOperator q(lat3, c * c.adjoint());
      const double lattice_val = bdf::exchange_energy(q);
      const double ref = bdf::oracle::rank_one_exchange_energy(*lat3, c, 24);
      r.leq("exchange_op vs position-space oracle (n=3)",
            std::abs(lattice_val - ref) / std::abs(ref), 0.05);
    }
    {
      auto lat = bdf::build_lattice(2.0, 5);
      const auto& diff = lat->difference();
      const double c0 = diff.weight(diff.zero_index()) / lat->spacing();
      const double ref = bdf::oracle::unit_cube_inverse_square(1e-11);
      r.leq("k=0 Coulomb cell vs spherical oracle", std::abs(c0 - ref) / ref,
            1e-8);
    }
    {
      auto lat7 = bdf::build_lattice(2.0, 7);
      const auto v = bdf::direct_potential_op(
          bdf::gaussian_density(lat7, bdf::GaussianShape{0.5}));
      std::complex<double> v0 = 0.0;
      const double h3 = lat7->cell_volume();
      for (int k = 0; k < lat7->difference().size(); ++k)
        v0 += std::pow(2.0 * std::numbers::pi, -1.5) * h3 * v.vhat[k];
      const double ref = bdf::oracle::gaussian_potential(0.5, 0.0);
      r.leq("gaussian potential at origin vs radial oracle",
            std::abs(v0.real() - ref) / ref, 0.10);
    }
  } else if (suite == "order") {
    auto lat = bdf::build_lattice(cfg.lambda_cutoff, cfg.n_per_axis);
    const bdf::SystemState s0 = bdf::build_initial_state(
        initial_spec(cfg), lat, nuclei_from(cfg), cfg.alpha);
    const double dt = cfg.dt;
    const double t_end = 40.0 * dt;
    auto final_q = [&](double step) {
      bdf::SystemState s = s0;
      const int n = static_cast<int>(std::llround(t_end / step));
      for (int i = 0; i < n; ++i) s = bdf::rk4_step(s, step, cfg.alpha);
      return s.q.matrix();
    };
    const Eigen::MatrixXcd q1 = final_q(dt);
    const Eigen::MatrixXcd q2 = final_q(dt / 2.0);
    const Eigen::MatrixXcd q4 = final_q(dt / 4.0);
    const double slope = std::log2((q1 - q2).norm() / (q2 - q4).norm());
    r.check("RK4 Richardson slope", slope, 4.0, std::abs(slope - 4.0) <= 0.3);

    auto lat3 = bdf::build_lattice(1.0, 3);
    bdf::InitialStateSpec free_spec;
    free_spec.kind = bdf::InitialStateSpec::Kind::perturbed;
    free_spec.epsilon = 0.2;
    free_spec.seed = 5;
    bdf::SystemState fs = bdf::build_initial_state(free_spec, lat3, {}, 0.0);
    bdf::SystemState cur = fs;
    for (int i = 0; i < 100; ++i) cur = bdf::rk4_step(cur, 1e-3, 0.0);
    const double err =
        (cur.q.matrix() -
         bdf::oracle::exact_free_evolution(*lat3, fs.q.matrix(), 0.1))
            .norm();
    r.leq("free evolution vs symbol phases", err, 1e-10);
  } else {
    std::fprintf(stderr, "unknown suite '%s' (invariants|oracle|order)\n",
                 suite.c_str());
    return kExitConfig;
  }

  if (r.failures > 0) {
    std::fprintf(stderr, "suite '%s' failed: first failing property: %s\n",
                 suite.c_str(), r.first_failure.c_str());
    return kExitSuite;
  }
  return kExitOk;
}

int cmd_constants(const std::string& config_path) {
  const bdf::SimConfig cfg = bdf::load_config_file(config_path);
  warn_regime(cfg);
  auto lattice = bdf::build_lattice(cfg.lambda_cutoff, cfg.n_per_axis);
  const auto nuclei = nuclei_from(cfg);
  const bdf::SystemState s0 =
      bdf::build_initial_state(initial_spec(cfg), lattice, nuclei, cfg.alpha);
  const double qi_norm = bdf::h_norm(s0.q);

  const bdf::ConstantReport rep = bdf::estimate_constants(
      lattice, nuclei, cfg.alpha, cfg.constants.c_e, qi_norm,
      cfg.constants.samples, cfg.constants.seed);

  std::printf("C_f              = %.12g\n", rep.c_f);
  std::printf("C_F              = %.12g\n", rep.c_big_f);
  std::printf("C_1              = %.12g\n", rep.c1);
  std::printf("C_2              = %.12g\n", rep.c2);
  std::printf("C_3              = %.12g\n", rep.c3);
  std::printf("kappa            = %.12g\n", rep.kappa);
  std::printf("C^e              = %.12g\n", rep.c_e);
  std::printf("||Q_I||          = %.12g\n", rep.qi_norm);
  std::printf("samples          = %d\n", rep.samples);
  std::printf("tau_admissible   = %.12g%s\n", rep.tau_admissible,
              rep.tau2_unconstrained
                  ? "  (inequality 2 unconstrained: degenerate inputs)"
                  : "");
  std::printf("t_final respects tau: %s (t_final=%g)\n",
              cfg.t_final <= rep.tau_admissible ? "yes" : "no", cfg.t_final);
  std::printf("dt respects tau:      %s (dt=%g)\n",
              cfg.dt <= rep.tau_admissible ? "yes" : "no", cfg.dt);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "momentum-space simulator of cutoff relativistic mean-field electron "
      "dynamics coupled to classical nuclei"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out", suite = "invariants";

  CLI::App* sim = app.add_subcommand("simulate", "integrate and write CSV");
  sim->add_option("--config", config_path, "JSON configuration")->required();
  sim->add_option("--out", out_dir, "output directory");

  CLI::App* chk = app.add_subcommand("check", "run a property suite");
  chk->add_option("--config", config_path, "JSON configuration")->required();
  chk->add_option("--suite", suite, "invariants|oracle|order");

  CLI::App* con = app.add_subcommand("constants", "estimate model constants");
  con->add_option("--config", config_path, "JSON configuration")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(config_path, out_dir);
    if (chk->parsed()) return cmd_check(config_path, suite);
    if (con->parsed()) return cmd_constants(config_path);
  } catch (const bdf::NonFiniteError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const bdf::ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
