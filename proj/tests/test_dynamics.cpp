#include <doctest.h>

#include <cmath>

#include "bdf/dynamics.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bdf;

namespace {

std::shared_ptr<const MomentumLattice> small_lattice() {
  static auto lat = build_lattice(1.0, 3);
  return lat;
}

std::vector<NucleusState> two_nuclei(double vy = 0.05) {
  NucleusState a{1.0, 100.0, GaussianShape{0.5}, {-1, 0, 0}, {0, vy, 0}};
  NucleusState b{1.0, 100.0, GaussianShape{0.5}, {1, 0, 0}, {0, -vy, 0}};
  return {a, b};
}

SystemState perturbed_state(std::shared_ptr<const MomentumLattice> lat,
                            std::vector<NucleusState> nuclei,
                            double eps = 0.2, double alpha = 0.1) {
  InitialStateSpec spec;
  spec.kind = InitialStateSpec::Kind::perturbed;
  spec.epsilon = eps;
  spec.seed = 12;
  return build_initial_state(spec, std::move(lat), std::move(nuclei), alpha);
}

}  // namespace

TEST_CASE("build_initial_state: vacuum, charged, perturbed invariants") {
  auto lat = small_lattice();
  const auto nuclei = two_nuclei();

  SUBCASE("vacuum") {
    const SystemState s = build_initial_state({}, lat, nuclei);
    CHECK(hs_norm(s.q) == 0.0);
    CHECK(charge_tr_q3(s.q) == 0.0);
    CHECK(total_energy(s, 0.1) ==
          doctest::Approx(0.5 * 100.0 * (0.05 * 0.05) * 2 +
                          0.1 * coulomb_inner(
                                    gaussian_density(lat, GaussianShape{0.5},
                                                     1.0, nuclei[0].x),
                                    gaussian_density(lat, GaussianShape{0.5},
                                                     1.0, nuclei[1].x))
                                    .real()));
  }

  SUBCASE("charged(1)") {
    InitialStateSpec spec;
    spec.kind = InitialStateSpec::Kind::charged;
    spec.q = 1;
    const SystemState s = build_initial_state(spec, lat, nuclei, 0.1);
    CHECK(charge_tr_q3(s.q) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(projector_residual(s.q) <= 1e-10);
    CHECK(p0_split_trace(s.q) == doctest::Approx(1.0).epsilon(1e-8));
  }

  SUBCASE("charged beyond the positive subspace dimension throws") {
    InitialStateSpec spec;
    spec.kind = InitialStateSpec::Kind::charged;
    spec.q = 2 * lat->size() + 1;
    CHECK_THROWS_AS(build_initial_state(spec, lat, nuclei, 0.1), ConfigError);
  }

  SUBCASE("perturbed") {
    const SystemState s = perturbed_state(lat, nuclei, 0.1);
    CHECK(std::abs(charge_tr_q3(s.q)) <= 1e-8);
    CHECK(projector_residual(s.q) <= 1e-10);
    CHECK(hs_norm(s.q) <= 2.2 * 0.1);
    CHECK(hs_norm(s.q) > 0.01);
  }
}

TEST_CASE("total_energy: vacuum with a resting nucleus vanishes") {
  auto lat = small_lattice();
  std::vector<NucleusState> one{
      NucleusState{1.0, 10.0, GaussianShape{0.5}, {0.4, 0, 0}, {0, 0, 0}}};
  const SystemState s{KernelOperator::zero(lat), one, 0.0};
  CHECK(total_energy(s, 0.2) == 0.0);
}

TEST_CASE("total_energy: vacuum pair is kinetic plus pair repulsion") {
  auto lat = build_lattice(2.0, 7);
  auto nuclei = two_nuclei(0.02);
  const SystemState s{KernelOperator::zero(lat), nuclei, 0.0};
  const double alpha = 0.1;
  const double kinetic = 0.5 * 100.0 * (0.02 * 0.02) * 2;
  const double pair = alpha * oracle::gaussian_pair_energy(0.5, 0.5, 2.0);
  CHECK(total_energy(s, alpha) ==
        doctest::Approx(kinetic + pair).epsilon(0.02));
}

TEST_CASE("rk4_step: first-order consistency with the joint right-hand side") {
  auto lat = small_lattice();
  const SystemState s = perturbed_state(lat, two_nuclei());
  const double alpha = 0.1;
  const KernelOperator f = bdf_rhs(s.q, s.nuclei, alpha);

  auto defect = [&](double dt) {
    const SystemState s1 = rk4_step(s, dt, alpha);
    return hs_norm(s1.q - s.q - dt * f);
  };
  const double d1 = defect(1e-2);
  const double d2 = defect(5e-3);
  CHECK(d1 / d2 == doctest::Approx(4.0).epsilon(0.3));
}

TEST_CASE("rk4_step: free evolution matches the symbol-phase oracle") {
  auto lat = small_lattice();
  SystemState s = perturbed_state(lat, {}, 0.3, 0.0);
  const double dt = 1e-3;
  const int nsteps = 100;
  SystemState cur = s;
  for (int i = 0; i < nsteps; ++i) cur = rk4_step(cur, dt, 0.0);
  const Eigen::MatrixXcd exact =
      oracle::exact_free_evolution(*lat, s.q.matrix(), nsteps * dt);
  CHECK((cur.q.matrix() - exact).norm() <= 1e-10);
}

TEST_CASE("rk4_step: fourth-order global error against the free oracle") {
  auto lat = small_lattice();
  const SystemState s = perturbed_state(lat, {}, 0.3, 0.0);
  const double t_final = 0.5;
  auto err_for = [&](double dt) {
    SystemState cur = s;
    const int n = static_cast<int>(std::llround(t_final / dt));
    for (int i = 0; i < n; ++i) cur = rk4_step(cur, dt, 0.0);
    return (cur.q.matrix() -
            oracle::exact_free_evolution(*lat, s.q.matrix(), t_final))
        .norm();
  };
  const double e1 = err_for(2e-2);
  const double e2 = err_for(1e-2);
  CHECK(e1 / e2 == doctest::Approx(16.0).epsilon(0.3));
}

TEST_CASE("rk4_step: retraction flag restores the projector manifold") {
  auto lat = small_lattice();
  const SystemState s = perturbed_state(lat, two_nuclei());
  const SystemState s1 = rk4_step(s, 1e-2, 0.1, true);
  CHECK(projector_residual(s1.q) <= 1e-12);
}

TEST_CASE("simulate: free nuclei move on straight lines") {
  auto lat = small_lattice();
  auto nuclei = two_nuclei(0.3);
  const SystemState s0{KernelOperator::zero(lat), nuclei, 0.0};
  const Trajectory traj = simulate(s0, 1e-2, 0.5, 0.0);
  REQUIRE(!traj.aborted);
  const auto& last = traj.rows.back();
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    const Eigen::Vector3d expect = nuclei[k].x + 0.5 * nuclei[k].v;
    for (int c = 0; c < 3; ++c)
      CHECK(last.nuclei[6 * k + c] ==
            doctest::Approx(expect[c]).epsilon(1e-10));
  }
}

TEST_CASE("simulate: conservation diagnostics over a short coupled run") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, two_nuclei());
  const double alpha = 0.1;
  SimulateOptions opts;
  opts.sample_every = 5;
  const Trajectory traj = simulate(s0, 1e-3, 0.05, alpha, opts);
  REQUIRE(!traj.aborted);
  REQUIRE(traj.rows.size() >= 3);
  const double e0 = traj.rows.front().energy;
  const double q0 = traj.rows.front().charge_tr_q3;
  for (const auto& row : traj.rows) {
    CHECK(std::abs(row.energy - e0) / std::max(1.0, std::abs(e0)) <= 1e-9);
    CHECK(std::abs(row.charge_tr_q3 - q0) <= 1e-8);
    CHECK(row.projector_residual <= 1e-8);
    CHECK(std::abs(row.split_trace_q - row.charge_tr_q3) <= 1e-9);
    CHECK(row.coercivity_slack >= -1e-9);
  }
}

TEST_CASE("simulate: divergence guard aborts with a reason") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, two_nuclei());
  SimulateOptions opts;
  opts.divergence_bound = 1e-6;
  const Trajectory traj = simulate(s0, 1e-3, 0.01, 0.1, opts);
  CHECK(traj.aborted);
  CHECK(!traj.abort_reason.empty());
}

TEST_CASE("coercivity and the S2 norm bound on projector states") {
  auto lat = small_lattice();
  for (double alpha : {0.05, 0.1, 0.5}) {
    const SystemState s = perturbed_state(lat, two_nuclei(), 0.2, alpha);
    CHECK(coercivity_slack(s, alpha) >= -1e-9);
    // tr_P0(D0 Q) >= ||Q||_S2^2 for projector differences
    const double lhs = p0_split_trace(compose(free_dirac_op(lat), s.q));
    CHECK(lhs >= hs_norm(s.q) * hs_norm(s.q) - 1e-8);
  }
}

TEST_CASE("picard_schauder: decoupled system converges immediately") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, two_nuclei(), 0.2, 0.0);
  const PicardResult res = picard_schauder(s0, 0.05, 1e-3, 0.0);
  CHECK(res.report.converged);
  CHECK(res.report.iterations == 1);
  // stepwise x += dt*v vs closed-form x + (n dt) v differ only in roundoff
  CHECK(res.report.distances.front() <= 1e-14);
}

TEST_CASE("picard_schauder: contraction and agreement with the coupled run") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, two_nuclei(), 0.3, 0.01);
  PicardOptions opts;
  opts.tol = 1e-13;
  opts.max_iter = 10;
  const PicardResult res = picard_schauder(s0, 0.05, 1e-3, 0.01, opts);
  CHECK(res.report.converged);
  REQUIRE(res.report.distances.size() >= 2);
  for (std::size_t i = 1; i < res.report.distances.size(); ++i) {
    if (res.report.distances[i] == 0.0) continue;
    CHECK(res.report.distances[i] < res.report.distances[i - 1]);
  }
  CHECK(res.report.fixed_vs_direct_positions <= 10.0 * opts.tol);
}

TEST_CASE("estimate_constants: admissibility inequalities and monotonicity") {
  auto lat = small_lattice();
  const auto nuclei = two_nuclei(0.05);
  const double alpha = 0.1, c_e = 2.0, qi = 0.5;

  const ConstantReport r4 = estimate_constants(lat, nuclei, alpha, c_e, qi, 4, 1);
  const ConstantReport r8 = estimate_constants(lat, nuclei, alpha, c_e, qi, 8, 1);
  CHECK(r8.c_big_f >= r4.c_big_f);

  CHECK(r8.c_f ==
        doctest::Approx(gaussian_gradient_coulomb_norm(GaussianShape{0.5})));
  CHECK(r8.tau_admissible > 0.0);
  CHECK(1.0 / (1.0 - r8.tau_admissible * r8.c_big_f) < c_e);
  for (const auto& n : nuclei)
    CHECK(alpha * (r8.tau_admissible / n.m) * r8.c_f * (c_e * qi + r8.c_f) <=
          n.v.norm() * (1.0 + 1e-12));

  SUBCASE("alpha = 0 collapses the interaction constants") {
    const ConstantReport r0 = estimate_constants(lat, nuclei, 0.0, c_e, qi, 4, 1);
    CHECK(r0.c2 == 0.0);
    CHECK(r0.c3 == 0.0);
    CHECK(r0.c_big_f == doctest::Approx(r0.c1).epsilon(1e-12));
  }

  SUBCASE("degenerate inputs leave inequality 2 unconstrained") {
    auto still = two_nuclei(0.0);
    const ConstantReport rd =
        estimate_constants(lat, still, alpha, c_e, 0.0, 2, 1);
    CHECK(rd.tau2_unconstrained);
    CHECK(rd.tau_admissible > 0.0);
  }

  CHECK_THROWS_AS(estimate_constants(lat, nuclei, alpha, 0.9, qi, 2, 1),
                  ConfigError);
}

TEST_CASE("lipschitz_divergence_probe: zero perturbation stays zero") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, two_nuclei());
  const GrowthReport rep =
      lipschitz_divergence_probe(s0, 0.0, 1e-3, 0.02, 0.1);
  CHECK(rep.h0 == 0.0);
  CHECK(rep.bounded);
  for (double h : rep.h) CHECK(h == 0.0);
}

TEST_CASE("lipschitz_divergence_probe: free evolution keeps the gap flat") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, {}, 0.3, 0.0);
  const GrowthReport rep =
      lipschitz_divergence_probe(s0, 1e-4, 1e-3, 0.05, 0.0);
  REQUIRE(rep.h0 > 0.0);
  for (double h : rep.h)
    CHECK(h == doctest::Approx(rep.h0).epsilon(1e-10));
}

TEST_CASE("lipschitz_divergence_probe: coupled growth is exponentially bounded") {
  auto lat = small_lattice();
  const SystemState s0 = perturbed_state(lat, two_nuclei());
  const GrowthReport rep =
      lipschitz_divergence_probe(s0, 1e-5, 2e-3, 0.1, 0.1);
  CHECK(rep.h0 > 0.0);
  CHECK(std::isfinite(rep.rate));
  CHECK(rep.bounded);
}
