#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "bdf/errors.hpp"
#include "bdf/kernel_operator.hpp"
#include "bdf/meanfield.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace bdf;

namespace {

std::shared_ptr<const MomentumLattice> small_lattice() {
  static auto lat = build_lattice(1.0, 3);
  return lat;
}

KernelOperator rank_one(std::shared_ptr<const MomentumLattice> lat,
                        const Eigen::VectorXcd& c) {
  Eigen::MatrixXcd s = c * c.adjoint();
  return KernelOperator(std::move(lat), std::move(s));
}

// unitary-rotated vacuum projector difference, Q = U P0 U^dag - P0
KernelOperator rotated_projector_difference(
    std::shared_ptr<const MomentumLattice> lat, std::uint64_t seed) {
  const KernelOperator a = random_hs_sample(lat, 1.0, seed);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix());
  const Eigen::MatrixXcd u = es.eigenvectors();
  const Eigen::MatrixXcd p0 = vacuum_projector_op(lat).matrix();
  return KernelOperator(lat, u * p0 * u.adjoint() - p0);
}

}  // namespace

TEST_CASE("commutator: basic identities and lattice mismatch") {
  auto lat = small_lattice();
  const KernelOperator a = random_hs_sample(lat, 2.0, 1);
  CHECK(hs_norm(commutator(a, a)) <= 1e-13);
  CHECK(hs_norm(commutator(a, KernelOperator::identity(lat))) <= 1e-13);

  // diagonal symbols commute pointwise
  CHECK(hs_norm(commutator(free_dirac_op(lat), vacuum_projector_op(lat))) <=
        1e-13);

  auto other = build_lattice(1.0, 4);
  CHECK_THROWS_AS(commutator(a, KernelOperator::zero(other)),
                  LatticeMismatchError);
}

TEST_CASE("hs_norm: zero, rank-one, compose-then-trace oracle") {
  auto lat = small_lattice();
  CHECK(hs_norm(KernelOperator::zero(lat)) == 0.0);

  const Eigen::VectorXcd c = testutil::random_unit_vector(4 * lat->size(), 5);
  CHECK(hs_norm(rank_one(lat, c)) == doctest::Approx(1.0).epsilon(1e-13));

  const KernelOperator q = random_hs_sample(lat, 3.0, 7);
  const double via_trace =
      std::sqrt(trace_of(compose(adjoint(q), q)).real());
  CHECK(hs_norm(q) == doctest::Approx(via_trace).epsilon(1e-12));
}

TEST_CASE("p0_split_trace: vacuum-relative charge") {
  auto lat = small_lattice();
  CHECK(p0_split_trace(KernelOperator::zero(lat)) == doctest::Approx(0.0));

  // state entirely in the positive subspace carries charge one
  const Eigen::MatrixXcd pp =
      Eigen::MatrixXcd::Identity(4 * lat->size(), 4 * lat->size()) -
      vacuum_projector_op(lat).matrix();
  Eigen::VectorXcd c = testutil::random_unit_vector(4 * lat->size(), 9);
  c = pp * c;
  c /= c.norm();
  CHECK(p0_split_trace(rank_one(lat, c)) ==
        doctest::Approx(1.0).epsilon(1e-10));

  // projector difference: split trace equals tr Q^3
  const KernelOperator q = rotated_projector_difference(lat, 13);
  CHECK(p0_split_trace(q) ==
        doctest::Approx(charge_tr_q3(q)).epsilon(1e-10));
}

TEST_CASE("charge_tr_q3: integer charge sectors") {
  auto lat = small_lattice();
  CHECK(charge_tr_q3(KernelOperator::zero(lat)) == doctest::Approx(0.0));

  // P = P0 + rank-one in the positive subspace: charge 1
  const Eigen::MatrixXcd p0 = vacuum_projector_op(lat).matrix();
  const Eigen::MatrixXcd pp =
      Eigen::MatrixXcd::Identity(p0.rows(), p0.cols()) - p0;
  Eigen::VectorXcd c = testutil::random_unit_vector(4 * lat->size(), 15);
  c = pp * c;
  c /= c.norm();
  const KernelOperator q = rank_one(lat, c);
  CHECK(charge_tr_q3(q) == doctest::Approx(1.0).epsilon(1e-10));

  // unitarily conjugated vacuum: charge 0
  const KernelOperator qp = rotated_projector_difference(lat, 17);
  CHECK(charge_tr_q3(qp) == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("density_of: zero, linearity, reality") {
  auto lat = small_lattice();
  CHECK(coulomb_norm(density_of(KernelOperator::zero(lat))) == 0.0);

  const KernelOperator a = random_hs_sample(lat, 1.0, 21);
  const KernelOperator b = random_hs_sample(lat, 2.0, 22);
  const ChargeDensity lin =
      density_of(KernelOperator(lat, 0.7 * a.matrix() - 1.3 * b.matrix()));
  const Eigen::VectorXcd direct =
      0.7 * density_of(a).values() - 1.3 * density_of(b).values();
  CHECK((lin.values() - direct).norm() == doctest::Approx(0.0));

  CHECK(density_of(a).reality_defect() <= 1e-14);
}

TEST_CASE("density_of: commutator with a potential leaves no density") {
  // [V, P0] for multiplication-type V: every term carries the C4-trace of a
  // difference of two rank-2 spectral projectors, which vanishes.
  auto lat = build_lattice(2.0, 5);
  for (std::uint64_t seed : {31, 32, 33}) {
    const ChargeDensity rho = testutil::random_real_density(lat, seed);
    const KernelOperator v = direct_potential_op(rho).op;
    const ChargeDensity leak =
        density_of(commutator(v, vacuum_projector_op(lat)));
    CHECK(coulomb_norm(leak) <= 1e-12);
  }
}

TEST_CASE("density_of: [V, Q'] annihilation for interior-supported Q'") {
  auto lat = build_lattice(2.0, 5);
  const DifferenceLattice& diff = lat->difference();

  // V with vhat supported on the 27 central cells
  Eigen::VectorXcd vhat = Eigen::VectorXcd::Zero(diff.size());
  std::mt19937_64 gen(77);
  for (int k = 0; k < diff.size(); ++k) {
    const auto& d = diff.delta_coords(k);
    if (std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])}) > 1)
      continue;
    const int nk = diff.negation_index(k);
    if (nk < k) continue;
    vhat[k] = std::complex<double>(testutil::uniform(gen, -1, 1),
                                   testutil::uniform(gen, -1, 1));
    vhat[nk] = std::conj(vhat[k]);
  }
  const double scale =
      lat->cell_volume() * std::pow(2.0 * std::numbers::pi, -1.5);
  Eigen::MatrixXcd sv =
      Eigen::MatrixXcd::Zero(4 * lat->size(), 4 * lat->size());
  for (int i = 0; i < lat->size(); ++i)
    for (int j = 0; j < lat->size(); ++j) {
      const std::complex<double> v = scale * vhat[diff.delta_index(i, j)];
      for (int aidx = 0; aidx < 4; ++aidx) sv(4 * i + aidx, 4 * j + aidx) = v;
    }
  const KernelOperator v(lat, std::move(sv));

  // Q' restricted to interior points (all 26 neighbours inside the ball)
  std::vector<int> interior;
  for (int i = 0; i < lat->size(); ++i) {
    const auto& c = lat->grid_coords(i);
    bool ok = true;
    for (int dx = -1; dx <= 1 && ok; ++dx)
      for (int dy = -1; dy <= 1 && ok; ++dy)
        for (int dz = -1; dz <= 1; ++dz)
          if (lat->index_of(c[0] + dx, c[1] + dy, c[2] + dz) < 0) {
            ok = false;
            break;
          }
    if (ok) interior.push_back(i);
  }
  REQUIRE(interior.size() >= 2);

  const KernelOperator full = random_hs_sample(lat, 1.0, 78);
  Eigen::MatrixXcd sq =
      Eigen::MatrixXcd::Zero(4 * lat->size(), 4 * lat->size());
  for (int i : interior)
    for (int j : interior)
      sq.block<4, 4>(4 * i, 4 * j) = full.matrix().block<4, 4>(4 * i, 4 * j);
  const KernelOperator qp(lat, std::move(sq));

  CHECK(coulomb_norm(density_of(commutator(v, qp))) <= 1e-12);

  // general support: the cutoff boundary leaks; measured, not asserted
  const double leak = coulomb_norm(density_of(commutator(v, full)));
  MESSAGE("boundary leakage for full-support Q': " << leak);
}

TEST_CASE("projector_residual: vacuum, projector differences, half scale") {
  auto lat = small_lattice();
  CHECK(projector_residual(KernelOperator::zero(lat)) <= 1e-13);

  const KernelOperator q = rotated_projector_difference(lat, 41);
  CHECK(projector_residual(q) <= 1e-12);

  const KernelOperator half(lat, 0.5 * q.matrix());
  CHECK(projector_residual(half) > 1e-3);
}

TEST_CASE("retract_to_projector: idempotent input, perturbed input, tie") {
  auto lat = small_lattice();
  const KernelOperator q = rotated_projector_difference(lat, 43);

  SUBCASE("already a projector difference") {
    const KernelOperator r = retract_to_projector(q);
    CHECK((r.matrix() - q.matrix()).norm() <= 1e-12);
  }

  SUBCASE("perturbed projector matches the sign-iteration oracle") {
    const KernelOperator noise = random_hs_sample(lat, 0.02, 44);
    const KernelOperator dirty(lat, q.matrix() + noise.matrix());
    const KernelOperator r = retract_to_projector(dirty);
    CHECK(projector_residual(r) <= 1e-12);

    const Eigen::MatrixXcd p0 = vacuum_projector_op(lat).matrix();
    const Eigen::MatrixXcd oracle_p =
        oracle::nearest_projector_sign_iteration(dirty.matrix() + p0);
    CHECK((r.matrix() + p0 - oracle_p).norm() <= 1e-10);
  }

  SUBCASE("eigenvalue at 1/2 is rejected") {
    const int d = 4 * lat->size();
    const Eigen::MatrixXcd p0 = vacuum_projector_op(lat).matrix();
    const KernelOperator tie(
        lat, 0.5 * Eigen::MatrixXcd::Identity(d, d) - p0);
    CHECK_THROWS_AS(retract_to_projector(tie), RetractionError);
  }
}

TEST_CASE("random_hs_sample: deterministic, Hermitian, exact norm") {
  auto lat = small_lattice();
  const KernelOperator a = random_hs_sample(lat, 2.5, 99);
  const KernelOperator b = random_hs_sample(lat, 2.5, 99);
  CHECK((a.matrix() - b.matrix()).norm() == 0.0);
  CHECK(hermiticity_defect(a) <= 1e-13);
  CHECK(hs_norm(a) == doctest::Approx(2.5).epsilon(1e-12));
  const KernelOperator c = random_hs_sample(lat, 2.5, 100);
  CHECK((a.matrix() - c.matrix()).norm() > 1e-3);
  CHECK_THROWS_AS(random_hs_sample(lat, 0.0, 1), ConfigError);
}

TEST_CASE("commutator norm against the operator-norm bound") {
  auto lat = small_lattice();
  for (std::uint64_t s = 0; s < 4; ++s) {
    const KernelOperator a = random_hs_sample(lat, 1.5, 200 + s);
    const KernelOperator b = random_hs_sample(lat, 0.7, 300 + s);
    CHECK(hs_norm(commutator(a, b)) <=
          2.0 * op_norm_bound(a) * hs_norm(b) * (1.0 + 1e-10));
  }
}

TEST_CASE("checkpoint: exact round trip and header validation") {
  auto lat = small_lattice();
  const KernelOperator q = random_hs_sample(lat, 1.0, 55);
  const std::string path =
      (std::filesystem::temp_directory_path() / "bdf_ckpt_test.bin").string();

  save_checkpoint(q, path);
  const KernelOperator r = load_checkpoint(path, lat);
  // blocks are stored in the Qhat convention, one h^3 scaling round trip
  CHECK((r.matrix() - q.matrix()).norm() <= 1e-14);

  auto other = build_lattice(1.0, 4);
  CHECK_THROWS_AS(load_checkpoint(path, other), CheckpointError);

  // corrupt the magic
  {
    std::ofstream f(path, std::ios::binary | std::ios::in);
    f.seekp(0);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(load_checkpoint(path, lat), CheckpointError);
  std::filesystem::remove(path);
}

TEST_CASE("h_norm combines the HS norm and the density Coulomb norm") {
  auto lat = small_lattice();
  const KernelOperator q = random_hs_sample(lat, 1.0, 61);
  const double hs = hs_norm(q);
  const double cn = coulomb_norm(density_of(q));
  CHECK(h_norm(q) == doctest::Approx(std::sqrt(hs * hs + cn * cn)));
}
