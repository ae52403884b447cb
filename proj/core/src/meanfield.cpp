#include "bdf/meanfield.hpp"

#include <cmath>
#include <numbers>

#include "bdf/errors.hpp"

namespace bdf {

namespace {

constexpr double kFourPi = 4.0 * std::numbers::pi;

// scaled multiplication-type matrix from vhat on the difference lattice:
// s(p,q) = h^3 (2pi)^{-3/2} vhat(p-q) I4
Eigen::MatrixXcd embed_multiplication(const MomentumLattice& lat,
                                      const Eigen::VectorXcd& vhat) {
  const DifferenceLattice& diff = lat.difference();
  const int n = lat.size();
  const double scale =
      lat.cell_volume() * std::pow(2.0 * std::numbers::pi, -1.5);
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const std::complex<double> v = scale * vhat[diff.delta_index(i, j)];
      s(4 * i, 4 * j) = v;
      s(4 * i + 1, 4 * j + 1) = v;
      s(4 * i + 2, 4 * j + 2) = v;
      s(4 * i + 3, 4 * j + 3) = v;
    }
  }
  return s;
}

Eigen::VectorXcd potential_vhat(const ChargeDensity& rho) {
  const DifferenceLattice& diff = rho.lattice().difference();
  const double inv_h3 = 1.0 / rho.lattice().cell_volume();
  Eigen::VectorXcd vhat(diff.size());
  for (int k = 0; k < diff.size(); ++k)
    vhat[k] = kFourPi * rho.value(k) * diff.weight(k) * inv_h3;
  return vhat;
}

}  // namespace

PotentialOperator direct_potential_op(const ChargeDensity& rho) {
  Eigen::VectorXcd vhat = potential_vhat(rho);
  Eigen::MatrixXcd s = embed_multiplication(rho.lattice(), vhat);
  return PotentialOperator{KernelOperator(rho.lattice_ptr(), std::move(s)),
                           std::move(vhat)};
}

PotentialOperator nuclear_potential_op(
    std::shared_ptr<const MomentumLattice> lattice,
    std::span<const NucleusState> nuclei) {
  return direct_potential_op(nuclear_density(std::move(lattice), nuclei));
}

KernelOperator exchange_op(const KernelOperator& q) {
  const MomentumLattice& lat = q.lattice();
  const DifferenceLattice& diff = lat.difference();
  const auto& s = q.matrix();
  const auto& w = diff.coulomb_weights();
  // R(p,q) = (2pi)^{-3} 4pi sum_k w(k) S(p-k, q-k), k over differences with
  // both shifted points in the ball; pairs with equal p-q couple.
  const double scale = kFourPi * std::pow(2.0 * std::numbers::pi, -3.0);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(s.rows(), s.cols());
  for (int d = 0; d < diff.size(); ++d) {
    const auto& cls = diff.pairs(d);
    const int m = static_cast<int>(cls.size());
    for (int a = 0; a < m; ++a) {
      const auto [i, j] = cls[a];
      Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
      for (int b = 0; b < m; ++b) {
        const auto [ip, jp] = cls[b];
        acc += w[diff.delta_index(i, ip)] * s.block<4, 4>(4 * ip, 4 * jp);
      }
      out.block<4, 4>(4 * i, 4 * j) = scale * acc;
    }
  }
  return KernelOperator(q.lattice_ptr(), std::move(out));
}

KernelOperator assemble_mean_field(const KernelOperator& q,
                                   std::span<const NucleusState> nuclei,
                                   double alpha) {
  // D_Q = D0 + V_{Q,x}; alpha multiplies every interaction term uniformly
  KernelOperator d = free_dirac_op(q.lattice_ptr());
  if (alpha != 0.0) d += assemble_v(q, nuclei, alpha);
  return d;
}

KernelOperator assemble_v(const KernelOperator& q,
                          std::span<const NucleusState> nuclei, double alpha) {
  if (alpha == 0.0) return KernelOperator::zero(q.lattice_ptr());
  ChargeDensity rho = density_of(q);
  if (!nuclei.empty()) rho -= nuclear_density(q.lattice_ptr(), nuclei);
  Eigen::MatrixXcd s = embed_multiplication(q.lattice(), potential_vhat(rho));
  s -= exchange_op(q).matrix();
  s *= alpha;
  return KernelOperator(q.lattice_ptr(), std::move(s));
}

KernelOperator bdf_rhs(const KernelOperator& q,
                       std::span<const NucleusState> nuclei, double alpha) {
  const MomentumLattice& lat = q.lattice();
  const int n = lat.size();
  const auto& sq = q.matrix();
  const std::complex<double> minus_i(0.0, -1.0);

  // [D0, Q] blockwise: both symbols are diagonal in momentum
  Eigen::MatrixXcd acc(4 * n, 4 * n);
  std::vector<Eigen::Matrix4cd> d0(n);
  for (int i = 0; i < n; ++i) d0[i] = d0_symbol(lat.point(i));
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      acc.block<4, 4>(4 * i, 4 * j) =
          d0[i] * sq.block<4, 4>(4 * i, 4 * j) -
          sq.block<4, 4>(4 * i, 4 * j) * d0[j];

  if (alpha != 0.0) {
    const KernelOperator v = assemble_v(q, nuclei, alpha);
    const auto& sv = v.matrix();
    // [V, Q] = VQ - (VQ)^dagger for Hermitian V, Q: one product
    Eigen::MatrixXcd vq(4 * n, 4 * n);
    vq.noalias() = sv * sq;
    acc += vq;
    acc -= vq.adjoint();
    // [V, P0] blockwise
    std::vector<Eigen::Matrix4cd> p0(n);
    for (int i = 0; i < n; ++i) p0[i] = p0_symbol(lat.point(i));
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        acc.block<4, 4>(4 * i, 4 * j) +=
            sv.block<4, 4>(4 * i, 4 * j) * p0[j] -
            p0[i] * sv.block<4, 4>(4 * i, 4 * j);
  }

  acc *= minus_i;
  return KernelOperator(q.lattice_ptr(), std::move(acc));
}

double exchange_energy(const KernelOperator& q) {
  return hs_inner(q, exchange_op(q)).real();
}

}  // namespace bdf
