#include "bdf/newton.hpp"

#include <stdexcept>

#include "bdf/errors.hpp"

namespace bdf {

ChargeDensity nuclear_density(std::shared_ptr<const MomentumLattice> lattice,
                              std::span<const NucleusState> nuclei) {
  ChargeDensity nu = ChargeDensity::zero(lattice);
  for (const NucleusState& n : nuclei)
    nu += gaussian_density(lattice, n.shape, n.z, n.x);
  return nu;
}

double potential_energy_u(const ChargeDensity& rho_q,
                          std::span<const NucleusState> nuclei, double alpha) {
  if (alpha == 0.0) return 0.0;
  auto lattice = rho_q.lattice_ptr();
  double u = 0.0;
  if (!nuclei.empty()) {
    const ChargeDensity nu = nuclear_density(lattice, nuclei);
    u -= alpha * coulomb_inner(rho_q, nu).real();
  }
  for (std::size_t i = 0; i < nuclei.size(); ++i) {
    const ChargeDensity ni =
        gaussian_density(lattice, nuclei[i].shape, nuclei[i].z, nuclei[i].x);
    for (std::size_t j = i + 1; j < nuclei.size(); ++j) {
      const ChargeDensity nj =
          gaussian_density(lattice, nuclei[j].shape, nuclei[j].z, nuclei[j].x);
      u += alpha * coulomb_inner(ni, nj).real();
    }
  }
  return u;
}

double potential_energy_u(const KernelOperator& q,
                          std::span<const NucleusState> nuclei, double alpha) {
  if (alpha == 0.0) return 0.0;
  return potential_energy_u(density_of(q), nuclei, alpha);
}

std::vector<Eigen::Vector3d> nuclear_forces(
    const ChargeDensity& rho_q, std::span<const NucleusState> nuclei,
    double alpha) {
  const std::size_t m = nuclei.size();
  std::vector<Eigen::Vector3d> f(m, Eigen::Vector3d::Zero());
  if (alpha == 0.0 || m == 0) return f;
  auto lattice = rho_q.lattice_ptr();

  std::vector<ChargeDensity> nus;
  nus.reserve(m);
  for (const NucleusState& n : nuclei)
    nus.push_back(gaussian_density(lattice, n.shape, n.z, n.x));

  // F_k = -grad_{x_k} U = alpha * grad_{x_k} D(rho_Q - sum_{j != k} nu_j,
  //                                            z_k f_k(.-x_k))
  for (std::size_t k = 0; k < m; ++k) {
    ChargeDensity eff = rho_q;
    for (std::size_t j = 0; j < m; ++j)
      if (j != k) eff -= nus[j];
    f[k] = alpha * coulomb_inner_translation_gradient(eff, nuclei[k].shape,
                                                      nuclei[k].z,
                                                      nuclei[k].x);
  }
  return f;
}

Eigen::Vector3d nuclear_force(const KernelOperator& q,
                              std::span<const NucleusState> nuclei,
                              double alpha, int k) {
  if (k < 0 || static_cast<std::size_t>(k) >= nuclei.size())
    throw std::out_of_range("nuclear_force: nucleus index out of range");
  return nuclear_forces(density_of(q), nuclei, alpha)[static_cast<std::size_t>(k)];
}

std::vector<NewtonDerivative> newton_rhs(std::span<const NucleusState> nuclei,
                                         const ChargeDensity& rho_q,
                                         double alpha) {
  const std::vector<Eigen::Vector3d> f = nuclear_forces(rho_q, nuclei, alpha);
  std::vector<NewtonDerivative> out(nuclei.size());
  for (std::size_t k = 0; k < nuclei.size(); ++k) {
    out[k].dx = nuclei[k].v;
    out[k].dv = f[k] / nuclei[k].m;
  }
  return out;
}

std::vector<NewtonDerivative> newton_rhs(std::span<const NucleusState> nuclei,
                                         const KernelOperator& q,
                                         double alpha) {
  return newton_rhs(nuclei, density_of(q), alpha);
}

}  // namespace bdf
