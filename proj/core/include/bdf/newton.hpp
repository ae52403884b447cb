#ifndef BDF_NEWTON_HPP
#define BDF_NEWTON_HPP

#include <Eigen/Core>
#include <span>
#include <vector>

#include "bdf/coulomb.hpp"
#include "bdf/kernel_operator.hpp"

namespace bdf {

// One classical nucleus: charge z (proton charges), mass m (electron
// masses), Gaussian charge shape, position and velocity (c = 1 units).
struct NucleusState {
  double z = 1.0;
  double m = 1.0;
  GaussianShape shape{1.0};
  Eigen::Vector3d x = Eigen::Vector3d::Zero();
  Eigen::Vector3d v = Eigen::Vector3d::Zero();
};

// Sum of the translated nuclear charge densities sum_k z_k f_k(.-x_k).
ChargeDensity nuclear_density(std::shared_ptr<const MomentumLattice> lattice,
                              std::span<const NucleusState> nuclei);

// Position-dependent part of the system energy:
//   U = -alpha D(rho_Q, sum_k z_k f_k(.-x_k))
//       + alpha sum_{i<j} D(z_i f_i(.-x_i), z_j f_j(.-x_j)).
double potential_energy_u(const KernelOperator& q,
                          std::span<const NucleusState> nuclei, double alpha);

// Same, given a precomputed electron density (used by the integrator and
// the frozen-density Picard map).
double potential_energy_u(const ChargeDensity& rho_q,
                          std::span<const NucleusState> nuclei, double alpha);

// F_k = -grad_{x_k} U, evaluated analytically in Fourier space. Exact
// derivative of potential_energy_u as implemented.
Eigen::Vector3d nuclear_force(const KernelOperator& q,
                              std::span<const NucleusState> nuclei,
                              double alpha, int k);

std::vector<Eigen::Vector3d> nuclear_forces(
    const ChargeDensity& rho_q, std::span<const NucleusState> nuclei,
    double alpha);

struct NewtonDerivative {
  Eigen::Vector3d dx;  // = v
  Eigen::Vector3d dv;  // = F/m
};

// First-order form of the Newton equations m_k x_k'' = F_k.
std::vector<NewtonDerivative> newton_rhs(std::span<const NucleusState> nuclei,
                                         const KernelOperator& q,
                                         double alpha);
std::vector<NewtonDerivative> newton_rhs(std::span<const NucleusState> nuclei,
                                         const ChargeDensity& rho_q,
                                         double alpha);

}  // namespace bdf

#endif
