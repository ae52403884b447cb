#ifndef BDF_SPINOR_HPP
#define BDF_SPINOR_HPP

#include <Eigen/Core>
#include <cmath>

namespace bdf {

using SpinorMatrix = Eigen::Matrix4cd;

struct DiracMatrices {
  SpinorMatrix alpha[3];
  SpinorMatrix beta;
};

// The Dirac alpha_k (off-diagonal Pauli blocks) and beta = diag(1,1,-1,-1).
// All four are Hermitian, traceless, square to the identity and pairwise
// anticommute.
const DiracMatrices& dirac_matrices();

inline double dirac_energy(const Eigen::Vector3d& p) {
  return std::sqrt(1.0 + p.squaredNorm());
}

// Free Dirac symbol alpha.p + beta; eigenvalues +-sqrt(1+|p|^2), each twice.
SpinorMatrix d0_symbol(const Eigen::Vector3d& p);

// Negative-energy spectral projector (1 - D0(p)/E(p))/2; Hermitian rank-2
// projector commuting with d0_symbol(p).
SpinorMatrix p0_symbol(const Eigen::Vector3d& p);

}  // namespace bdf

#endif
