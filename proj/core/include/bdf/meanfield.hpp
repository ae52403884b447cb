#ifndef BDF_MEANFIELD_HPP
#define BDF_MEANFIELD_HPP

#include <span>

#include "bdf/kernel_operator.hpp"
#include "bdf/newton.hpp"

namespace bdf {

// Multiplication-type operator: blocks (2pi)^{-3/2} vhat(p-q) I4, defined
// only for lattice p, q (the cutoff sandwich), together with the vhat it
// was built from (indexed by the difference lattice).
struct PotentialOperator {
  KernelOperator op;
  Eigen::VectorXcd vhat;
};

// Hartree potential of rho: vhat(k) = 4 pi rho_hat(k) w(k)/h^3, with the
// cell weights regularising k = 0.
PotentialOperator direct_potential_op(const ChargeDensity& rho);

// Potential of the translated nuclear charges sum_k z_k f_k(.-x_k).
PotentialOperator nuclear_potential_op(
    std::shared_ptr<const MomentumLattice> lattice,
    std::span<const NucleusState> nuclei);

// Momentum-space convolution of Q with the Coulomb kernel: the operator
// with kernel Q(x,y)/|x-y|, sharing the same cell-weight regularisation.
KernelOperator exchange_op(const KernelOperator& q);

// D_Q = D0 - alpha*nuclear + alpha*direct(rho_Q) - alpha*exchange(Q).
KernelOperator assemble_mean_field(const KernelOperator& q,
                                   std::span<const NucleusState> nuclei,
                                   double alpha);

// V_{Q,x} = alpha*direct(rho_Q - nuclear density) - alpha*exchange(Q);
// equals assemble_mean_field minus the free Dirac part.
KernelOperator assemble_v(const KernelOperator& q,
                          std::span<const NucleusState> nuclei, double alpha);

// dQ/dt = -i([D_Q, Q] + [V_Q, P0]); Hermitian for Hermitian Q.
KernelOperator bdf_rhs(const KernelOperator& q,
                       std::span<const NucleusState> nuclei, double alpha);

// Exchange energy iint |Q(x,y)|^2/|x-y| = Re <Q, exchange_op(Q)>_HS.
double exchange_energy(const KernelOperator& q);

}  // namespace bdf

#endif
