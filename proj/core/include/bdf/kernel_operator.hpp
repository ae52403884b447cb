#ifndef BDF_KERNEL_OPERATOR_HPP
#define BDF_KERNEL_OPERATOR_HPP

#include <Eigen/Core>

#include "bdf/errors.hpp"
#include <complex>
#include <cstdint>
#include <memory>
#include <string>

#include "bdf/coulomb.hpp"
#include "bdf/lattice.hpp"
#include "bdf/spinor.hpp"

namespace bdf {

// Hilbert-Schmidt operator on the cutoff space, stored as the scaled block
// matrix s(4i+a, 4j+b) = h^3 * Qhat(p_i, p_j)_{ab} where Qhat is the kernel
// transform Qhat(p,q) = (2pi)^{-3} iint Q(x,y) e^{-ipx+iqy} dx dy.
//
// In the scaled representation operator algebra is plain matrix algebra:
// composition is s_A * s_B, the identity is I, the operator trace is the
// matrix trace, the Hilbert-Schmidt norm is the Frobenius norm, and the
// vacuum projector is an honest idempotent matrix. The h factors reappear
// only at the physics boundaries (densities, potentials, Coulomb weights).
class KernelOperator {
 public:
  KernelOperator(std::shared_ptr<const MomentumLattice> lattice,
                 Eigen::MatrixXcd scaled);

  static KernelOperator zero(std::shared_ptr<const MomentumLattice> lattice);
  static KernelOperator identity(
      std::shared_ptr<const MomentumLattice> lattice);

  const Eigen::MatrixXcd& matrix() const { return s_; }
  int dim() const { return static_cast<int>(s_.rows()); }

  // Block in the kernel-transform convention, Qhat(p_i, p_j) = s / h^3.
  Eigen::Matrix4cd block(int i, int j) const;

  const MomentumLattice& lattice() const { return *lattice_; }
  std::shared_ptr<const MomentumLattice> lattice_ptr() const {
    return lattice_;
  }

  KernelOperator& operator+=(const KernelOperator& other);
  KernelOperator& operator-=(const KernelOperator& other);
  KernelOperator& operator*=(std::complex<double> a);

 private:
  std::shared_ptr<const MomentumLattice> lattice_;
  Eigen::MatrixXcd s_;
};

KernelOperator operator+(KernelOperator a, const KernelOperator& b);
KernelOperator operator-(KernelOperator a, const KernelOperator& b);
KernelOperator operator*(std::complex<double> a, KernelOperator q);
KernelOperator operator*(double a, KernelOperator q);

// Diagonal symbol operators: blocks delta_pq h^{-3} m(p).
KernelOperator free_dirac_op(std::shared_ptr<const MomentumLattice> lattice);
KernelOperator vacuum_projector_op(
    std::shared_ptr<const MomentumLattice> lattice);

KernelOperator adjoint(const KernelOperator& a);
KernelOperator compose(const KernelOperator& a, const KernelOperator& b);
KernelOperator commutator(const KernelOperator& a, const KernelOperator& b);

std::complex<double> trace_of(const KernelOperator& a);
double hs_norm(const KernelOperator& q);
std::complex<double> hs_inner(const KernelOperator& a,
                              const KernelOperator& b);
double hermiticity_defect(const KernelOperator& a);

// Largest singular value estimate by power iteration on A^dagger A.
double op_norm_bound(const KernelOperator& a, int iterations = 120);

// tr A^{++} + tr A^{--} with respect to the vacuum projector. Computed by
// sandwiching with the P0 symbol and summing the diagonal spinor traces.
double p0_split_trace(const KernelOperator& q);

// tr Q^3; equals the split trace on projector differences.
double charge_tr_q3(const KernelOperator& q);

// rho_hat(k) = (2pi)^{-3/2} h^3 sum_q tr_C4 Qhat(q+k, q), on the difference
// lattice, restricted to q with both q and q+k inside the ball.
ChargeDensity density_of(const KernelOperator& q);

// || (Q+P0)^2 - (Q+P0) ||_HS.
double projector_residual(const KernelOperator& q);

// Rounds the eigenvalues of Q + P0 to {0,1} and returns P' - P0. Throws
// RetractionError if some eigenvalue is within 1e-6 of 1/2.
KernelOperator retract_to_projector(const KernelOperator& q);

// Deterministic Hermitian sample with hs_norm == norm_bound (Gaussian
// entries from a seeded generator, then scaled).
KernelOperator random_hs_sample(std::shared_ptr<const MomentumLattice> lattice,
                                double norm_bound, std::uint64_t seed);

// sqrt(||Q||_S2^2 + ||rho_Q||_C^2), the norm controlling the fixed-point
// argument.
double h_norm(const KernelOperator& q);

// Checkpoint format: magic "BDFK", u32 version, f64 cutoff, u32 n_per_axis,
// u64 block count, then blocks Qhat(p_i,p_j) in lattice order, row-major
// 4x4, little-endian f64 interleaved re/im.
void save_checkpoint(const KernelOperator& q, const std::string& path);
KernelOperator load_checkpoint(const std::string& path,
                               std::shared_ptr<const MomentumLattice> lattice);

}  // namespace bdf

#endif
