#ifndef BDF_COULOMB_HPP
#define BDF_COULOMB_HPP

#include <Eigen/Core>

#include "bdf/errors.hpp"
#include <complex>
#include <memory>

#include "bdf/lattice.hpp"

namespace bdf {

// Fourier coefficients rho_hat(k) on the difference lattice. Real-valued
// densities satisfy rho_hat(-k) = conj rho_hat(k). All Coulomb pairings use
// the cell-integrated weights, never a raw 1/|k|^2.
class ChargeDensity {
 public:
  ChargeDensity(std::shared_ptr<const MomentumLattice> lattice,
                Eigen::VectorXcd values);

  static ChargeDensity zero(std::shared_ptr<const MomentumLattice> lattice);

  const Eigen::VectorXcd& values() const { return values_; }
  std::complex<double> value(int k) const { return values_[k]; }

  const MomentumLattice& lattice() const { return *lattice_; }
  std::shared_ptr<const MomentumLattice> lattice_ptr() const {
    return lattice_;
  }
  const DifferenceLattice& difference() const { return lattice_->difference(); }

  // max_k |rho_hat(k) - conj rho_hat(-k)|, zero for densities of Hermitian
  // operators and for real nuclear shapes.
  double reality_defect() const;

  ChargeDensity& operator+=(const ChargeDensity& other);
  ChargeDensity& operator-=(const ChargeDensity& other);
  ChargeDensity& operator*=(std::complex<double> a);

 private:
  std::shared_ptr<const MomentumLattice> lattice_;
  Eigen::VectorXcd values_;
};

ChargeDensity operator+(ChargeDensity a, const ChargeDensity& b);
ChargeDensity operator-(ChargeDensity a, const ChargeDensity& b);
ChargeDensity operator*(std::complex<double> a, ChargeDensity rho);

// Normalised Gaussian charge shape of width sigma: f(x) =
// (2 pi sigma^2)^{-3/2} exp(-|x|^2 / 2 sigma^2), so int f = 1.
struct GaussianShape {
  double sigma;
};

// Unitary-convention transform (2pi)^{-3/2} exp(-sigma^2 |k|^2 / 2).
double fourier_gaussian(const GaussianShape& shape, const Eigen::Vector3d& k);

// Samples charge * f_hat(k) * exp(-i k . center) on the difference lattice.
ChargeDensity gaussian_density(std::shared_ptr<const MomentumLattice> lattice,
                               const GaussianShape& shape, double charge = 1.0,
                               const Eigen::Vector3d& center =
                                   Eigen::Vector3d::Zero());

// Multiplies rho_hat(k) by exp(-i k . xbar); Coulomb norm is unchanged.
ChargeDensity translate_density(const ChargeDensity& rho,
                                const Eigen::Vector3d& xbar);

// D(rho1, rho2) = 4 pi sum_k w(k) conj(rho1_hat(k)) rho2_hat(k). The 4 pi
// makes D equal the physical double integral of rho1(x) rho2(y)/|x-y|.
std::complex<double> coulomb_inner(const ChargeDensity& rho1,
                                   const ChargeDensity& rho2);

double coulomb_norm(const ChargeDensity& rho);

// Gradient of D(rho, charge * f(.-xbar)) with respect to xbar, evaluated
// analytically from the phase derivative. Exact for the discrete D.
Eigen::Vector3d coulomb_inner_translation_gradient(const ChargeDensity& rho,
                                                   const GaussianShape& shape,
                                                   double charge,
                                                   const Eigen::Vector3d& xbar);

// Closed-form Coulomb norms of the normalised Gaussian and its gradient:
// ||f||_C^2 = 1/(sqrt(pi) sigma), ||grad f||_C^2 = 1/(2 sqrt(pi) sigma^3).
double gaussian_coulomb_norm(const GaussianShape& shape);
double gaussian_gradient_coulomb_norm(const GaussianShape& shape);

}  // namespace bdf

#endif
