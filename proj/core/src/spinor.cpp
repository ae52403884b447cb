#include "bdf/spinor.hpp"

namespace bdf {

namespace {

DiracMatrices make_dirac_matrices() {
  using C = std::complex<double>;
  DiracMatrices m;
  Eigen::Matrix2cd sigma[3];
  sigma[0] << C(0, 0), C(1, 0), C(1, 0), C(0, 0);
  sigma[1] << C(0, 0), C(0, -1), C(0, 1), C(0, 0);
  sigma[2] << C(1, 0), C(0, 0), C(0, 0), C(-1, 0);
  for (int k = 0; k < 3; ++k) {
    m.alpha[k].setZero();
    m.alpha[k].block<2, 2>(0, 2) = sigma[k];
    m.alpha[k].block<2, 2>(2, 0) = sigma[k];
  }
  m.beta.setZero();
  m.beta(0, 0) = 1.0;
  m.beta(1, 1) = 1.0;
  m.beta(2, 2) = -1.0;
  m.beta(3, 3) = -1.0;
  return m;
}

}  // namespace

const DiracMatrices& dirac_matrices() {
  static const DiracMatrices m = make_dirac_matrices();
  return m;
}

SpinorMatrix d0_symbol(const Eigen::Vector3d& p) {
  const DiracMatrices& m = dirac_matrices();
  SpinorMatrix d = m.beta;
  for (int k = 0; k < 3; ++k) d += p[k] * m.alpha[k];
  return d;
}

SpinorMatrix p0_symbol(const Eigen::Vector3d& p) {
  const double e = dirac_energy(p);
  return 0.5 * (SpinorMatrix::Identity() - d0_symbol(p) / e);
}

}  // namespace bdf
