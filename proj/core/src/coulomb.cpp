#include "bdf/coulomb.hpp"

#include <cmath>
#include <numbers>

#include "bdf/errors.hpp"

namespace bdf {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kFourPi = 4.0 * std::numbers::pi;

void require_same_lattice(const ChargeDensity& a, const ChargeDensity& b) {
  if (!a.lattice().compatible(b.lattice()))
    throw LatticeMismatchError("charge densities live on different lattices");
}
}  // namespace

ChargeDensity::ChargeDensity(std::shared_ptr<const MomentumLattice> lattice,
                             Eigen::VectorXcd values)
    : lattice_(std::move(lattice)), values_(std::move(values)) {
  if (values_.size() != lattice_->difference().size())
    throw ConfigError("charge density size does not match difference lattice");
}

ChargeDensity ChargeDensity::zero(
    std::shared_ptr<const MomentumLattice> lattice) {
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(lattice->difference().size());
  return ChargeDensity(std::move(lattice), std::move(v));
}

double ChargeDensity::reality_defect() const {
  const DifferenceLattice& diff = lattice_->difference();
  double worst = 0.0;
  for (int k = 0; k < diff.size(); ++k) {
    const int nk = diff.negation_index(k);
    worst = std::max(worst,
                     std::abs(values_[k] - std::conj(values_[nk])));
  }
  return worst;
}

ChargeDensity& ChargeDensity::operator+=(const ChargeDensity& other) {
  require_same_lattice(*this, other);
  values_ += other.values_;
  return *this;
}

ChargeDensity& ChargeDensity::operator-=(const ChargeDensity& other) {
  require_same_lattice(*this, other);
  values_ -= other.values_;
  return *this;
}

ChargeDensity& ChargeDensity::operator*=(std::complex<double> a) {
  values_ *= a;
  return *this;
}

ChargeDensity operator+(ChargeDensity a, const ChargeDensity& b) {
  a += b;
  return a;
}

ChargeDensity operator-(ChargeDensity a, const ChargeDensity& b) {
  a -= b;
  return a;
}

ChargeDensity operator*(std::complex<double> a, ChargeDensity rho) {
  rho *= a;
  return rho;
}

double fourier_gaussian(const GaussianShape& shape, const Eigen::Vector3d& k) {
  return std::pow(kTwoPi, -1.5) *
         std::exp(-0.5 * shape.sigma * shape.sigma * k.squaredNorm());
}

ChargeDensity gaussian_density(std::shared_ptr<const MomentumLattice> lattice,
                               const GaussianShape& shape, double charge,
                               const Eigen::Vector3d& center) {
  if (!(shape.sigma > 0.0))
    throw ConfigError("gaussian shape: sigma must be positive");
  const DifferenceLattice& diff = lattice->difference();
  Eigen::VectorXcd v(diff.size());
  for (int k = 0; k < diff.size(); ++k) {
    const Eigen::Vector3d& kk = diff.point(k);
    const double amp = charge * fourier_gaussian(shape, kk);
    v[k] = amp * std::exp(std::complex<double>(0.0, -kk.dot(center)));
  }
  return ChargeDensity(std::move(lattice), std::move(v));
}

ChargeDensity translate_density(const ChargeDensity& rho,
                                const Eigen::Vector3d& xbar) {
  const DifferenceLattice& diff = rho.difference();
  Eigen::VectorXcd v(diff.size());
  for (int k = 0; k < diff.size(); ++k) {
    const Eigen::Vector3d& kk = diff.point(k);
    v[k] = rho.value(k) * std::exp(std::complex<double>(0.0, -kk.dot(xbar)));
  }
  return ChargeDensity(rho.lattice_ptr(), std::move(v));
}

std::complex<double> coulomb_inner(const ChargeDensity& rho1,
                                   const ChargeDensity& rho2) {
  require_same_lattice(rho1, rho2);
  const DifferenceLattice& diff = rho1.difference();
  std::complex<double> acc = 0.0;
  for (int k = 0; k < diff.size(); ++k)
    acc += diff.weight(k) * std::conj(rho1.value(k)) * rho2.value(k);
  return kFourPi * acc;
}

double coulomb_norm(const ChargeDensity& rho) {
  const DifferenceLattice& diff = rho.difference();
  double acc = 0.0;
  for (int k = 0; k < diff.size(); ++k)
    acc += diff.weight(k) * std::norm(rho.value(k));
  return std::sqrt(kFourPi * acc);
}

Eigen::Vector3d coulomb_inner_translation_gradient(
    const ChargeDensity& rho, const GaussianShape& shape, double charge,
    const Eigen::Vector3d& xbar) {
  const DifferenceLattice& diff = rho.difference();
  Eigen::Vector3cd acc = Eigen::Vector3cd::Zero();
  for (int k = 0; k < diff.size(); ++k) {
    const Eigen::Vector3d& kk = diff.point(k);
    const double amp = charge * fourier_gaussian(shape, kk);
    const std::complex<double> phase =
        std::exp(std::complex<double>(0.0, -kk.dot(xbar)));
    const std::complex<double> scalar =
        diff.weight(k) * std::conj(rho.value(k)) * amp * phase *
        std::complex<double>(0.0, -1.0);
    acc += scalar * kk;
  }
  return kFourPi * acc.real();
}

double gaussian_coulomb_norm(const GaussianShape& shape) {
  return 1.0 / std::sqrt(std::sqrt(std::numbers::pi) * shape.sigma);
}

double gaussian_gradient_coulomb_norm(const GaussianShape& shape) {
  const double s3 = shape.sigma * shape.sigma * shape.sigma;
  return 1.0 / std::sqrt(2.0 * std::sqrt(std::numbers::pi) * s3);
}

}  // namespace bdf
