#ifndef BDF_TEST_UTIL_HPP
#define BDF_TEST_UTIL_HPP

#include <complex>
#include <random>

#include "bdf/coulomb.hpp"
#include "bdf/kernel_operator.hpp"

// Small deterministic generators shared by the test suites.
namespace bdf::testutil {

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  const double u = (gen() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * u;
}

// Random density with the reality symmetry rho(-k) = conj rho(k).
inline ChargeDensity random_real_density(
    std::shared_ptr<const MomentumLattice> lattice, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  const DifferenceLattice& diff = lattice->difference();
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(diff.size());
  for (int k = 0; k < diff.size(); ++k) {
    const int nk = diff.negation_index(k);
    if (nk < k) continue;  // fill each +-k orbit once
    if (nk == k) {
      v[k] = uniform(gen, -1.0, 1.0);
    } else {
      v[k] = std::complex<double>(uniform(gen, -1.0, 1.0),
                                  uniform(gen, -1.0, 1.0));
      v[nk] = std::conj(v[k]);
    }
  }
  return ChargeDensity(std::move(lattice), std::move(v));
}

// Random unit coefficient vector in C^{4N}.
inline Eigen::VectorXcd random_unit_vector(int dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  Eigen::VectorXcd c(dim);
  for (int i = 0; i < dim; ++i)
    c[i] = std::complex<double>(uniform(gen, -1.0, 1.0),
                                uniform(gen, -1.0, 1.0));
  c /= c.norm();
  return c;
}

}  // namespace bdf::testutil

#endif
