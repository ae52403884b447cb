#ifndef BDF_TEST_ORACLES_HPP
#define BDF_TEST_ORACLES_HPP

#include <Eigen/Core>
#include <functional>

#include "bdf/kernel_operator.hpp"
#include "bdf/lattice.hpp"

// Independent verification routes. Every function here deliberately avoids
// the code path of the quantity it checks: different quadrature, different
// coordinates, or a different algorithm altogether.
namespace bdf::oracle {

// Brute-force count of cubic grid points inside the ball |p| <= cutoff.
long long count_ball_points(double cutoff, int n_per_axis);

// Recursive adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

// int_{[-1/2,1/2]^3} du/|u|^2 by spherical reduction: the radial integral
// is exact, leaving 3 * int_{[-1,1]^2} dx dy/(1+x^2+y^2), a smooth 2-D
// integral evaluated by nested adaptive Simpson.
double unit_cube_inverse_square(double tol = 1e-10);

// Electrostatic potential at radius d of a normalised Gaussian of width s,
// by adaptive radial quadrature of the interior/exterior shell integrals.
double gaussian_potential(double s, double d, double tol = 1e-10);

// Coulomb interaction of two normalised Gaussians at separation d: the
// convolution is a Gaussian of width sqrt(s1^2+s2^2), then the radial
// potential above.
double gaussian_pair_energy(double s1, double s2, double d,
                            double tol = 1e-10);

// Closed form erf(d / sqrt(2(s1^2+s2^2)))/d for cross-checking the radial
// quadrature itself.
double gaussian_pair_energy_closed_form(double s1, double s2, double d);

// Coulomb norm of the normalised Gaussian by 1-D k-space quadrature.
double gaussian_coulomb_norm_quadrature(double sigma, double tol = 1e-10);

// iint rho(x) rho(y)/|x-y| for the rank-one state with unit coefficient
// vector c on the lattice (psi = (2pi)^{-3/2} h^{3/2} sum_p c(p) e^{ipx}),
// evaluated on an m^3 midpoint grid over one period box with an analytic
// diagonal-cell correction.
double rank_one_exchange_energy(const MomentumLattice& lattice,
                                const Eigen::VectorXcd& c, int grid_n);

// Nearest projector by the Newton-Schulz sign iteration on 2P - I
// (independent of the eigendecomposition route used by the retraction).
Eigen::MatrixXcd nearest_projector_sign_iteration(const Eigen::MatrixXcd& p,
                                                  int max_iter = 60);

// Exact free-evolution e^{-i D0 t} S0 e^{+i D0 t} via closed-form symbol
// phases cos(Et) -+ i sin(Et) D0(p)/E.
Eigen::MatrixXcd exact_free_evolution(const MomentumLattice& lattice,
                                      const Eigen::MatrixXcd& s0, double t);

}  // namespace bdf::oracle

#endif
