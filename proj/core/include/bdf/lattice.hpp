#ifndef BDF_LATTICE_HPP
#define BDF_LATTICE_HPP

#include <Eigen/Core>

#include "bdf/errors.hpp"
#include <array>
#include <memory>
#include <utility>
#include <vector>

namespace bdf {

class DifferenceLattice;

// Uniform cubic momentum grid intersected with the ball |p| <= cutoff.
// Spacing h = 2*cutoff/n_per_axis; odd n places a point at the origin,
// even n uses half-integer offsets. The point set is closed under p -> -p
// and ordered lexicographically by integer grid coordinates, so all block
// indexing downstream is deterministic.
class MomentumLattice {
 public:
  MomentumLattice(double cutoff, int n_per_axis);
  ~MomentumLattice();

  MomentumLattice(const MomentumLattice&) = delete;
  MomentumLattice& operator=(const MomentumLattice&) = delete;

  double cutoff() const { return cutoff_; }
  int n_per_axis() const { return n_; }
  double spacing() const { return h_; }
  double cell_volume() const { return h_ * h_ * h_; }

  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const Eigen::Vector3d& point(int i) const { return points_[i]; }

  // Integer grid coordinates of point i. For even n the physical point is
  // h*(c + 1/2) componentwise, for odd n it is h*c.
  const std::array<int, 3>& grid_coords(int i) const { return coords_[i]; }

  // Index of the grid point with the given coordinates, -1 if it is not in
  // the ball.
  int index_of(int cx, int cy, int cz) const;

  // Index of -p for point i (always valid by construction).
  int negation_index(int i) const { return neg_[i]; }

  // Same cutoff and resolution. Operators may only be combined when their
  // lattices are compatible.
  bool compatible(const MomentumLattice& other) const {
    return n_ == other.n_ && cutoff_ == other.cutoff_;
  }

  const DifferenceLattice& difference() const { return *diff_; }

 private:
  double cutoff_;
  int n_;
  double h_;
  int cmin_, cmax_;  // valid coordinate range
  std::vector<Eigen::Vector3d> points_;
  std::vector<std::array<int, 3>> coords_;
  std::vector<int> lookup_;  // dense n^3 grid -> point index or -1
  std::vector<int> neg_;
  std::unique_ptr<const DifferenceLattice> diff_;
};

// All pairwise differences k = p - q of momentum lattice points, with
// cell-integrated Coulomb weights w(k) = int_{cell(k)} dkappa/|kappa|^2.
// The cell integral regularises k = 0 (weight c0*h with c0 the unit-cube
// integral of |u|^-2) and the 26 cells touching the origin are integrated
// by fixed-order product Gauss quadrature; farther cells use the midpoint
// value h^3/|k|^2.
class DifferenceLattice {
 public:
  explicit DifferenceLattice(const MomentumLattice& base);

  DifferenceLattice(const DifferenceLattice&) = delete;
  DifferenceLattice& operator=(const DifferenceLattice&) = delete;

  int size() const { return static_cast<int>(points_.size()); }
  const std::vector<Eigen::Vector3d>& points() const { return points_; }
  const Eigen::Vector3d& point(int k) const { return points_[k]; }
  const std::array<int, 3>& delta_coords(int k) const { return deltas_[k]; }

  const std::vector<double>& coulomb_weights() const { return weights_; }
  double weight(int k) const { return weights_[k]; }

  int zero_index() const { return zero_; }
  int negation_index(int k) const { return neg_[k]; }

  // Index of the difference with integer coordinates (dx,dy,dz), -1 if the
  // difference is not realised by any point pair.
  int index_of_delta(int dx, int dy, int dz) const;

  // Index of p_i - p_j in this lattice (precomputed, always valid).
  int delta_index(int i, int j) const { return pair_delta_[i * npts_ + j]; }

  // All point pairs (i,j) with p_i - p_j = point(k).
  const std::vector<std::pair<int, int>>& pairs(int k) const {
    return pairs_[k];
  }

  double base_spacing() const { return h_; }

 private:
  double h_;
  int npts_;
  int dmin_, dside_;
  std::vector<Eigen::Vector3d> points_;
  std::vector<std::array<int, 3>> deltas_;
  std::vector<double> weights_;
  std::vector<int> lookup_;
  std::vector<int> neg_;
  std::vector<int> pair_delta_;
  std::vector<std::vector<std::pair<int, int>>> pairs_;
  int zero_ = -1;
};

// Factories matching the construction contract above. Throw ConfigError on
// cutoff <= 0 or n_per_axis < 2.
std::shared_ptr<const MomentumLattice> build_lattice(double cutoff,
                                                     int n_per_axis);
std::unique_ptr<const DifferenceLattice> build_difference_lattice(
    const MomentumLattice& lattice);

}  // namespace bdf

#endif
