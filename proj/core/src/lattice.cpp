#include "bdf/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bdf/errors.hpp"

namespace bdf {
namespace {

// int_{[-1/2,1/2]^3} du/|u|^2, the k = 0 cell constant (in units of the
// cell side). Frozen from refined quadrature; the test suite re-derives it
// with an independent spherical reduction.
constexpr double kUnitCubeInverseSquare = 7.6741242224437318;

struct GaussRule {
  std::vector<double> nodes;    // on [-1/2, 1/2]
  std::vector<double> weights;  // summing to 1
};

// Gauss-Legendre nodes by Newton iteration on P_n, mapped to [-1/2, 1/2].
GaussRule gauss_rule(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -0.5 * x;
    rule.nodes[n - 1 - i] = 0.5 * x;
    rule.weights[i] = 0.5 * w;
    rule.weights[n - 1 - i] = 0.5 * w;
  }
  return rule;
}

// int over the unit cube centered at integer offset d of du/|u|^2, for the
// 26 cells adjacent to the origin (integrand analytic on the closed cell).
double adjacent_cell_integral(int dx, int dy, int dz) {
  static const GaussRule rule = gauss_rule(16);
  const int n = static_cast<int>(rule.nodes.size());
  double sum = 0.0;
  for (int a = 0; a < n; ++a) {
    const double ux = dx + rule.nodes[a];
    for (int b = 0; b < n; ++b) {
      const double uy = dy + rule.nodes[b];
      double inner = 0.0;
      for (int c = 0; c < n; ++c) {
        const double uz = dz + rule.nodes[c];
        inner += rule.weights[c] / (ux * ux + uy * uy + uz * uz);
      }
      sum += rule.weights[a] * rule.weights[b] * inner;
    }
  }
  return sum;
}

// Dimensionless cell weight v(d) with w(k) = h * v(d), k = h*d.
double cell_weight(int dx, int dy, int dz) {
  const int ax = std::abs(dx), ay = std::abs(dy), az = std::abs(dz);
  const int linf = std::max({ax, ay, az});
  if (linf == 0) return kUnitCubeInverseSquare;
  if (linf == 1) {
    static const double face = adjacent_cell_integral(1, 0, 0);
    static const double edge = adjacent_cell_integral(1, 1, 0);
    static const double corner = adjacent_cell_integral(1, 1, 1);
    const int ones = ax + ay + az;  // components are 0 or 1 here
    return ones == 1 ? face : (ones == 2 ? edge : corner);
  }
  return 1.0 / static_cast<double>(dx * dx + dy * dy + dz * dz);
}

}  // namespace

MomentumLattice::MomentumLattice(double cutoff, int n_per_axis)
    : cutoff_(cutoff), n_(n_per_axis) {
  if (!(cutoff > 0.0)) throw ConfigError("lattice: cutoff must be positive");
  if (n_per_axis < 2) throw ConfigError("lattice: n_per_axis must be >= 2");

  h_ = 2.0 * cutoff_ / n_;
  const bool even = (n_ % 2 == 0);
  // coordinate c maps to h*(c + offset) with offset 1/2 for even n
  cmin_ = even ? -n_ / 2 : -(n_ - 1) / 2;
  cmax_ = even ? n_ / 2 - 1 : (n_ - 1) / 2;
  const double offset = even ? 0.5 : 0.0;
  const double r2max = cutoff_ * cutoff_ * (1.0 + 1e-12);

  lookup_.assign(static_cast<std::size_t>(n_) * n_ * n_, -1);
  for (int cx = cmin_; cx <= cmax_; ++cx) {
    for (int cy = cmin_; cy <= cmax_; ++cy) {
      for (int cz = cmin_; cz <= cmax_; ++cz) {
        Eigen::Vector3d p(h_ * (cx + offset), h_ * (cy + offset),
                          h_ * (cz + offset));
        if (p.squaredNorm() > r2max) continue;
        const int idx = static_cast<int>(points_.size());
        points_.push_back(p);
        coords_.push_back({cx, cy, cz});
        lookup_[(static_cast<std::size_t>(cx - cmin_) * n_ + (cy - cmin_)) *
                    n_ +
                (cz - cmin_)] = idx;
      }
    }
  }

  neg_.resize(points_.size());
  for (int i = 0; i < size(); ++i) {
    const auto& c = coords_[i];
    // -(c + offset) = (-c - 2*offset) + offset
    const int shift = even ? 1 : 0;
    neg_[i] = index_of(-c[0] - shift, -c[1] - shift, -c[2] - shift);
    if (neg_[i] < 0)
      throw ConfigError("lattice: point set not symmetric under negation");
  }

  diff_ = std::make_unique<const DifferenceLattice>(*this);
}

MomentumLattice::~MomentumLattice() = default;

int MomentumLattice::index_of(int cx, int cy, int cz) const {
  if (cx < cmin_ || cx > cmax_ || cy < cmin_ || cy > cmax_ || cz < cmin_ ||
      cz > cmax_)
    return -1;
  return lookup_[(static_cast<std::size_t>(cx - cmin_) * n_ + (cy - cmin_)) *
                     n_ +
                 (cz - cmin_)];
}

DifferenceLattice::DifferenceLattice(const MomentumLattice& base)
    : h_(base.spacing()), npts_(base.size()) {
  const int n = base.n_per_axis();
  dmin_ = -(n - 1);
  dside_ = 2 * n - 1;
  lookup_.assign(static_cast<std::size_t>(dside_) * dside_ * dside_, -1);

  auto slot = [this](int dx, int dy, int dz) -> int& {
    return lookup_[(static_cast<std::size_t>(dx - dmin_) * dside_ +
                    (dy - dmin_)) *
                       dside_ +
                   (dz - dmin_)];
  };

  // first pass: enumerate realised differences in lexicographic delta order
  std::vector<std::array<int, 3>> seen;
  for (int i = 0; i < npts_; ++i) {
    const auto& ci = base.grid_coords(i);
    for (int j = 0; j < npts_; ++j) {
      const auto& cj = base.grid_coords(j);
      const int dx = ci[0] - cj[0], dy = ci[1] - cj[1], dz = ci[2] - cj[2];
      int& s = slot(dx, dy, dz);
      if (s < 0) {
        s = 0;  // mark
        seen.push_back({dx, dy, dz});
      }
    }
  }
  std::sort(seen.begin(), seen.end());
  deltas_ = std::move(seen);
  points_.resize(deltas_.size());
  weights_.resize(deltas_.size());
  neg_.resize(deltas_.size());
  for (int k = 0; k < size(); ++k) {
    const auto& d = deltas_[k];
    slot(d[0], d[1], d[2]) = k;
    points_[k] = h_ * Eigen::Vector3d(d[0], d[1], d[2]);
    weights_[k] = h_ * cell_weight(d[0], d[1], d[2]);
    if (d[0] == 0 && d[1] == 0 && d[2] == 0) zero_ = k;
  }
  for (int k = 0; k < size(); ++k) {
    const auto& d = deltas_[k];
    neg_[k] = index_of_delta(-d[0], -d[1], -d[2]);
  }

  // second pass: pair lists and the dense (i,j) -> delta table
  pairs_.resize(deltas_.size());
  pair_delta_.resize(static_cast<std::size_t>(npts_) * npts_);
  for (int i = 0; i < npts_; ++i) {
    const auto& ci = base.grid_coords(i);
    for (int j = 0; j < npts_; ++j) {
      const auto& cj = base.grid_coords(j);
      const int k =
          index_of_delta(ci[0] - cj[0], ci[1] - cj[1], ci[2] - cj[2]);
      pair_delta_[static_cast<std::size_t>(i) * npts_ + j] = k;
      pairs_[k].emplace_back(i, j);
    }
  }
}

int DifferenceLattice::index_of_delta(int dx, int dy, int dz) const {
  if (dx < dmin_ || dx > -dmin_ || dy < dmin_ || dy > -dmin_ || dz < dmin_ ||
      dz > -dmin_)
    return -1;
  return lookup_[(static_cast<std::size_t>(dx - dmin_) * dside_ +
                  (dy - dmin_)) *
                     dside_ +
                 (dz - dmin_)];
}

std::shared_ptr<const MomentumLattice> build_lattice(double cutoff,
                                                     int n_per_axis) {
  return std::make_shared<const MomentumLattice>(cutoff, n_per_axis);
}

std::unique_ptr<const DifferenceLattice> build_difference_lattice(
    const MomentumLattice& lattice) {
  return std::make_unique<const DifferenceLattice>(lattice);
}

}  // namespace bdf
