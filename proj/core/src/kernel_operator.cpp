#include "bdf/kernel_operator.hpp"

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <random>

#include "bdf/errors.hpp"

namespace bdf {

namespace {

void require_same_lattice(const KernelOperator& a, const KernelOperator& b) {
  if (!a.lattice().compatible(b.lattice()))
    throw LatticeMismatchError("kernel operators live on different lattices");
}

}  // namespace

KernelOperator::KernelOperator(std::shared_ptr<const MomentumLattice> lattice,
                               Eigen::MatrixXcd scaled)
    : lattice_(std::move(lattice)), s_(std::move(scaled)) {
  const int d = 4 * lattice_->size();
  if (s_.rows() != d || s_.cols() != d)
    throw ConfigError("kernel operator matrix has wrong dimension");
}

KernelOperator KernelOperator::zero(
    std::shared_ptr<const MomentumLattice> lattice) {
  const int d = 4 * lattice->size();
  return KernelOperator(std::move(lattice), Eigen::MatrixXcd::Zero(d, d));
}

KernelOperator KernelOperator::identity(
    std::shared_ptr<const MomentumLattice> lattice) {
  const int d = 4 * lattice->size();
  return KernelOperator(std::move(lattice), Eigen::MatrixXcd::Identity(d, d));
}

Eigen::Matrix4cd KernelOperator::block(int i, int j) const {
  const double h3 = lattice_->cell_volume();
  return s_.block<4, 4>(4 * i, 4 * j) / h3;
}

KernelOperator& KernelOperator::operator+=(const KernelOperator& other) {
  require_same_lattice(*this, other);
  s_ += other.s_;
  return *this;
}

KernelOperator& KernelOperator::operator-=(const KernelOperator& other) {
  require_same_lattice(*this, other);
  s_ -= other.s_;
  return *this;
}

KernelOperator& KernelOperator::operator*=(std::complex<double> a) {
  s_ *= a;
  return *this;
}

KernelOperator operator+(KernelOperator a, const KernelOperator& b) {
  a += b;
  return a;
}

KernelOperator operator-(KernelOperator a, const KernelOperator& b) {
  a -= b;
  return a;
}

KernelOperator operator*(std::complex<double> a, KernelOperator q) {
  q *= a;
  return q;
}

KernelOperator operator*(double a, KernelOperator q) {
  q *= std::complex<double>(a, 0.0);
  return q;
}

KernelOperator free_dirac_op(std::shared_ptr<const MomentumLattice> lattice) {
  const int n = lattice->size();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  for (int i = 0; i < n; ++i)
    s.block<4, 4>(4 * i, 4 * i) = d0_symbol(lattice->point(i));
  return KernelOperator(std::move(lattice), std::move(s));
}

KernelOperator vacuum_projector_op(
    std::shared_ptr<const MomentumLattice> lattice) {
  const int n = lattice->size();
  Eigen::MatrixXcd s = Eigen::MatrixXcd::Zero(4 * n, 4 * n);
  for (int i = 0; i < n; ++i)
    s.block<4, 4>(4 * i, 4 * i) = p0_symbol(lattice->point(i));
  return KernelOperator(std::move(lattice), std::move(s));
}

KernelOperator adjoint(const KernelOperator& a) {
  return KernelOperator(a.lattice_ptr(), a.matrix().adjoint());
}

KernelOperator compose(const KernelOperator& a, const KernelOperator& b) {
  require_same_lattice(a, b);
  Eigen::MatrixXcd s(a.dim(), a.dim());
  s.noalias() = a.matrix() * b.matrix();
  return KernelOperator(a.lattice_ptr(), std::move(s));
}

KernelOperator commutator(const KernelOperator& a, const KernelOperator& b) {
  require_same_lattice(a, b);
  Eigen::MatrixXcd s(a.dim(), a.dim());
  s.noalias() = a.matrix() * b.matrix();
  s.noalias() -= b.matrix() * a.matrix();
  return KernelOperator(a.lattice_ptr(), std::move(s));
}

std::complex<double> trace_of(const KernelOperator& a) {
  return a.matrix().trace();
}

double hs_norm(const KernelOperator& q) { return q.matrix().norm(); }

std::complex<double> hs_inner(const KernelOperator& a,
                              const KernelOperator& b) {
  require_same_lattice(a, b);
  return (a.matrix().adjoint() * b.matrix()).trace();
}

double hermiticity_defect(const KernelOperator& a) {
  return (a.matrix() - a.matrix().adjoint()).norm();
}

double op_norm_bound(const KernelOperator& a, int iterations) {
  const auto& s = a.matrix();
  Eigen::VectorXcd v(s.cols());
  for (int i = 0; i < v.size(); ++i)
    v[i] = std::complex<double>(1.0 + 0.01 * std::sin(1.0 + i), 0.0);
  v /= v.norm();
  double sigma = 0.0;
  Eigen::VectorXcd w;
  for (int it = 0; it < iterations; ++it) {
    w.noalias() = s * v;
    v.noalias() = s.adjoint() * w;
    const double n = v.norm();
    if (n == 0.0) return 0.0;
    v /= n;
    sigma = std::sqrt(n);
  }
  return sigma;
}

double p0_split_trace(const KernelOperator& q) {
  const MomentumLattice& lat = q.lattice();
  std::complex<double> acc = 0.0;
  for (int i = 0; i < lat.size(); ++i) {
    const Eigen::Matrix4cd p0 = p0_symbol(lat.point(i));
    const Eigen::Matrix4cd pp = Eigen::Matrix4cd::Identity() - p0;
    const Eigen::Matrix4cd d = q.matrix().block<4, 4>(4 * i, 4 * i);
    acc += (p0 * d * p0).trace() + (pp * d * pp).trace();
  }
  return acc.real();
}

double charge_tr_q3(const KernelOperator& q) {
  const auto& s = q.matrix();
  Eigen::MatrixXcd s2(s.rows(), s.cols());
  s2.noalias() = s * s;
  // tr(S2 * S) without the third product
  const std::complex<double> tr =
      (s2.transpose().cwiseProduct(s)).sum();
  return tr.real();
}

ChargeDensity density_of(const KernelOperator& q) {
  const DifferenceLattice& diff = q.lattice().difference();
  const auto& s = q.matrix();
  Eigen::VectorXcd rho(diff.size());
  const double scale = std::pow(2.0 * std::numbers::pi, -1.5);
  for (int k = 0; k < diff.size(); ++k) {
    std::complex<double> acc = 0.0;
    for (const auto& [i, j] : diff.pairs(k)) {
      acc += s(4 * i, 4 * j) + s(4 * i + 1, 4 * j + 1) +
             s(4 * i + 2, 4 * j + 2) + s(4 * i + 3, 4 * j + 3);
    }
    rho[k] = scale * acc;
  }
  return ChargeDensity(q.lattice_ptr(), std::move(rho));
}

double projector_residual(const KernelOperator& q) {
  const KernelOperator p0 = vacuum_projector_op(q.lattice_ptr());
  Eigen::MatrixXcd p = q.matrix() + p0.matrix();
  Eigen::MatrixXcd r(p.rows(), p.cols());
  r.noalias() = p * p;
  r -= p;
  return r.norm();
}

KernelOperator retract_to_projector(const KernelOperator& q) {
  const KernelOperator p0 = vacuum_projector_op(q.lattice_ptr());
  Eigen::MatrixXcd p = q.matrix() + p0.matrix();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(p);
  if (es.info() != Eigen::Success)
    throw RetractionError("retraction: eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i] - 0.5) < 1e-6) {
      char buf[96];
      std::snprintf(buf, sizeof buf,
                    "retraction: eigenvalue %.12g too close to 1/2", ev[i]);
      throw RetractionError(buf);
    }
  }
  // P' = sum of eigenvectors with eigenvalue rounded to 1
  Eigen::MatrixXcd occ(p.rows(), p.cols());
  occ.setZero();
  int count = 0;
  for (int i = 0; i < ev.size(); ++i)
    if (ev[i] > 0.5) occ.col(count++) = es.eigenvectors().col(i);
  Eigen::MatrixXcd pr(p.rows(), p.cols());
  pr.noalias() = occ.leftCols(count) * occ.leftCols(count).adjoint();
  pr -= p0.matrix();
  return KernelOperator(q.lattice_ptr(), std::move(pr));
}

namespace {

// Explicit Box-Muller on raw mt19937_64 draws: deterministic across
// standard libraries, unlike std::normal_distribution.
class NormalSource {
 public:
  explicit NormalSource(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    const double u1 = uniform_open();
    const double u2 = uniform_open();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(theta);
    have_ = true;
    return r * std::cos(theta);
  }

 private:
  double uniform_open() {
    // in (0, 1]
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }
  std::mt19937_64 gen_;
  bool have_ = false;
  double cached_ = 0.0;
};

}  // namespace

KernelOperator random_hs_sample(std::shared_ptr<const MomentumLattice> lattice,
                                double norm_bound, std::uint64_t seed) {
  if (!(norm_bound > 0.0))
    throw ConfigError("random_hs_sample: norm_bound must be positive");
  NormalSource normal(seed);
  const int d = 4 * lattice->size();
  Eigen::MatrixXcd s(d, d);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < d; ++j) {
    for (int i = 0; i <= j; ++i) {
      if (i == j) {
        s(i, j) = normal();
      } else {
        const std::complex<double> z(normal(), normal());
        s(i, j) = inv_sqrt2 * z;
        s(j, i) = std::conj(s(i, j));
      }
    }
  }
  const double n = s.norm();
  if (n > 0.0) s *= norm_bound / n;
  return KernelOperator(std::move(lattice), std::move(s));
}

double h_norm(const KernelOperator& q) {
  const double hs = hs_norm(q);
  const double cn = coulomb_norm(density_of(q));
  return std::sqrt(hs * hs + cn * cn);
}

namespace {
constexpr char kCheckpointMagic[4] = {'B', 'D', 'F', 'K'};
constexpr std::uint32_t kCheckpointVersion = 1;
static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

template <typename T>
void write_pod(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
void read_pod(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof v);
}
}  // namespace

void save_checkpoint(const KernelOperator& q, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot open checkpoint for writing: " + path);
  const MomentumLattice& lat = q.lattice();
  const std::uint64_t blocks =
      static_cast<std::uint64_t>(lat.size()) * lat.size();
  out.write(kCheckpointMagic, 4);
  write_pod(out, kCheckpointVersion);
  const double cutoff = lat.cutoff();
  write_pod(out, cutoff);
  const std::uint32_t n = static_cast<std::uint32_t>(lat.n_per_axis());
  write_pod(out, n);
  write_pod(out, blocks);
  const double inv_h3 = 1.0 / lat.cell_volume();
  for (int i = 0; i < lat.size(); ++i) {
    for (int j = 0; j < lat.size(); ++j) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          const std::complex<double> z =
              q.matrix()(4 * i + a, 4 * j + b) * inv_h3;
          const double re = z.real(), im = z.imag();
          write_pod(out, re);
          write_pod(out, im);
        }
      }
    }
  }
  if (!out) throw CheckpointError("checkpoint write failed: " + path);
}

KernelOperator load_checkpoint(
    const std::string& path, std::shared_ptr<const MomentumLattice> lattice) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kCheckpointMagic, 4) != 0)
    throw CheckpointError("checkpoint: bad magic");
  std::uint32_t version = 0;
  read_pod(in, version);
  if (version != kCheckpointVersion)
    throw CheckpointError("checkpoint: unsupported version");
  double cutoff = 0.0;
  std::uint32_t n = 0;
  std::uint64_t blocks = 0;
  read_pod(in, cutoff);
  read_pod(in, n);
  read_pod(in, blocks);
  if (cutoff != lattice->cutoff() ||
      n != static_cast<std::uint32_t>(lattice->n_per_axis()))
    throw CheckpointError("checkpoint: lattice parameters do not match");
  const std::uint64_t expect =
      static_cast<std::uint64_t>(lattice->size()) * lattice->size();
  if (blocks != expect) throw CheckpointError("checkpoint: bad block count");
  const double h3 = lattice->cell_volume();
  const int npts = lattice->size();
  Eigen::MatrixXcd s(4 * npts, 4 * npts);
  for (int i = 0; i < npts; ++i) {
    for (int j = 0; j < npts; ++j) {
      for (int a = 0; a < 4; ++a) {
        for (int b = 0; b < 4; ++b) {
          double re = 0.0, im = 0.0;
          read_pod(in, re);
          read_pod(in, im);
          s(4 * i + a, 4 * j + b) = h3 * std::complex<double>(re, im);
        }
      }
    }
  }
  if (!in) throw CheckpointError("checkpoint: truncated data");
  return KernelOperator(std::move(lattice), std::move(s));
}

}  // namespace bdf
