#include "bdf/dynamics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bdf/errors.hpp"

namespace bdf {

namespace {

// tr_P0(D0 Q) from the diagonal blocks; composition with a diagonal symbol
// never leaves the diagonal.
double split_trace_d0(const KernelOperator& q) {
  const MomentumLattice& lat = q.lattice();
  std::complex<double> acc = 0.0;
  for (int i = 0; i < lat.size(); ++i) {
    const Eigen::Matrix4cd p0 = p0_symbol(lat.point(i));
    const Eigen::Matrix4cd pp = Eigen::Matrix4cd::Identity() - p0;
    const Eigen::Matrix4cd a =
        d0_symbol(lat.point(i)) * q.matrix().block<4, 4>(4 * i, 4 * i);
    acc += (p0 * a * p0).trace() + (pp * a * pp).trace();
  }
  return acc.real();
}

double kinetic_energy(std::span<const NucleusState> nuclei) {
  double t = 0.0;
  for (const NucleusState& n : nuclei) t += 0.5 * n.m * n.v.squaredNorm();
  return t;
}

struct JointDerivative {
  Eigen::MatrixXcd dq;
  std::vector<Eigen::Vector3d> dx;
  std::vector<Eigen::Vector3d> dv;
};

JointDerivative joint_rhs(const SystemState& s, double alpha) {
  JointDerivative d;
  d.dq = bdf_rhs(s.q, s.nuclei, alpha).matrix();
  const auto nd = newton_rhs(s.nuclei, s.q, alpha);
  d.dx.resize(nd.size());
  d.dv.resize(nd.size());
  for (std::size_t k = 0; k < nd.size(); ++k) {
    d.dx[k] = nd[k].dx;
    d.dv[k] = nd[k].dv;
  }
  return d;
}

SystemState advance(const SystemState& s, const JointDerivative& d,
                    double factor) {
  SystemState out = s;
  out.q = KernelOperator(s.q.lattice_ptr(), s.q.matrix() + factor * d.dq);
  for (std::size_t k = 0; k < s.nuclei.size(); ++k) {
    out.nuclei[k].x += factor * d.dx[k];
    out.nuclei[k].v += factor * d.dv[k];
  }
  return out;
}

DiagnosticsRow make_row(const SystemState& s, double alpha, bool extended) {
  DiagnosticsRow row;
  row.t = s.t;
  row.energy = total_energy(s, alpha);
  row.charge_tr_q3 = charge_tr_q3(s.q);
  row.projector_residual = projector_residual(s.q);
  row.hs_norm_q = hs_norm(s.q);
  row.nuclei.reserve(6 * s.nuclei.size());
  for (const NucleusState& n : s.nuclei) {
    for (int c = 0; c < 3; ++c) row.nuclei.push_back(n.x[c]);
    for (int c = 0; c < 3; ++c) row.nuclei.push_back(n.v[c]);
  }
  if (extended) {
    row.split_trace_q = p0_split_trace(s.q);
    row.split_trace_d0q = split_trace_d0(s.q);
    row.coercivity_slack = bdf::coercivity_slack(s, alpha);
  }
  return row;
}

}  // namespace

double total_energy(const SystemState& s, double alpha) {
  double e = split_trace_d0(s.q) + kinetic_energy(s.nuclei);
  if (alpha != 0.0) {
    const ChargeDensity rho = density_of(s.q);
    e += 0.5 * alpha * coulomb_inner(rho, rho).real();
    e -= 0.5 * alpha * exchange_energy(s.q);
    if (!s.nuclei.empty()) {
      const ChargeDensity nu = nuclear_density(s.q.lattice_ptr(), s.nuclei);
      e -= alpha * coulomb_inner(rho, nu).real();
      for (std::size_t i = 0; i < s.nuclei.size(); ++i) {
        const ChargeDensity ni = gaussian_density(
            s.q.lattice_ptr(), s.nuclei[i].shape, s.nuclei[i].z, s.nuclei[i].x);
        for (std::size_t j = i + 1; j < s.nuclei.size(); ++j) {
          const ChargeDensity nj =
              gaussian_density(s.q.lattice_ptr(), s.nuclei[j].shape,
                               s.nuclei[j].z, s.nuclei[j].x);
          e += alpha * coulomb_inner(ni, nj).real();
        }
      }
    }
  }
  return e;
}

double coercivity_slack(const SystemState& s, double alpha) {
  const double e = total_energy(s, alpha);
  double lhs = e;
  double rhs = (1.0 - alpha * std::numbers::pi / 4.0) * split_trace_d0(s.q) +
               kinetic_energy(s.nuclei);
  if (alpha != 0.0) {
    ChargeDensity diffrho = density_of(s.q);
    for (const NucleusState& n : s.nuclei) {
      const ChargeDensity nk =
          gaussian_density(s.q.lattice_ptr(), n.shape, n.z, n.x);
      const double cn = coulomb_norm(nk);
      lhs += 0.5 * alpha * cn * cn;
      diffrho -= nk;
    }
    const double dn = coulomb_norm(diffrho);
    rhs += 0.5 * alpha * dn * dn;
  }
  return lhs - rhs;
}

SystemState rk4_step(const SystemState& s, double dt, double alpha,
                     bool retract) {
  if (!(dt > 0.0)) throw ConfigError("rk4_step: dt must be positive");
  const JointDerivative k1 = joint_rhs(s, alpha);
  const JointDerivative k2 = joint_rhs(advance(s, k1, 0.5 * dt), alpha);
  const JointDerivative k3 = joint_rhs(advance(s, k2, 0.5 * dt), alpha);
  const JointDerivative k4 = joint_rhs(advance(s, k3, dt), alpha);

  SystemState out = s;
  const double w = dt / 6.0;
  out.q = KernelOperator(
      s.q.lattice_ptr(),
      s.q.matrix() + w * (k1.dq + 2.0 * k2.dq + 2.0 * k3.dq + k4.dq));
  for (std::size_t k = 0; k < s.nuclei.size(); ++k) {
    out.nuclei[k].x +=
        w * (k1.dx[k] + 2.0 * k2.dx[k] + 2.0 * k3.dx[k] + k4.dx[k]);
    out.nuclei[k].v +=
        w * (k1.dv[k] + 2.0 * k2.dv[k] + 2.0 * k3.dv[k] + k4.dv[k]);
  }
  out.t = s.t + dt;
  if (retract) out.q = retract_to_projector(out.q);
  return out;
}

Trajectory simulate(const SystemState& s0, double dt, double t_final,
                    double alpha, const SimulateOptions& opts) {
  if (!(dt > 0.0) || !(t_final > 0.0))
    throw ConfigError("simulate: dt and t_final must be positive");
  const int nsteps = static_cast<int>(std::llround(t_final / dt));
  const int sample = std::max(1, opts.sample_every);

  Trajectory traj{.rows = {},
                  .final_state = s0,
                  .aborted = false,
                  .abort_reason = {}};
  traj.rows.push_back(make_row(s0, alpha, opts.extended_diagnostics));

  SystemState s = s0;
  for (int step = 1; step <= nsteps; ++step) {
    const bool retract =
        opts.retraction && (step % std::max(1, opts.retraction_period) == 0);
    s = rk4_step(s, dt, alpha, retract);
    s.t = s0.t + step * dt;  // avoid accumulated roundoff in the clock
    const double hs = hs_norm(s.q);
    if (!(hs <= opts.divergence_bound)) {
      traj.aborted = true;
      traj.abort_reason = "hs_norm(Q) = " + std::to_string(hs) +
                          " exceeded divergence bound after step " +
                          std::to_string(step);
      traj.rows.push_back(make_row(s, alpha, opts.extended_diagnostics));
      traj.final_state = s;
      return traj;
    }
    if (step % sample == 0 || step == nsteps)
      traj.rows.push_back(make_row(s, alpha, opts.extended_diagnostics));
  }
  traj.final_state = s;
  return traj;
}

// ---------------------------------------------------------------------------
// Picard / Schauder coupling iteration
// ---------------------------------------------------------------------------

namespace {

// Nuclear trajectories on uniform knots with cubic Hermite dense output.
struct NuclearPath {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<std::vector<Eigen::Vector3d>> x;  // [knot][nucleus]
  std::vector<std::vector<Eigen::Vector3d>> v;

  int knots() const { return static_cast<int>(x.size()); }

  void eval(double t, std::vector<Eigen::Vector3d>& xo,
            std::vector<Eigen::Vector3d>& vo) const {
    const int n = knots() - 1;
    double u = (t - t0) / dt;
    int i = std::clamp(static_cast<int>(std::floor(u)), 0, n - 1);
    const double s = u - i;
    const std::size_t m = x[0].size();
    xo.resize(m);
    vo.resize(m);
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
    const double h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s);
    const double h11 = s * s * (s - 1);
    const double g00 = 6 * s * (s - 1);
    const double g10 = (1 - s) * (1 - 3 * s);
    const double g01 = -6 * s * (s - 1);
    const double g11 = s * (3 * s - 2);
    for (std::size_t k = 0; k < m; ++k) {
      xo[k] = h00 * x[i][k] + dt * h10 * v[i][k] + h01 * x[i + 1][k] +
              dt * h11 * v[i + 1][k];
      vo[k] = (g00 / dt) * x[i][k] + g10 * v[i][k] + (g01 / dt) * x[i + 1][k] +
              g11 * v[i + 1][k];
    }
  }
};

NuclearPath free_motion_path(std::span<const NucleusState> nuclei, double t0,
                             double dt, int nsteps) {
  NuclearPath p;
  p.t0 = t0;
  p.dt = dt;
  p.x.resize(nsteps + 1);
  p.v.resize(nsteps + 1);
  for (int i = 0; i <= nsteps; ++i) {
    p.x[i].resize(nuclei.size());
    p.v[i].resize(nuclei.size());
    for (std::size_t k = 0; k < nuclei.size(); ++k) {
      p.x[i][k] = nuclei[k].x + (i * dt) * nuclei[k].v;
      p.v[i][k] = nuclei[k].v;
    }
  }
  return p;
}

// Electron density knots with 4-point Lagrange dense output.
struct DensityKnots {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<Eigen::VectorXcd> rho;

  Eigen::VectorXcd eval(double t) const {
    const int n = static_cast<int>(rho.size()) - 1;
    const double u = (t - t0) / dt;
    int i = std::clamp(static_cast<int>(std::floor(u)), 0, n - 1);
    if (n >= 3) {
      int base = std::clamp(i - 1, 0, n - 3);
      const double s = u - base;
      Eigen::VectorXcd out = Eigen::VectorXcd::Zero(rho[0].size());
      for (int j = 0; j < 4; ++j) {
        double lj = 1.0;
        for (int l = 0; l < 4; ++l)
          if (l != j) lj *= (s - l) / (j - l);
        out += lj * rho[base + j];
      }
      return out;
    }
    const double s = u - i;  // linear fallback for very short horizons
    return (1.0 - s) * rho[i] + s * rho[i + 1];
  }
};

struct BdfPassResult {
  Eigen::MatrixXcd q_final;
  DensityKnots rho;
};

// Solve the BDF subsystem with frozen nuclear paths.
BdfPassResult bdf_pass(const SystemState& s0, double dt, int nsteps,
                       double alpha, const NuclearPath& path) {
  auto lattice = s0.q.lattice_ptr();
  std::vector<NucleusState> stage = s0.nuclei;
  std::vector<Eigen::Vector3d> xs, vs;

  auto rhs_at = [&](const Eigen::MatrixXcd& sq, double t) {
    path.eval(t, xs, vs);
    for (std::size_t k = 0; k < stage.size(); ++k) stage[k].x = xs[k];
    return bdf_rhs(KernelOperator(lattice, sq), stage, alpha).matrix();
  };

  BdfPassResult res;
  res.rho.t0 = s0.t;
  res.rho.dt = dt;
  res.rho.rho.reserve(nsteps + 1);

  Eigen::MatrixXcd sq = s0.q.matrix();
  res.rho.rho.push_back(density_of(KernelOperator(lattice, sq)).values());
  for (int step = 0; step < nsteps; ++step) {
    const double t = s0.t + step * dt;
    const Eigen::MatrixXcd k1 = rhs_at(sq, t);
    const Eigen::MatrixXcd k2 = rhs_at(sq + (0.5 * dt) * k1, t + 0.5 * dt);
    const Eigen::MatrixXcd k3 = rhs_at(sq + (0.5 * dt) * k2, t + 0.5 * dt);
    const Eigen::MatrixXcd k4 = rhs_at(sq + dt * k3, t + dt);
    sq += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    res.rho.rho.push_back(density_of(KernelOperator(lattice, sq)).values());
  }
  res.q_final = std::move(sq);
  return res;
}

// Solve the Newton subsystem with the frozen electron density.
NuclearPath newton_pass(const SystemState& s0, double dt, int nsteps,
                        double alpha, const DensityKnots& rho) {
  auto lattice = s0.q.lattice_ptr();
  NuclearPath p;
  p.t0 = s0.t;
  p.dt = dt;
  p.x.assign(nsteps + 1, {});
  p.v.assign(nsteps + 1, {});

  std::vector<NucleusState> cur = s0.nuclei;
  auto record = [&](int knot) {
    p.x[knot].resize(cur.size());
    p.v[knot].resize(cur.size());
    for (std::size_t k = 0; k < cur.size(); ++k) {
      p.x[knot][k] = cur[k].x;
      p.v[knot][k] = cur[k].v;
    }
  };
  record(0);

  auto rhs_at = [&](const std::vector<NucleusState>& nuc, double t) {
    const ChargeDensity rq(lattice, rho.eval(t));
    return newton_rhs(nuc, rq, alpha);
  };
  auto shifted = [&](const std::vector<NucleusState>& nuc,
                     const std::vector<NewtonDerivative>& d, double f) {
    std::vector<NucleusState> out = nuc;
    for (std::size_t k = 0; k < out.size(); ++k) {
      out[k].x += f * d[k].dx;
      out[k].v += f * d[k].dv;
    }
    return out;
  };

  for (int step = 0; step < nsteps; ++step) {
    const double t = s0.t + step * dt;
    const auto k1 = rhs_at(cur, t);
    const auto k2 = rhs_at(shifted(cur, k1, 0.5 * dt), t + 0.5 * dt);
    const auto k3 = rhs_at(shifted(cur, k2, 0.5 * dt), t + 0.5 * dt);
    const auto k4 = rhs_at(shifted(cur, k3, dt), t + dt);
    for (std::size_t k = 0; k < cur.size(); ++k) {
      cur[k].x += (dt / 6.0) *
                  (k1[k].dx + 2.0 * k2[k].dx + 2.0 * k3[k].dx + k4[k].dx);
      cur[k].v += (dt / 6.0) *
                  (k1[k].dv + 2.0 * k2[k].dv + 2.0 * k3[k].dv + k4[k].dv);
    }
    record(step + 1);
  }
  return p;
}

double path_distance(const NuclearPath& a, const NuclearPath& b) {
  double sup = 0.0;
  for (int i = 0; i < a.knots(); ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < a.x[i].size(); ++k)
      d += (a.x[i][k] - b.x[i][k]).norm();
    sup = std::max(sup, d);
  }
  return sup;
}

}  // namespace

PicardResult picard_schauder(const SystemState& s0, double tau, double dt,
                             double alpha, const PicardOptions& opts) {
  if (!(tau > 0.0) || !(dt > 0.0))
    throw ConfigError("picard_schauder: tau and dt must be positive");
  const int nsteps = std::max(1, static_cast<int>(std::llround(tau / dt)));

  PicardReport report;
  report.interpolation =
      "cubic Hermite nuclear dense output, 4-point Lagrange density knots";

  NuclearPath prev = free_motion_path(s0.nuclei, s0.t, dt, nsteps);
  BdfPassResult bdf = bdf_pass(s0, dt, nsteps, alpha, prev);
  bool converged = false;
  NuclearPath cur = prev;
  for (int iter = 0; iter < opts.max_iter; ++iter) {
    cur = newton_pass(s0, dt, nsteps, alpha, bdf.rho);
    const double dist = path_distance(cur, prev);
    report.distances.push_back(dist);
    report.iterations = iter + 1;
    prev = cur;
    if (dist < opts.tol) {
      converged = true;
      break;
    }
    bdf = bdf_pass(s0, dt, nsteps, alpha, cur);
  }
  report.converged = converged;

  // final BDF solve against the converged nuclear path
  bdf = bdf_pass(s0, dt, nsteps, alpha, cur);
  KernelOperator q_final(s0.q.lattice_ptr(), bdf.q_final);

  // compare against the direct coupled integration
  SimulateOptions dopts;
  dopts.sample_every = 1;
  dopts.extended_diagnostics = false;
  const Trajectory direct = simulate(s0, dt, nsteps * dt, alpha, dopts);
  double sup = 0.0;
  for (int i = 0; i < cur.knots() && i < static_cast<int>(direct.rows.size());
       ++i) {
    double d = 0.0;
    for (std::size_t k = 0; k < s0.nuclei.size(); ++k) {
      const Eigen::Vector3d xd(direct.rows[i].nuclei[6 * k],
                               direct.rows[i].nuclei[6 * k + 1],
                               direct.rows[i].nuclei[6 * k + 2]);
      d += (cur.x[i][k] - xd).norm();
    }
    sup = std::max(sup, d);
  }
  report.fixed_vs_direct_positions = sup;
  report.fixed_vs_direct_q_hs =
      (q_final.matrix() - direct.final_state.q.matrix()).norm();

  // assemble the fixed-point trajectory
  Trajectory traj{.rows = {},
                  .final_state = s0,
                  .aborted = false,
                  .abort_reason = {}};
  SystemState fs = s0;
  fs.q = q_final;
  fs.t = s0.t + nsteps * dt;
  for (std::size_t k = 0; k < fs.nuclei.size(); ++k) {
    fs.nuclei[k].x = cur.x[nsteps][k];
    fs.nuclei[k].v = cur.v[nsteps][k];
  }
  traj.final_state = fs;
  traj.rows.push_back(make_row(fs, alpha, false));
  return PicardResult{std::move(traj), std::move(report)};
}

// ---------------------------------------------------------------------------
// Constants, divergence probe, initial states
// ---------------------------------------------------------------------------

ConstantReport estimate_constants(
    std::shared_ptr<const MomentumLattice> lattice,
    std::span<const NucleusState> nuclei, double alpha, double c_e,
    double qi_norm, int samples, std::uint64_t seed) {
  if (!(c_e > 1.0)) throw ConfigError("estimate_constants: C^e must be > 1");
  if (samples < 1) throw ConfigError("estimate_constants: samples must be >= 1");

  ConstantReport rep;
  rep.c_e = c_e;
  rep.qi_norm = qi_norm;
  rep.samples = samples;

  for (const NucleusState& n : nuclei) {
    rep.c_f = std::max(rep.c_f, n.z * gaussian_coulomb_norm(n.shape));
    rep.c_f = std::max(rep.c_f, n.z * gaussian_gradient_coulomb_norm(n.shape));
  }

  // D_x = D0 - alpha * nuclear attraction (Q-independent part)
  KernelOperator dx = free_dirac_op(lattice);
  if (alpha != 0.0 && !nuclei.empty())
    dx -= alpha * nuclear_potential_op(lattice, nuclei).op;

  const double radius = qi_norm > 0.0 ? c_e * qi_norm : 1.0;
  const double e_lambda = dirac_energy(
      Eigen::Vector3d(lattice->cutoff(), 0.0, 0.0));

  for (int i = 0; i < samples; ++i) {
    const KernelOperator q = random_hs_sample(lattice, radius, seed + i);
    const KernelOperator qp =
        random_hs_sample(lattice, radius, seed + samples + i);
    const double nq = h_norm(q);
    const double nqp = h_norm(qp);

    rep.c_big_f =
        std::max(rep.c_big_f, h_norm(bdf_rhs(q, nuclei, alpha)) / nq);
    rep.c1 = std::max(rep.c1, h_norm(commutator(dx, q)) / nq);

    if (alpha != 0.0) {
      // V'_Q: the Q-generated part of the potential (no nuclear term)
      const ChargeDensity rho = density_of(q);
      KernelOperator vq = direct_potential_op(rho).op;
      vq -= exchange_op(q);
      vq *= alpha;
      rep.c2 = std::max(rep.c2, h_norm(commutator(vq, qp)) / (nq * nqp));
      const KernelOperator p0 = vacuum_projector_op(lattice);
      rep.c3 = std::max(rep.c3, h_norm(commutator(vq, p0)) / nq);
      const double rho_norm = coulomb_norm(rho);
      if (rho_norm > 0.0)
        rep.kappa = std::max(
            rep.kappa,
            op_norm_bound(direct_potential_op(rho).op) / (e_lambda * rho_norm));
    }
  }

  // largest tau with 1/(1 - tau C_F) < C^e, held strictly
  const double inf = std::numeric_limits<double>::infinity();
  double tau1 = inf;
  if (rep.c_big_f > 0.0) tau1 = 0.999 * (1.0 - 1.0 / c_e) / rep.c_big_f;

  double tau2 = inf;
  bool all_v_zero = true;
  for (const NucleusState& n : nuclei)
    if (n.v.norm() > 0.0) all_v_zero = false;
  if (qi_norm == 0.0 && all_v_zero) {
    rep.tau2_unconstrained = true;
  } else {
    for (const NucleusState& n : nuclei) {
      const double denom = alpha * rep.c_f * (c_e * qi_norm + rep.c_f);
      if (denom > 0.0) tau2 = std::min(tau2, n.m * n.v.norm() / denom);
    }
  }
  rep.tau_admissible = std::min(tau1, tau2);
  return rep;
}

GrowthReport lipschitz_divergence_probe(const SystemState& s0, double delta,
                                        double dt, double t_final,
                                        double alpha, std::uint64_t seed,
                                        double tolerance) {
  SystemState a = s0;
  SystemState b = s0;
  if (delta > 0.0) {
    b.q += delta * random_hs_sample(s0.q.lattice_ptr(), 1.0, seed);
    if (!b.nuclei.empty()) b.nuclei[0].x += Eigen::Vector3d(delta, 0.0, 0.0);
  }

  auto gap = [](const SystemState& u, const SystemState& v) {
    double g = (u.q.matrix() - v.q.matrix()).norm();
    for (std::size_t k = 0; k < u.nuclei.size(); ++k)
      g += (u.nuclei[k].x - v.nuclei[k].x).norm();
    return g;
  };

  GrowthReport rep;
  const int nsteps = static_cast<int>(std::llround(t_final / dt));
  rep.times.push_back(0.0);
  rep.h.push_back(gap(a, b));
  rep.h0 = rep.h[0];
  for (int step = 1; step <= nsteps; ++step) {
    a = rk4_step(a, dt, alpha);
    b = rk4_step(b, dt, alpha);
    rep.times.push_back(step * dt);
    rep.h.push_back(gap(a, b));
  }

  if (rep.h0 == 0.0) {
    rep.rate = 0.0;
    rep.max_excess = 0.0;
    for (double h : rep.h) rep.max_excess = std::max(rep.max_excess, h);
    rep.bounded = rep.max_excess == 0.0;
    return rep;
  }

  // least-squares slope of log h(t)
  double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < rep.h.size(); ++i) {
    if (rep.h[i] <= 0.0) continue;
    const double t = rep.times[i];
    const double l = std::log(rep.h[i]);
    st += t;
    sl += l;
    stt += t * t;
    stl += t * l;
    ++n;
  }
  rep.rate = (n * stl - st * sl) / (n * stt - st * st);
  rep.max_excess = 0.0;
  for (std::size_t i = 0; i < rep.h.size(); ++i) {
    const double bound = rep.h0 * std::exp(rep.rate * rep.times[i]);
    rep.max_excess = std::max(rep.max_excess, rep.h[i] / bound - 1.0);
  }
  rep.bounded = rep.max_excess <= tolerance;
  return rep;
}

SystemState build_initial_state(const InitialStateSpec& spec,
                                std::shared_ptr<const MomentumLattice> lattice,
                                std::vector<NucleusState> nuclei,
                                double alpha) {
  SystemState s{KernelOperator::zero(lattice), std::move(nuclei), 0.0};
  switch (spec.kind) {
    case InitialStateSpec::Kind::vacuum:
      break;
    case InitialStateSpec::Kind::perturbed: {
      const KernelOperator a = random_hs_sample(lattice, 1.0, spec.seed);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.matrix());
      const int d = a.dim();
      Eigen::VectorXcd phases(d);
      for (int i = 0; i < d; ++i)
        phases[i] = std::exp(
            std::complex<double>(0.0, spec.epsilon * es.eigenvalues()[i]));
      Eigen::MatrixXcd u =
          es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
      const Eigen::MatrixXcd p0 = vacuum_projector_op(lattice).matrix();
      Eigen::MatrixXcd sq(d, d);
      sq.noalias() = u * p0 * u.adjoint();
      sq -= p0;
      s.q = KernelOperator(lattice, std::move(sq));
      break;
    }
    case InitialStateSpec::Kind::charged: {
      const int npos = 2 * lattice->size();
      if (spec.q < 0 || spec.q > npos)
        throw ConfigError(
            "initial_state: charge exceeds positive-subspace dimension");
      if (spec.q == 0) break;
      const Eigen::MatrixXcd p0 = vacuum_projector_op(lattice).matrix();
      Eigen::MatrixXcd h = free_dirac_op(lattice).matrix();
      if (alpha != 0.0 && !s.nuclei.empty())
        h -= alpha * nuclear_potential_op(lattice, s.nuclei).op.matrix();
      const int d = static_cast<int>(h.rows());
      const Eigen::MatrixXcd pp = Eigen::MatrixXcd::Identity(d, d) - p0;
      // block-diagonal shift pushes the vacuum subspace above the bound
      // states so the lowest eigenvectors live in the positive subspace
      const double shift =
          10.0 * dirac_energy(Eigen::Vector3d(lattice->cutoff(), 0.0, 0.0)) +
          10.0;
      Eigen::MatrixXcd m(d, d);
      m.noalias() = pp * h * pp;
      m += shift * p0;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m);
      Eigen::MatrixXcd sq = Eigen::MatrixXcd::Zero(d, d);
      for (int i = 0; i < spec.q; ++i) {
        const Eigen::VectorXcd c = es.eigenvectors().col(i);
        sq.noalias() += c * c.adjoint();
      }
      s.q = KernelOperator(lattice, std::move(sq));
      break;
    }
  }
  return s;
}

}  // namespace bdf
