#include "bdf/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "bdf/errors.hpp"

namespace bdf {

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v))
    throw NonFiniteError("non-finite value at " + where);
}

}  // namespace

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  const std::size_t n_nuclei =
      traj.rows.empty() ? 0 : traj.rows.front().nuclei.size() / 6;

  std::ofstream out(path, std::ios::binary);  // \n line endings everywhere
  if (!out) throw ConfigError("cannot open for writing: " + path);

  out << "t,energy,charge_trQ3,projector_residual,hs_norm_Q";
  for (std::size_t k = 1; k <= n_nuclei; ++k)
    out << ",x" << k << ",y" << k << ",z" << k << ",vx" << k << ",vy" << k
        << ",vz" << k;
  out << "\n";

  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    const DiagnosticsRow& row = traj.rows[r];
    const std::string loc = "row " + std::to_string(r) + " (t=" +
                            format_double(row.t) + ")";
    require_finite(row.t, loc + " column t");
    require_finite(row.energy, loc + " column energy");
    require_finite(row.charge_tr_q3, loc + " column charge_trQ3");
    require_finite(row.projector_residual, loc + " column projector_residual");
    require_finite(row.hs_norm_q, loc + " column hs_norm_Q");
    out << format_double(row.t) << ',' << format_double(row.energy) << ','
        << format_double(row.charge_tr_q3) << ','
        << format_double(row.projector_residual) << ','
        << format_double(row.hs_norm_q);
    for (std::size_t c = 0; c < row.nuclei.size(); ++c) {
      require_finite(row.nuclei[c],
                     loc + " nucleus column " + std::to_string(c));
      out << ',' << format_double(row.nuclei[c]);
    }
    out << "\n";
  }
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace bdf
