#ifndef BDF_IO_HPP
#define BDF_IO_HPP

#include <string>

#include "bdf/dynamics.hpp"

namespace bdf {

// Emitted a non-finite number; message carries the location.
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Writes the diagnostics rows as CSV with schema
//   t,energy,charge_trQ3,projector_residual,hs_norm_Q,
//   x1,y1,z1,vx1,vy1,vz1,...
// Deterministic formatting (%.17g); byte-identical for identical runs.
// Throws NonFiniteError if any value is NaN/Inf, ConfigError on I/O failure.
void write_trajectory_csv(const std::string& path, const Trajectory& traj);

}  // namespace bdf

#endif
