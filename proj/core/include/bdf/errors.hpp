#ifndef BDF_ERRORS_HPP
#define BDF_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bdf {

// Invalid construction parameters or malformed configuration input.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binary operation on operators/densities living on different lattices.
struct LatticeMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Q + P0 has an eigenvalue too close to 1/2: no nearest projector.
struct RetractionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Malformed or incompatible checkpoint file.
struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bdf

#endif
