#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace carpet {

/// Planar point, stored as a complex number so rotations and conjugation are
/// one multiplication / one call.
using Point = std::complex<double>;

/// Thrown when a requested construction would exceed the configured size cap.
class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when geometric snapping finds an inconsistent merge chain, which
/// indicates a construction bug rather than bad input.
class ToleranceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A geometric symmetry did not map the object onto itself.
class SymmetryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default cap on the number of level-m cells any construction may enumerate.
inline constexpr std::size_t kDefaultCellCap = 20'000'000;

/// Format a double with 17 significant digits (round-trips exactly).
std::string fmt17(double v);

}  // namespace carpet
