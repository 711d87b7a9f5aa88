#pragma once
#include <stdexcept>
#include <string>

namespace stab {

// Structured failure cause, so callers can dispatch on it (CLI maps these to exit 2).
enum class ErrCode {
  invalid_argument,   // caller broke a precondition
  mesh_resolution,    // grading cannot satisfy the requested cluster density
  pivot_degeneracy,   // banded LU hit a singular-to-tolerance pivot
  divergence,         // an iteration stopped contracting
  magnitude_floor,    // a quantity required to be bounded away from zero was not
  unresolved_layer,   // mesh too coarse for the boundary layer of this problem
  regime_strain,      // parameters outside the validated band of the chosen regime
  assumption,         // shear profile violates an admissibility assumption
  io,                 // file / format problems
};

const char* err_code_name(ErrCode c);

struct StabError : std::runtime_error {
  ErrCode code;
  double payload;  // e.g. offending pivot magnitude, divergence ratio

  StabError(ErrCode c, const std::string& msg, double payload_ = 0.0)
      : std::runtime_error(msg), code(c), payload(payload_) {}
};

}  // namespace stab
