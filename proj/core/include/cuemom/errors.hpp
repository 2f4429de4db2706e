#pragma once

#include <stdexcept>
#include <string>

namespace cuemom {

// Requested quantity does not exist (moment outside its finite range,
// integral that provably diverges). Distinct from a domain_error on inputs:
// the parameters are representable, the limit just is not finite.
struct divergence_error : std::runtime_error {
  explicit divergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical procedure failed to reach its target (refinement stalled,
// extrapolation inconsistent, FD resolution dominates the result).
struct convergence_error : std::runtime_error {
  explicit convergence_error(const std::string& msg) : std::runtime_error(msg) {}
};

// ODE/series branch bookkeeping failed: degenerate branch parameter,
// inconsistent resonant order, or sign continuity lost mid-integration.
struct branch_error : std::runtime_error {
  explicit branch_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cuemom
