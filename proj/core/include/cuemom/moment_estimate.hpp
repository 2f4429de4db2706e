#pragma once

#include <map>
#include <string>
#include <vector>

namespace cuemom {

enum class Method {
  closed_form,
  quadrature,
  mcmc,
  cue_direct,
  kernel,
  painleve,
  bessel_det,
};

const char* method_name(Method m);

// Every numerical route returns one of these: the estimate, a nonnegative
// absolute error (statistical SE, quadrature self-estimate, or extrapolation
// spread -- whichever the route produces), and enough metadata to audit it.
struct MomentEstimate {
  double value = 0.0;
  double abs_error = 0.0;
  Method method = Method::closed_form;
  std::map<std::string, double> metadata;
  std::vector<std::string> warnings;
};

inline const char* method_name(Method m) {
  switch (m) {
    case Method::closed_form: return "closed_form";
    case Method::quadrature: return "quadrature";
    case Method::mcmc: return "mcmc";
    case Method::cue_direct: return "cue_direct";
    case Method::kernel: return "kernel";
    case Method::painleve: return "painleve";
    case Method::bessel_det: return "bessel_det";
  }
  return "unknown";
}

}  // namespace cuemom
