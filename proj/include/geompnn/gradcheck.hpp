#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace geompnn {

struct GradCheckResult {
  std::string name;
  double max_rel_error = 0.0;
  bool passed(double tol = 1e-5) const { return max_rel_error <= tol; }
};

/// Compares an analytic gradient against central finite differences
/// (f(theta + eps e_i) - f(theta - eps e_i)) / (2 eps), returning
/// max_i |ad_i - fd_i| / max(|ad_i|, |fd_i|, 1).
double max_rel_grad_error(std::span<const double> theta,
                          const std::function<double(std::span<const double>)>& f,
                          std::span<const double> analytic, double eps = 1e-6);

/// Finite-difference checks for every tape primitive, with repeated gather
/// indices and empty mean-groups included. All results should pass 1e-5.
std::vector<GradCheckResult> primitive_gradchecks(std::uint64_t seed);

/// End-to-end check: surface-encoder + surface-to-volume forward and loss on
/// a 30-node toy case, differentiated with respect to all parameters.
GradCheckResult model_gradcheck(std::uint64_t seed);

/// Negative control: a deliberately corrupted analytic gradient must fail.
bool gradcheck_detects_wrong_gradient(std::uint64_t seed);

}  // namespace geompnn
