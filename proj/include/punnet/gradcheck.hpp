#pragma once

// Central finite-difference gradient verification. The numeric side never
// touches the tape: it re-runs the forward closure with perturbed parameter
// values, so it stays an independent reference for the analytic pass.

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "punnet/tensor.hpp"

namespace punnet {

struct GradCheckReport {
  double max_rel_err = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t coords_checked = 0;

  bool passes(double tol) const { return max_rel_err < tol; }
};

// `forward` must rebuild the loss from the current parameter values on every
// call. The relative error denominator is floored: coordinates whose true
// gradient sits below `scale_floor` are held to the absolute tolerance
// scale_floor * tol instead, which keeps the check above the O(h^2 f''')
// truncation error of the central difference itself.
template <typename T>
GradCheckReport grad_check(const std::vector<std::pair<std::string, Tensor<T>>>& params,
                           const std::function<Tensor<T>()>& forward, double h = 1e-5,
                           double scale_floor = 1e-2) {
  Tensor<T> loss = forward();
  backward(loss);

  std::vector<std::vector<T>> analytic;
  analytic.reserve(params.size());
  for (const auto& [name, p] : params) {
    analytic.push_back(p.has_grad() ? p.grad() : std::vector<T>(p.size(), T(0)));
  }

  GradCheckReport report;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor<T> p = params[pi].second;
    auto& value = p.mutable_value();
    for (std::size_t j = 0; j < value.size(); ++j) {
      const T saved = value[j];
      value[j] = saved + static_cast<T>(h);
      const double f_plus = static_cast<double>(forward().item());
      value[j] = saved - static_cast<T>(h);
      const double f_minus = static_cast<double>(forward().item());
      value[j] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * h);
      const double a = static_cast<double>(analytic[pi][j]);
      const double denom = std::max({std::abs(a), std::abs(numeric), scale_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++report.coords_checked;
      if (rel > report.max_rel_err) {
        report.max_rel_err = rel;
        report.worst_param = params[pi].first;
        report.worst_index = j;
      }
    }
  }
  return report;
}

}  // namespace punnet
