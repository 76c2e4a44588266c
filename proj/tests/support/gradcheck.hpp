#pragma once

// Central finite-difference gradient checker. Test-only: it touches nothing
// but the parameter values and the forward graph.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "hoigaze/nd/graph.hpp"

namespace hoigaze::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "param[index]"
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

/// |a - n| / max(|a|, |n|, floor)
inline double relative_error(double analytic, double numeric, double floor) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

using LossBuilder = std::function<nd::Var(nd::Graph&)>;

inline double evaluate_loss(const LossBuilder& build) {
  nd::Graph g;
  return build(g).value()[0];
}

/// Compares backward() against central differences for every scalar of
/// every parameter in `params`.
inline GradCheckResult check_gradients(nd::ParamSet& params, const LossBuilder& build, double h = 1e-5,
                                       double floor = 1e-6) {
  params.zero_grad();
  {
    nd::Graph g;
    g.backward(build(g));
  }
  GradCheckResult result;
  for (nd::Param* p : params.all()) {
    const nd::NdArray analytic = p->grad;
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value[i];
      p->value[i] = saved + h;
      const double up = evaluate_loss(build);
      p->value[i] = saved - h;
      const double down = evaluate_loss(build);
      p->value[i] = saved;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[i], numeric, floor);
      ++result.checked;
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst = p->name + "[" + std::to_string(i) + "]";
        result.worst_analytic = analytic[i];
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace hoigaze::testing
