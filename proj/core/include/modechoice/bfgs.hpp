#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace modechoice {

/// Objective returning f(x) and writing its gradient into the second argument.
using GradientObjective = std::function<double(std::span<const double>, std::span<double>)>;

struct BfgsOptions {
  std::size_t max_iterations = 500;
  /// Convergence when the gradient infinity-norm falls below this.
  double gradient_tolerance = 1e-6;
  std::size_t max_backtracks = 60;
};

struct BfgsResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::string message;
};

/// Dense BFGS minimization with an Armijo backtracking line search. The
/// sufficient-decrease test tolerates round-off in f (a few ulps of |f|) so
/// the iteration can keep reducing the gradient once f has flattened out
/// at machine precision. Throws EstimationError when f(x0) is not finite.
BfgsResult minimize_bfgs(const GradientObjective& objective, std::vector<double> x0,
                         const BfgsOptions& options = {});

}  // namespace modechoice
