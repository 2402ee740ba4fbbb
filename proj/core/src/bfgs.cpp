#include "modechoice/bfgs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "modechoice/errors.hpp"

namespace modechoice {
namespace {

double inf_norm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

BfgsResult minimize_bfgs(const GradientObjective& objective, std::vector<double> x0,
                         const BfgsOptions& options) {
  const auto n = static_cast<Eigen::Index>(x0.size());
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(x0.data(), n);
  Eigen::VectorXd g(n);
  BfgsResult out;

  const auto eval = [&](const Eigen::VectorXd& at, Eigen::VectorXd& grad) {
    ++out.evaluations;
    return objective(std::span<const double>(at.data(), static_cast<std::size_t>(n)),
                     std::span<double>(grad.data(), static_cast<std::size_t>(n)));
  };

  double f = eval(x, g);
  if (!std::isfinite(f) || !all_finite(g)) {
    throw EstimationError("objective or gradient is not finite at the starting point");
  }

  constexpr double kArmijo = 1e-4;
  const double eps = std::numeric_limits<double>::epsilon();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
  bool scaled = false;
  std::size_t it = 0;

  const auto finish = [&](bool converged, std::string message) {
    out.x.assign(x.data(), x.data() + n);
    out.gradient.assign(g.data(), g.data() + n);
    out.value = f;
    out.gradient_norm = inf_norm(g);
    out.iterations = it;
    out.converged = converged;
    out.message = std::move(message);
    return out;
  };

  Eigen::VectorXd x_new(n), g_new(n);
  for (; it < options.max_iterations; ++it) {
    if (inf_norm(g) < options.gradient_tolerance) return finish(true, "gradient tolerance reached");

    Eigen::VectorXd p = -h * g;
    double slope = g.dot(p);
    if (!(slope < 0.0)) {
      h.setIdentity();
      scaled = false;
      p = -g;
      slope = g.dot(p);
    }
    // Before any curvature information exists, keep the trial step O(1).
    double alpha = scaled ? 1.0 : std::min(1.0, 1.0 / std::max(inf_norm(p), eps));

    bool accepted = false;
    double f_new = f;
    const double slack = 4.0 * eps * std::abs(f);
    for (std::size_t k = 0; k < options.max_backtracks; ++k) {
      x_new = x + alpha * p;
      f_new = eval(x_new, g_new);
      if (std::isfinite(f_new) && all_finite(g_new) &&
          f_new <= f + kArmijo * alpha * slope + slack) {
        accepted = true;
        break;
      }
      // Quadratic interpolation of the step, safeguarded to [0.1, 0.5].
      double next = 0.5;
      if (std::isfinite(f_new)) {
        const double denom = 2.0 * (f_new - f - alpha * slope);
        if (denom > 0.0) next = std::clamp(-slope * alpha / denom, 0.1, 0.5);
      }
      alpha *= next;
    }

    if (!accepted) {
      if (scaled) {
        // Restart from steepest descent once before giving up.
        h.setIdentity();
        scaled = false;
        continue;
      }
      return finish(false, "line search failed to find an acceptable step");
    }

    const Eigen::VectorXd s = x_new - x;
    const Eigen::VectorXd y = g_new - g;
    x = x_new;
    g = g_new;
    f = f_new;

    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        h = Eigen::MatrixXd::Identity(n, n) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = h * y;
      // H+ = (I - rho s y') H (I - rho y s') + rho s s'
      h += rho * ((1.0 + rho * y.dot(hy)) * (s * s.transpose()) - (hy * s.transpose()) -
                  (s * hy.transpose()));
    }
  }
  if (inf_norm(g) < options.gradient_tolerance) return finish(true, "gradient tolerance reached");
  return finish(false, fmt::format("iteration limit ({}) reached", options.max_iterations));
}

}  // namespace modechoice
