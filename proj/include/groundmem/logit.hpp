#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace groundmem {

/// (phi, correct) pairs.
using LogitData = std::vector<std::pair<double, bool>>;

struct LogitFit {
  double intercept = 0.0;
  double slope = 0.0;
  bool converged = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  std::size_t n = 0;
  std::string diagnostic;  // why the fit did not converge
};

/// Binomial log-likelihood of P(correct) = sigmoid(beta[0] + beta[1] * phi).
double logit_log_likelihood(const Eigen::Vector2d& beta, const LogitData& data);
Eigen::Vector2d logit_gradient(const Eigen::Vector2d& beta, const LogitData& data);
Eigen::Matrix2d logit_hessian(const Eigen::Vector2d& beta, const LogitData& data);

/// Damped Newton ascent. Single-class or tiny inputs return a non-converged
/// fit whose diagnostic starts with "DegenerateData".
LogitFit fit_faithfulness_logit(const LogitData& data, int max_iterations = 100, double tolerance = 1e-8);

}  // namespace groundmem
