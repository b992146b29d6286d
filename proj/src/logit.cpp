#include "groundmem/logit.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace groundmem {

namespace {

// log(1 + exp(z)) without overflow.
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double logit_log_likelihood(const Eigen::Vector2d& beta, const LogitData& data) {
  double ll = 0.0;
  for (const auto& [phi, y] : data) {
    const double z = beta[0] + beta[1] * phi;
    ll += (y ? z : 0.0) - softplus(z);
  }
  return ll;
}

Eigen::Vector2d logit_gradient(const Eigen::Vector2d& beta, const LogitData& data) {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  for (const auto& [phi, y] : data) {
    const double r = (y ? 1.0 : 0.0) - sigmoid(beta[0] + beta[1] * phi);
    g += r * Eigen::Vector2d(1.0, phi);
  }
  return g;
}

Eigen::Matrix2d logit_hessian(const Eigen::Vector2d& beta, const LogitData& data) {
  Eigen::Matrix2d h = Eigen::Matrix2d::Zero();
  for (const auto& [phi, y] : data) {
    const double p = sigmoid(beta[0] + beta[1] * phi);
    const Eigen::Vector2d x(1.0, phi);
    h -= p * (1.0 - p) * x * x.transpose();
  }
  return h;
}

LogitFit fit_faithfulness_logit(const LogitData& data, int max_iterations, double tolerance) {
  LogitFit fit;
  fit.n = data.size();
  std::size_t positives = 0;
  for (const auto& d : data) positives += d.second ? 1 : 0;
  if (data.size() < 2 || positives == 0 || positives == data.size()) {
    fit.diagnostic = "DegenerateData: need at least two pairs with both outcomes present";
    return fit;
  }

  Eigen::Vector2d beta = Eigen::Vector2d::Zero();
  double ll = logit_log_likelihood(beta, data);
  for (int it = 0; it < max_iterations; ++it) {
    const Eigen::Vector2d g = logit_gradient(beta, data);
    fit.iterations = it;
    if (g.norm() < tolerance) {
      fit.converged = true;
      break;
    }
    const Eigen::Matrix2d information = -logit_hessian(beta, data);
    const Eigen::LDLT<Eigen::Matrix2d> ldlt(information);
    Eigen::Vector2d step = ldlt.info() == Eigen::Success ? Eigen::Vector2d(ldlt.solve(g)) : g;
    if (!step.allFinite()) step = g;

    // Halve until the likelihood does not drop.
    double t = 1.0;
    Eigen::Vector2d next = beta + step;
    double next_ll = logit_log_likelihood(next, data);
    while (!(next_ll >= ll) && t > 1e-10) {
      t *= 0.5;
      next = beta + t * step;
      next_ll = logit_log_likelihood(next, data);
    }
    if (!(next_ll >= ll)) {
      fit.diagnostic = "line search failed";
      break;
    }
    beta = next;
    ll = next_ll;
    fit.iterations = it + 1;
  }
  if (!fit.converged && fit.diagnostic.empty()) {
    if (logit_gradient(beta, data).norm() < tolerance) fit.converged = true;
    else fit.diagnostic = "no convergence within " + std::to_string(max_iterations) + " iterations (separable data?)";
  }
  fit.intercept = beta[0];
  fit.slope = beta[1];
  fit.log_likelihood = ll;
  return fit;
}

}  // namespace groundmem
