#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "sdrvm/linalg.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

struct FitResult {
  Posterior posterior;
  PrecisionState state;
  FitReport report;
};

namespace detail {

constexpr double kPrecisionFloor = 1e-12;

inline std::vector<int> active_indices(const std::vector<bool>& pruned, int extent) {
  std::vector<int> active;
  active.reserve(static_cast<size_t>(extent));
  for (int i = 0; i < extent; ++i)
    if (pruned.empty() || !pruned[static_cast<size_t>(i)]) active.push_back(i);
  return active;
}

/// MAP posterior over the active signal columns with a componentwise noise
/// precision vector: sigma = (Gamma + A^T B A)^{-1}, x_hat = sigma A^T B y.
inline Posterior posterior_componentwise(const LinearSystem& system,
                                         const Eigen::VectorXd& gamma,
                                         const std::vector<bool>& gamma_pruned,
                                         const Eigen::VectorXd& beta) {
  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());
  Posterior post;
  post.x_hat = Eigen::VectorXd::Zero(n);
  post.sigma = Eigen::MatrixXd::Zero(n, n);
  post.active = active_indices(gamma_pruned, n);
  const int k = static_cast<int>(post.active.size());
  if (k == 0) return post;

  Eigen::MatrixXd a_act(m, k);
  for (int c = 0; c < k; ++c) a_act.col(c) = system.A.col(post.active[static_cast<size_t>(c)]);

  Eigen::MatrixXd precision = a_act.transpose() * beta.asDiagonal() * a_act;
  for (int c = 0; c < k; ++c) precision(c, c) += gamma[post.active[static_cast<size_t>(c)]];

  SpdSolveResult inv = spd_inverse(precision);
  post.logdet_precision = inv.logdet;
  const Eigen::VectorXd rhs = a_act.transpose() * beta.cwiseProduct(system.y).matrix();
  const Eigen::VectorXd x_act = inv.x * rhs;

  for (int c = 0; c < k; ++c) {
    const int i = post.active[static_cast<size_t>(c)];
    post.x_hat[i] = x_act[c];
    for (int r = 0; r < k; ++r) post.sigma(post.active[static_cast<size_t>(r)], i) = inv.x(r, c);
  }
  return post;
}

/// Diagonal of A sigma A^T restricted to the active columns.
inline Eigen::VectorXd projected_variances(const LinearSystem& system, const Posterior& post) {
  const int m = static_cast<int>(system.rows());
  const int k = static_cast<int>(post.active.size());
  if (k == 0) return Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd a_act(m, k);
  Eigen::MatrixXd sigma_act(k, k);
  for (int c = 0; c < k; ++c) {
    const int i = post.active[static_cast<size_t>(c)];
    a_act.col(c) = system.A.col(i);
    for (int r = 0; r < k; ++r) sigma_act(r, c) = post.sigma(post.active[static_cast<size_t>(r)], i);
  }
  const Eigen::MatrixXd t = a_act * sigma_act;
  return t.cwiseProduct(a_act).rowwise().sum();
}

/// Marginal log-likelihood evaluated through the determinant factorization
/// log det(B^-1 + A Gamma^-1 A^T) = log det(sigma^-1) - sum log gamma - sum log beta
/// and the quadratic identity y^T (B^-1 + A Gamma^-1 A^T)^-1 y = y^T B y - y^T B A x_hat,
/// so no m x m factorization is ever formed. `prior_gamma`/`prior_beta` are the
/// precision parameters the Gamma priors act on (componentwise or per block).
inline double evidence_from_posterior(const LinearSystem& system, const Posterior& post,
                                      const Eigen::VectorXd& gamma_active_values,
                                      const Eigen::VectorXd& beta_componentwise,
                                      const Eigen::VectorXd& prior_gamma,
                                      const std::vector<bool>& prior_gamma_pruned,
                                      const Eigen::VectorXd& prior_beta,
                                      const std::vector<bool>& prior_beta_pruned,
                                      const HyperPriors& priors) {
  const double m = static_cast<double>(system.rows());
  double logdet = post.logdet_precision;
  for (Eigen::Index i = 0; i < gamma_active_values.size(); ++i)
    logdet -= std::log(gamma_active_values[i]);
  for (Eigen::Index j = 0; j < beta_componentwise.size(); ++j)
    logdet -= std::log(beta_componentwise[j]);

  const Eigen::VectorXd weighted = beta_componentwise.cwiseProduct(system.y);
  const double quad = weighted.dot(system.y) - weighted.dot(system.A * post.x_hat);

  double prior_terms = 0.0;
  for (Eigen::Index i = 0; i < prior_gamma.size(); ++i) {
    if (!prior_gamma_pruned.empty() && prior_gamma_pruned[static_cast<size_t>(i)]) continue;
    prior_terms += priors.a * std::log(prior_gamma[i]) - priors.b * prior_gamma[i];
  }
  for (Eigen::Index j = 0; j < prior_beta.size(); ++j) {
    if (!prior_beta_pruned.empty() && prior_beta_pruned[static_cast<size_t>(j)]) continue;
    prior_terms += priors.c * std::log(prior_beta[j]) - priors.d * prior_beta[j];
  }

  return -0.5 * m * std::log(2.0 * std::numbers::pi) - 0.5 * logdet - 0.5 * quad + prior_terms;
}

/// Shared fixed-point scalar update: numerator clamped to >= 0, result kept in
/// [kPrecisionFloor, +inf]. A positive numerator over a zero denominator is an
/// infinite precision (the caller prunes it); the floor only guards the 0/0
/// case, which can occur when the prior rate is zero.
inline double precision_update(double numerator, double denominator, double prior_rate,
                               double denom_floor) {
  if (numerator < 0.0) numerator = 0.0;
  if (denominator <= 0.0) {
    if (numerator > 0.0) return std::numeric_limits<double>::infinity();
    denominator = prior_rate == 0.0 && denom_floor > 0.0 ? denom_floor : kPrecisionFloor;
  }
  double value = numerator / denominator;
  if (!(value > kPrecisionFloor)) value = kPrecisionFloor;
  return value;
}

inline double default_beta_init(const LinearSystem& system) {
  const double energy = system.y.squaredNorm();
  return energy > 0.0 ? static_cast<double>(system.rows()) / energy : 1.0;
}

}  // namespace detail

/// MAP posterior for a validated componentwise precision state.
inline Posterior posterior(const LinearSystem& system, const PrecisionState& state) {
  system.validate();
  state.validate();
  if (state.gamma.size() != system.cols() || state.beta.size() != system.rows())
    throw DimensionMismatch("precision state does not match system dimensions");
  return detail::posterior_componentwise(system, state.gamma, state.gamma_pruned, state.beta);
}

/// One signal-precision sweep: gamma_i <- (1 - gamma_i sigma_ii + 2a) / (x_i^2 + 2b).
inline PrecisionState update_gamma(const PrecisionState& state, const Posterior& post,
                                   const HyperPriors& priors, const FitOptions& opts = {}) {
  PrecisionState next = state;
  if (next.gamma_pruned.empty())
    next.gamma_pruned.assign(static_cast<size_t>(state.gamma.size()), false);
  for (int i : post.active) {
    const double numerator = 1.0 - state.gamma[i] * post.sigma(i, i) + 2.0 * priors.a;
    const double denominator = post.x_hat[i] * post.x_hat[i] + 2.0 * priors.b;
    const double value = detail::precision_update(numerator, denominator, priors.b, opts.denom_floor);
    if (value > opts.prune_threshold) {
      next.gamma[i] = std::numeric_limits<double>::infinity();
      next.gamma_pruned[static_cast<size_t>(i)] = true;
    } else {
      next.gamma[i] = value;
    }
  }
  return next;
}

/// One noise-precision sweep: beta_j <- (1 - beta_j [A sigma A^T]_jj + 2c) / (r_j^2 + 2d).
/// A noise coordinate is pruned (fixed at the threshold, effectively noiseless,
/// no longer updated) only when its residual vanishes exactly; a finite value
/// crossing the threshold is clamped but stays revisable, since a transiently
/// small residual must not permanently lock the measurement as exact.
inline PrecisionState update_beta(const LinearSystem& system, const PrecisionState& state,
                                  const Posterior& post, const HyperPriors& priors,
                                  const FitOptions& opts = {}) {
  PrecisionState next = state;
  if (next.beta_pruned.empty())
    next.beta_pruned.assign(static_cast<size_t>(state.beta.size()), false);
  const Eigen::VectorXd projected = detail::projected_variances(system, post);
  const Eigen::VectorXd residual = system.y - system.A * post.x_hat;
  for (int j = 0; j < static_cast<int>(system.rows()); ++j) {
    if (next.beta_pruned[static_cast<size_t>(j)]) continue;
    const double numerator = 1.0 - state.beta[j] * projected[j] + 2.0 * priors.c;
    const double denominator = residual[j] * residual[j] + 2.0 * priors.d;
    const double value = detail::precision_update(numerator, denominator, priors.d, opts.denom_floor);
    if (value > opts.prune_threshold) {
      next.beta[j] = opts.prune_threshold;
      next.beta_pruned[static_cast<size_t>(j)] = std::isinf(value);
    } else {
      next.beta[j] = value;
    }
  }
  return next;
}

/// Marginal log-likelihood of a componentwise precision state.
inline double evidence(const LinearSystem& system, const PrecisionState& state,
                       const HyperPriors& priors = {}) {
  const Posterior post = posterior(system, state);
  Eigen::VectorXd gamma_active(static_cast<Eigen::Index>(post.active.size()));
  for (size_t c = 0; c < post.active.size(); ++c)
    gamma_active[static_cast<Eigen::Index>(c)] = state.gamma[post.active[c]];
  return detail::evidence_from_posterior(system, post, gamma_active, state.beta, state.gamma,
                                         state.gamma_pruned, state.beta, state.beta_pruned, priors);
}

/// Diagnostic value of the non-symmetric log-sum objective the fixed point
/// descends: (1+2a) sum_i log(x_i^2 + sigma_ii^old + 2b)
///         + (1+2c) sum_j log(r_j^2 + [A sigma^old A^T]_jj + 2d).
inline double nonsymmetric_cost(const LinearSystem& system, const Posterior& post,
                                const Eigen::MatrixXd& prev_sigma,
                                const HyperPriors& priors = {}) {
  if (prev_sigma.rows() != system.cols() || prev_sigma.cols() != system.cols())
    throw DimensionMismatch("previous covariance has wrong shape");
  double cost = 0.0;
  for (Eigen::Index i = 0; i < system.cols(); ++i)
    cost += (1.0 + 2.0 * priors.a) *
            std::log(post.x_hat[i] * post.x_hat[i] + prev_sigma(i, i) + 2.0 * priors.b);
  const Eigen::MatrixXd t = system.A * prev_sigma;
  const Eigen::VectorXd projected = t.cwiseProduct(system.A).rowwise().sum();
  const Eigen::VectorXd residual = system.y - system.A * post.x_hat;
  for (Eigen::Index j = 0; j < system.rows(); ++j)
    cost += (1.0 + 2.0 * priors.c) *
            std::log(residual[j] * residual[j] + projected[j] + 2.0 * priors.d);
  return cost;
}

namespace detail {

inline double max_log_change(const Eigen::VectorXd& before, const Eigen::VectorXd& after,
                             const std::vector<bool>& pruned_before,
                             const std::vector<bool>& pruned_after) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < before.size(); ++i) {
    const bool was = !pruned_before.empty() && pruned_before[static_cast<size_t>(i)];
    const bool is = !pruned_after.empty() && pruned_after[static_cast<size_t>(i)];
    if (was) continue;
    if (is) {
      // a fresh prune counts as a change so the loop cannot stop on it
      worst = std::numeric_limits<double>::infinity();
      continue;
    }
    const double delta = std::abs(std::log(after[i]) - std::log(before[i]));
    if (delta > worst) worst = delta;
  }
  return worst;
}

}  // namespace detail

/// Componentwise SD-RVM: alternate the MAP posterior with the signal and
/// noise precision sweeps until the precisions stop moving.
inline FitResult fit_sdrvm(const LinearSystem& system, const HyperPriors& priors = {},
                           const FitOptions& opts = {}) {
  system.validate();
  priors.validate();
  opts.validate();
  const auto t0 = std::chrono::steady_clock::now();

  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());
  PrecisionState state;
  state.gamma = Eigen::VectorXd::Ones(n);
  state.beta = Eigen::VectorXd::Constant(m, detail::default_beta_init(system));
  state.gamma_pruned.assign(static_cast<size_t>(n), false);
  state.beta_pruned.assign(static_cast<size_t>(m), false);

  FitResult result;
  result.report.evidence_trace.reserve(16);
  Posterior post;
  for (int it = 0; it < opts.max_iter; ++it) {
    post = detail::posterior_componentwise(system, state.gamma, state.gamma_pruned, state.beta);
    {
      Eigen::VectorXd gamma_active(static_cast<Eigen::Index>(post.active.size()));
      for (size_t c = 0; c < post.active.size(); ++c)
        gamma_active[static_cast<Eigen::Index>(c)] = state.gamma[post.active[c]];
      result.report.evidence_trace.push_back(detail::evidence_from_posterior(
          system, post, gamma_active, state.beta, state.gamma, state.gamma_pruned, state.beta,
          state.beta_pruned, priors));
    }
    PrecisionState next = update_gamma(state, post, priors, opts);
    next = update_beta(system, next, post, priors, opts);

    const double delta = std::max(
        detail::max_log_change(state.gamma, next.gamma, state.gamma_pruned, next.gamma_pruned),
        detail::max_log_change(state.beta, next.beta, state.beta_pruned, next.beta_pruned));
    state = std::move(next);
    result.report.iterations = it + 1;
    if (delta < opts.rel_tol) {
      result.report.converged = true;
      break;
    }
  }

  result.posterior =
      detail::posterior_componentwise(system, state.gamma, state.gamma_pruned, state.beta);
  result.state = std::move(state);
  result.report.active_signal_set = result.posterior.active;
  result.report.active_noise_set =
      detail::active_indices(result.state.beta_pruned, m);
  result.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace sdrvm
