#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "sdrvm/solver.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

/// Posterior of the augmented robust RVM: signal and explicit sparse-noise
/// estimates plus the joint (n+m) x (n+m) covariance.
struct AugmentedPosterior {
  Eigen::VectorXd x_hat;
  Eigen::VectorXd e_hat;
  Eigen::MatrixXd sigma_rb;
};

struct RbRvmResult {
  AugmentedPosterior posterior;
  PrecisionState state;  // gamma holds the signal precisions, tilde_gamma the sparse-noise ones
  FitReport report;
};

namespace detail {

/// Standard RVM with per-weight precisions and one shared noise precision.
/// `init_gamma_pruned` lets callers start with part of the dictionary removed
/// (used by the robust variant and by tests).
inline FitResult fit_rvm_core(const LinearSystem& system, const HyperPriors& priors,
                              const FitOptions& opts,
                              const std::vector<bool>& init_gamma_pruned = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());

  PrecisionState state;
  state.gamma = Eigen::VectorXd::Ones(n);
  state.beta = Eigen::VectorXd::Constant(1, default_beta_init(system));
  state.gamma_pruned = init_gamma_pruned.empty()
                           ? std::vector<bool>(static_cast<size_t>(n), false)
                           : init_gamma_pruned;
  state.beta_pruned.assign(1, false);
  for (size_t i = 0; i < state.gamma_pruned.size(); ++i)
    if (state.gamma_pruned[i]) state.gamma[static_cast<Eigen::Index>(i)] =
        std::numeric_limits<double>::infinity();

  FitResult result;
  Posterior post;
  for (int it = 0; it < opts.max_iter; ++it) {
    const Eigen::VectorXd beta_vec = Eigen::VectorXd::Constant(m, state.beta[0]);
    post = posterior_componentwise(system, state.gamma, state.gamma_pruned, beta_vec);
    {
      Eigen::VectorXd gamma_active(static_cast<Eigen::Index>(post.active.size()));
      for (size_t c = 0; c < post.active.size(); ++c)
        gamma_active[static_cast<Eigen::Index>(c)] = state.gamma[post.active[c]];
      result.report.evidence_trace.push_back(evidence_from_posterior(
          system, post, gamma_active, beta_vec, state.gamma, state.gamma_pruned, state.beta,
          state.beta_pruned, priors));
    }

    PrecisionState next = update_gamma(state, post, priors, opts);

    // beta^new = (m - n_active + sum_i gamma_i sigma_ii + 2c) / (||y - A x||^2 + 2d),
    // the J = [m] reduction of the block noise update.
    double weighted_trace = 0.0;
    for (int i : post.active) weighted_trace += state.gamma[i] * post.sigma(i, i);
    const double numerator = static_cast<double>(m) -
                             static_cast<double>(post.active.size()) + weighted_trace +
                             2.0 * priors.c;
    const double residual_norm2 = (system.y - system.A * post.x_hat).squaredNorm();
    double beta_new =
        precision_update(numerator, residual_norm2 + 2.0 * priors.d, priors.d, opts.denom_floor);
    if (beta_new > opts.prune_threshold) beta_new = opts.prune_threshold;
    const double beta_delta = std::abs(std::log(beta_new) - std::log(state.beta[0]));
    next.beta[0] = beta_new;

    const double delta = std::max(
        max_log_change(state.gamma, next.gamma, state.gamma_pruned, next.gamma_pruned),
        beta_delta);
    state = std::move(next);
    result.report.iterations = it + 1;
    if (delta < opts.rel_tol) {
      result.report.converged = true;
      break;
    }
  }

  const Eigen::VectorXd beta_vec = Eigen::VectorXd::Constant(m, state.beta[0]);
  result.posterior = posterior_componentwise(system, state.gamma, state.gamma_pruned, beta_vec);
  result.state = std::move(state);
  result.report.active_signal_set = result.posterior.active;
  result.report.active_noise_set = active_indices({}, m);
  result.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace detail

/// Standard RVM: componentwise signal precisions, one scalar noise precision.
inline FitResult fit_rvm(const LinearSystem& system, const HyperPriors& priors = {},
                         const FitOptions& opts = {}) {
  system.validate();
  priors.validate();
  opts.validate();
  return detail::fit_rvm_core(system, priors, opts);
}

/// Robust RVM: the standard RVM run on the augmented dictionary [A I_m], so
/// the sparse noise is estimated explicitly alongside the signal.
inline RbRvmResult fit_rbrvm(const LinearSystem& system, const HyperPriors& priors = {},
                             const FitOptions& opts = {},
                             const std::vector<bool>& init_noise_pruned = {}) {
  system.validate();
  priors.validate();
  opts.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());

  Eigen::MatrixXd augmented(m, n + m);
  augmented.leftCols(n) = system.A;
  augmented.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
  LinearSystem aug{std::move(augmented), system.y};

  std::vector<bool> init_pruned;
  if (!init_noise_pruned.empty()) {
    init_pruned.assign(static_cast<size_t>(n + m), false);
    for (int j = 0; j < m; ++j)
      init_pruned[static_cast<size_t>(n + j)] = init_noise_pruned[static_cast<size_t>(j)];
  }

  FitResult core = detail::fit_rvm_core(aug, priors, opts, init_pruned);

  RbRvmResult result;
  result.posterior.x_hat = core.posterior.x_hat.head(n);
  result.posterior.e_hat = core.posterior.x_hat.tail(m);
  result.posterior.sigma_rb = std::move(core.posterior.sigma);
  result.state.gamma = core.state.gamma.head(n);
  result.state.tilde_gamma = core.state.gamma.tail(m);  // sparse-noise precisions nu
  result.state.beta = core.state.beta;
  result.state.gamma_pruned.assign(core.state.gamma_pruned.begin(),
                                   core.state.gamma_pruned.begin() + n);
  result.state.tilde_gamma_pruned.assign(core.state.gamma_pruned.begin() + n,
                                         core.state.gamma_pruned.end());
  result.state.beta_pruned = core.state.beta_pruned;
  result.report = std::move(core.report);
  result.report.active_signal_set.clear();
  result.report.active_noise_set.clear();
  for (int idx : core.posterior.active) {
    if (idx < n)
      result.report.active_signal_set.push_back(idx);
    else
      result.report.active_noise_set.push_back(idx - n);
  }
  result.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace sdrvm
