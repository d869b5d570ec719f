#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdrvm/rng.hpp"
#include "sdrvm/solver.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

struct SelfcheckConfig {
  int trials = 200;
  std::uint64_t seed = 7;
  /// Name of a check to deliberately break (test hook); empty = none.
  std::string perturb;
};

struct CheckResult {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

namespace detail {

struct CheckInstance {
  LinearSystem system;
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
};

inline CheckInstance random_check_instance(Rng& rng) {
  const int m = 2 + static_cast<int>(rng.integer(7));
  const int n = 2 + static_cast<int>(rng.integer(7));
  CheckInstance inst;
  Eigen::MatrixXd a(m, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < m; ++r) a(r, c) = rng.normal();
  Eigen::VectorXd y(m);
  for (int j = 0; j < m; ++j) y[j] = rng.normal();
  inst.system = LinearSystem{std::move(a), std::move(y)};
  inst.gamma.resize(n);
  inst.beta.resize(m);
  for (int i = 0; i < n; ++i) inst.gamma[i] = std::exp(0.5 * rng.normal());
  for (int j = 0; j < m; ++j) inst.beta[j] = std::exp(0.5 * rng.normal());
  return inst;
}

/// The m x m marginal covariance B^-1 + A Gamma^-1 A^T, formed explicitly.
/// The library itself never builds this; the checks use it as an independent
/// route to the same quantities.
inline Eigen::MatrixXd marginal_covariance(const CheckInstance& inst) {
  const Eigen::MatrixXd scaled =
      inst.system.A * inst.gamma.cwiseInverse().asDiagonal() * inst.system.A.transpose();
  return Eigen::MatrixXd(inst.beta.cwiseInverse().asDiagonal()) + scaled;
}

inline double marginal_quadratic(const CheckInstance& inst) {
  const Eigen::MatrixXd cov = marginal_covariance(inst);
  return inst.system.y.dot(cov.ldlt().solve(inst.system.y));
}

inline double guarded_relative(double measured, double expected, double floor) {
  return std::abs(measured - expected) / std::max(std::abs(expected), floor);
}

}  // namespace detail

/// Five exact-math identities behind the solver, each checked on fresh random
/// small instances against an independent dense evaluation (or a central
/// finite difference for the derivative identities). Returns per-check
/// worst-case errors; `pass` compares against the pinned tolerance.
inline std::vector<CheckResult> run_selfcheck(const SelfcheckConfig& cfg = {}) {
  const std::vector<bool> no_prune;
  CheckResult gamma_deriv{"gamma-derivative", 0.0, 1e-5, false};
  CheckResult beta_deriv{"beta-derivative", 0.0, 1e-5, false};
  CheckResult det_fact{"determinant-factorization", 0.0, 1e-9, false};
  CheckResult mean_chain{"posterior-mean-chain", 0.0, 1e-9, false};
  CheckResult block_proj{"block-projection", 0.0, 1e-9, false};

  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    detail::CheckInstance inst = detail::random_check_instance(rng);
    const int n = static_cast<int>(inst.system.cols());
    const int m = static_cast<int>(inst.system.rows());

    const Posterior post =
        detail::posterior_componentwise(inst.system, inst.gamma, no_prune, inst.beta);
    const Eigen::MatrixXd cov = detail::marginal_covariance(inst);
    const Eigen::VectorXd cov_inv_y = cov.ldlt().solve(inst.system.y);

    // d/d gamma_i of y' (B^-1 + A Gamma^-1 A')^-1 y equals x_hat_i^2
    for (int i = 0; i < n; ++i) {
      const double h = 1e-5 * inst.gamma[i];
      detail::CheckInstance bumped = inst;
      bumped.gamma[i] = inst.gamma[i] + h;
      const double up = detail::marginal_quadratic(bumped);
      bumped.gamma[i] = inst.gamma[i] - h;
      const double down = detail::marginal_quadratic(bumped);
      const double fd = (up - down) / (2.0 * h);
      const double err =
          detail::guarded_relative(fd, post.x_hat[i] * post.x_hat[i], 1e-3);
      gamma_deriv.max_error = std::max(gamma_deriv.max_error, err);
    }

    // d/d beta_j of the same quadratic equals the j-th squared residual
    const Eigen::VectorXd residual = inst.system.y - inst.system.A * post.x_hat;
    for (int j = 0; j < m; ++j) {
      const double h = 1e-5 * inst.beta[j];
      detail::CheckInstance bumped = inst;
      bumped.beta[j] = inst.beta[j] + h;
      const double up = detail::marginal_quadratic(bumped);
      bumped.beta[j] = inst.beta[j] - h;
      const double down = detail::marginal_quadratic(bumped);
      const double fd = (up - down) / (2.0 * h);
      const double err = detail::guarded_relative(fd, residual[j] * residual[j], 1e-3);
      beta_deriv.max_error = std::max(beta_deriv.max_error, err);
    }

    // det(B^-1 + A Gamma^-1 A') = det(Sigma^-1) / (prod gamma prod beta)
    {
      const double direct = std::log(cov.determinant());
      const double factored = post.logdet_precision -
                              inst.gamma.array().log().sum() -
                              inst.beta.array().log().sum();
      const double err = std::abs(direct - factored) / std::max(std::abs(direct), 1.0);
      det_fact.max_error = std::max(det_fact.max_error, err);
    }

    // Gamma^-1 A' (B^-1 + A Gamma^-1 A')^-1 y recovers the posterior mean
    {
      const Eigen::VectorXd chain =
          inst.gamma.cwiseInverse().cwiseProduct(inst.system.A.transpose() * cov_inv_y);
      const double scale = std::max(post.x_hat.cwiseAbs().maxCoeff(), 1.0);
      const double err = (chain - post.x_hat).cwiseAbs().maxCoeff() / scale;
      mean_chain.max_error = std::max(mean_chain.max_error, err);
    }

    // With a block-constant Gamma, A_I' (B^-1 + A Gamma^-1 A')^-1 y equals
    // gamma_block * x_hat_I on every block
    {
      detail::CheckInstance blocked = inst;
      std::vector<std::vector<int>> blocks;
      int start = 0;
      while (start < n) {
        const int len = std::min(n - start, 1 + static_cast<int>(rng.integer(3)));
        std::vector<int> block;
        for (int i = start; i < start + len; ++i) block.push_back(i);
        const double shared = std::exp(0.5 * rng.normal());
        for (int i : block) blocked.gamma[i] = shared;
        blocks.push_back(std::move(block));
        start += len;
      }
      const Posterior block_post =
          detail::posterior_componentwise(blocked.system, blocked.gamma, no_prune, blocked.beta);
      const Eigen::MatrixXd block_cov = detail::marginal_covariance(blocked);
      const Eigen::VectorXd block_cov_inv_y = block_cov.ldlt().solve(blocked.system.y);
      const double scale = std::max(block_post.x_hat.cwiseAbs().maxCoeff(), 1.0);
      for (const auto& block : blocks) {
        for (int i : block) {
          const double lhs = blocked.system.A.col(i).dot(block_cov_inv_y);
          const double rhs = blocked.gamma[i] * block_post.x_hat[i];
          block_proj.max_error =
              std::max(block_proj.max_error, std::abs(lhs - rhs) / scale);
        }
      }
    }
  }

  std::vector<CheckResult> results{gamma_deriv, beta_deriv, det_fact, mean_chain, block_proj};
  for (auto& check : results) {
    if (check.name == cfg.perturb) check.max_error += 1.0;
    check.pass = check.max_error <= check.tolerance;
  }
  return results;
}

}  // namespace sdrvm
