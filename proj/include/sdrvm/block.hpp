#pragma once

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "sdrvm/solver.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

/// Diagonals of the per-block precision matrices: entry i holds the
/// componentwise precision when position i belongs to the block, zero
/// otherwise.
struct BlockPrecisionMaps {
  static Eigen::VectorXd diagonal(const BlockLayout& layout, int block,
                                  const Eigen::VectorXd& componentwise, int extent) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(extent);
    for (int idx : layout.blocks[static_cast<size_t>(block)]) diag[idx] = componentwise[idx];
    return diag;
  }
};

namespace detail {

inline void expand_block_values(const BlockLayout& layout, const Eigen::VectorXd& per_block,
                                const std::vector<bool>& block_pruned, double pruned_value,
                                Eigen::VectorXd& out, std::vector<bool>& out_pruned) {
  for (size_t b = 0; b < layout.blocks.size(); ++b) {
    const bool pruned = !block_pruned.empty() && block_pruned[b];
    for (int idx : layout.blocks[b]) {
      out[idx] = pruned ? pruned_value : per_block[static_cast<Eigen::Index>(b)];
      out_pruned[static_cast<size_t>(idx)] = pruned;
    }
  }
}

}  // namespace detail

/// Block SD-RVM for known, disjoint block structure. One precision per block;
/// blocks are pruned as wholes. With singleton blocks this follows the exact
/// arithmetic of the componentwise solver.
inline FitResult fit_sdrvm_blocks(const LinearSystem& system, const BlockLayout& signal_layout,
                                  const BlockLayout& noise_layout, const HyperPriors& priors = {},
                                  const FitOptions& opts = {}) {
  system.validate();
  priors.validate();
  opts.validate();
  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());
  if (signal_layout.kind != BlockLayout::Kind::DisjointPartition ||
      noise_layout.kind != BlockLayout::Kind::DisjointPartition)
    throw InvalidBlockLayout("known-structure solver requires disjoint partitions");
  signal_layout.validate(n);
  noise_layout.validate(m);
  const auto t0 = std::chrono::steady_clock::now();

  const int p = static_cast<int>(signal_layout.blocks.size());
  const int q = static_cast<int>(noise_layout.blocks.size());

  PrecisionState state;
  state.gamma = Eigen::VectorXd::Ones(p);
  state.beta = Eigen::VectorXd::Constant(q, detail::default_beta_init(system));
  state.gamma_pruned.assign(static_cast<size_t>(p), false);
  state.beta_pruned.assign(static_cast<size_t>(q), false);

  Eigen::VectorXd gamma_c(n), beta_c(m);
  std::vector<bool> gamma_c_pruned(static_cast<size_t>(n), false);
  std::vector<bool> beta_c_pruned(static_cast<size_t>(m), false);

  FitResult result;
  Posterior post;
  for (int it = 0; it < opts.max_iter; ++it) {
    detail::expand_block_values(signal_layout, state.gamma, state.gamma_pruned,
                                std::numeric_limits<double>::infinity(), gamma_c, gamma_c_pruned);
    detail::expand_block_values(noise_layout, state.beta, state.beta_pruned, opts.prune_threshold,
                                beta_c, beta_c_pruned);
    post = detail::posterior_componentwise(system, gamma_c, gamma_c_pruned, beta_c);
    {
      Eigen::VectorXd gamma_active(static_cast<Eigen::Index>(post.active.size()));
      for (size_t c = 0; c < post.active.size(); ++c)
        gamma_active[static_cast<Eigen::Index>(c)] = gamma_c[post.active[c]];
      result.report.evidence_trace.push_back(detail::evidence_from_posterior(
          system, post, gamma_active, beta_c, state.gamma, state.gamma_pruned, state.beta,
          state.beta_pruned, priors));
    }

    PrecisionState next = state;
    for (int b = 0; b < p; ++b) {
      if (next.gamma_pruned[static_cast<size_t>(b)]) continue;
      const auto& block = signal_layout.blocks[static_cast<size_t>(b)];
      double masked_trace = 0.0;
      double norm2 = 0.0;
      for (int i : block) {
        masked_trace += post.sigma(i, i) * state.gamma[b];
        norm2 += post.x_hat[i] * post.x_hat[i];
      }
      const double numerator =
          static_cast<double>(block.size()) - masked_trace + 2.0 * priors.a;
      const double value = detail::precision_update(numerator, norm2 + 2.0 * priors.b, priors.b,
                                                    opts.denom_floor);
      if (value > opts.prune_threshold) {
        next.gamma[b] = std::numeric_limits<double>::infinity();
        next.gamma_pruned[static_cast<size_t>(b)] = true;
      } else {
        next.gamma[b] = value;
      }
    }

    const Eigen::VectorXd projected = detail::projected_variances(system, post);
    const Eigen::VectorXd residual = system.y - system.A * post.x_hat;
    for (int b = 0; b < q; ++b) {
      if (next.beta_pruned[static_cast<size_t>(b)]) continue;
      const auto& block = noise_layout.blocks[static_cast<size_t>(b)];
      double masked_trace = 0.0;
      double norm2 = 0.0;
      for (int j : block) {
        masked_trace += projected[j] * state.beta[b];
        norm2 += residual[j] * residual[j];
      }
      const double numerator =
          static_cast<double>(block.size()) - masked_trace + 2.0 * priors.c;
      const double value = detail::precision_update(numerator, norm2 + 2.0 * priors.d, priors.d,
                                                    opts.denom_floor);
      if (value > opts.prune_threshold) {
        // same revisable clamp as the componentwise solver: only an exactly
        // vanishing block residual locks the block as noiseless
        next.beta[b] = opts.prune_threshold;
        next.beta_pruned[static_cast<size_t>(b)] = std::isinf(value);
      } else {
        next.beta[b] = value;
      }
    }

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

  detail::expand_block_values(signal_layout, state.gamma, state.gamma_pruned,
                              std::numeric_limits<double>::infinity(), gamma_c, gamma_c_pruned);
  detail::expand_block_values(noise_layout, state.beta, state.beta_pruned, opts.prune_threshold,
                              beta_c, beta_c_pruned);
  result.posterior = detail::posterior_componentwise(system, gamma_c, gamma_c_pruned, beta_c);
  result.state = std::move(state);
  result.report.active_signal_set = result.posterior.active;
  result.report.active_noise_set = detail::active_indices(beta_c_pruned, m);
  result.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

namespace detail {

/// Componentwise precisions from underlying block precisions:
/// p_i^{-1} = sum over active covering blocks of p_block^{-1}.
inline void combine_overlapping(const BlockLayout& layout, const Eigen::VectorXd& tilde,
                                const std::vector<bool>& tilde_pruned, double pruned_value,
                                Eigen::VectorXd& out, std::vector<bool>& out_pruned) {
  Eigen::VectorXd inv_sum = Eigen::VectorXd::Zero(out.size());
  Eigen::VectorXd sole = Eigen::VectorXd::Zero(out.size());
  std::vector<int> covered(static_cast<size_t>(out.size()), 0);
  for (size_t b = 0; b < layout.blocks.size(); ++b) {
    if (!tilde_pruned.empty() && tilde_pruned[b]) continue;
    for (int idx : layout.blocks[b]) {
      inv_sum[idx] += 1.0 / tilde[static_cast<Eigen::Index>(b)];
      sole[idx] = tilde[static_cast<Eigen::Index>(b)];
      ++covered[static_cast<size_t>(idx)];
    }
  }
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if (covered[static_cast<size_t>(i)] > 0) {
      // a single covering block passes its precision through exactly; the
      // reciprocal form is only needed when blocks genuinely overlap
      out[i] = covered[static_cast<size_t>(i)] == 1 ? sole[i] : 1.0 / inv_sum[i];
      out_pruned[static_cast<size_t>(i)] = false;
    } else {
      out[i] = pruned_value;
      out_pruned[static_cast<size_t>(i)] = true;
    }
  }
}

inline Eigen::VectorXd mean_coverage_init(const BlockLayout& layout, int extent, double scale) {
  std::vector<int> cover(static_cast<size_t>(extent), 0);
  for (const auto& block : layout.blocks)
    for (int idx : block) ++cover[static_cast<size_t>(idx)];
  Eigen::VectorXd init(static_cast<Eigen::Index>(layout.blocks.size()));
  for (size_t b = 0; b < layout.blocks.size(); ++b) {
    double mean = 0.0;
    for (int idx : layout.blocks[b]) mean += static_cast<double>(cover[static_cast<size_t>(idx)]);
    init[static_cast<Eigen::Index>(b)] = scale * mean / static_cast<double>(layout.blocks[b].size());
  }
  return init;
}

}  // namespace detail

/// SD-RVM for unknown block structure: the signal (and noise) is a
/// superposition of overlapping blocks with underlying precisions; the
/// componentwise precision of a position combines the covering blocks
/// harmonically. With disjoint layouts this reduces to the known-structure
/// solver.
inline FitResult fit_sdrvm_overlap(const LinearSystem& system, const BlockLayout& signal_blocks,
                                   const BlockLayout& noise_blocks, const HyperPriors& priors = {},
                                   const FitOptions& opts = {}) {
  system.validate();
  priors.validate();
  opts.validate();
  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());
  signal_blocks.validate(n);
  noise_blocks.validate(m);
  const auto t0 = std::chrono::steady_clock::now();

  const int p = static_cast<int>(signal_blocks.blocks.size());
  const int q = static_cast<int>(noise_blocks.blocks.size());

  PrecisionState state;
  // underlying precisions start at the coverage count so the implied
  // componentwise precisions start near the componentwise solver's defaults
  state.tilde_gamma = detail::mean_coverage_init(signal_blocks, n, 1.0);
  state.tilde_beta = detail::mean_coverage_init(noise_blocks, m, detail::default_beta_init(system));
  state.tilde_gamma_pruned.assign(static_cast<size_t>(p), false);
  state.tilde_beta_pruned.assign(static_cast<size_t>(q), false);
  state.gamma = Eigen::VectorXd::Zero(n);
  state.beta = Eigen::VectorXd::Zero(m);
  state.gamma_pruned.assign(static_cast<size_t>(n), false);
  state.beta_pruned.assign(static_cast<size_t>(m), false);

  auto refresh_componentwise = [&](PrecisionState& s) {
    detail::combine_overlapping(signal_blocks, s.tilde_gamma, s.tilde_gamma_pruned,
                                std::numeric_limits<double>::infinity(), s.gamma, s.gamma_pruned);
    detail::combine_overlapping(noise_blocks, s.tilde_beta, s.tilde_beta_pruned,
                                opts.prune_threshold, s.beta, s.beta_pruned);
  };
  refresh_componentwise(state);

  FitResult result;
  Posterior post;
  for (int it = 0; it < opts.max_iter; ++it) {
    post = detail::posterior_componentwise(system, state.gamma, state.gamma_pruned, state.beta);
    {
      Eigen::VectorXd gamma_active(static_cast<Eigen::Index>(post.active.size()));
      for (size_t c = 0; c < post.active.size(); ++c)
        gamma_active[static_cast<Eigen::Index>(c)] = state.gamma[post.active[c]];
      result.report.evidence_trace.push_back(detail::evidence_from_posterior(
          system, post, gamma_active, state.beta, state.tilde_gamma, state.tilde_gamma_pruned,
          state.tilde_beta, state.tilde_beta_pruned, priors));
    }

    PrecisionState next = state;
    for (int b = 0; b < p; ++b) {
      if (next.tilde_gamma_pruned[static_cast<size_t>(b)]) continue;
      const double tg = state.tilde_gamma[b];
      // expressed through the ratio gamma_i / tilde_gamma_b (exactly 1 for
      // disjoint layouts) so the reduction to the block solver stays tight
      double trace = 0.0, masked_trace = 0.0, norm2 = 0.0;
      for (int i : signal_blocks.blocks[static_cast<size_t>(b)]) {
        const double ui = state.gamma[i] / tg;
        trace += ui;
        masked_trace += ui * post.sigma(i, i) * state.gamma[i];
        const double scaled = ui * post.x_hat[i];
        norm2 += scaled * scaled;
      }
      const double numerator = trace - masked_trace + 2.0 * priors.a;
      const double denominator = norm2 + 2.0 * priors.b;
      const double value =
          detail::precision_update(numerator, denominator, priors.b, opts.denom_floor);
      if (value > opts.prune_threshold)
        next.tilde_gamma_pruned[static_cast<size_t>(b)] = true;
      else
        next.tilde_gamma[b] = value;
    }

    const Eigen::VectorXd projected = detail::projected_variances(system, post);
    const Eigen::VectorXd residual = system.y - system.A * post.x_hat;
    for (int b = 0; b < q; ++b) {
      if (next.tilde_beta_pruned[static_cast<size_t>(b)]) continue;
      const double tb = state.tilde_beta[b];
      double trace = 0.0, masked_trace = 0.0, norm2 = 0.0;
      for (int j : noise_blocks.blocks[static_cast<size_t>(b)]) {
        const double uj = state.beta[j] / tb;
        trace += uj;
        masked_trace += uj * projected[j] * state.beta[j];
        const double scaled = uj * residual[j];
        norm2 += scaled * scaled;
      }
      const double numerator = trace - masked_trace + 2.0 * priors.c;
      const double denominator = norm2 + 2.0 * priors.d;
      const double value =
          detail::precision_update(numerator, denominator, priors.d, opts.denom_floor);
      if (value > opts.prune_threshold) {
        next.tilde_beta[b] = opts.prune_threshold;
        next.tilde_beta_pruned[static_cast<size_t>(b)] = std::isinf(value);
      } else {
        next.tilde_beta[b] = value;
      }
    }

    const double delta =
        std::max(detail::max_log_change(state.tilde_gamma, next.tilde_gamma,
                                        state.tilde_gamma_pruned, next.tilde_gamma_pruned),
                 detail::max_log_change(state.tilde_beta, next.tilde_beta,
                                        state.tilde_beta_pruned, next.tilde_beta_pruned));
    refresh_componentwise(next);
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
  result.report.active_noise_set = detail::active_indices(result.state.beta_pruned, m);
  result.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

/// Componentwise-sparse signal with overlapped sparse + dense noise: singleton
/// noise blocks plus one global block covering every measurement, so each
/// beta_j combines a per-sample and a shared precision harmonically.
inline FitResult fit_sdrvm_sparse_dense(const LinearSystem& system,
                                        const HyperPriors& priors = {},
                                        const FitOptions& opts = {}) {
  const int n = static_cast<int>(system.cols());
  const int m = static_cast<int>(system.rows());
  BlockLayout signal = BlockLayout::singletons(n);
  signal.kind = BlockLayout::Kind::Overlapping;
  BlockLayout noise = BlockLayout::singletons(m);
  noise.kind = BlockLayout::Kind::Overlapping;
  std::vector<int> global(static_cast<size_t>(m));
  for (int j = 0; j < m; ++j) global[static_cast<size_t>(j)] = j;
  noise.blocks.push_back(std::move(global));
  return fit_sdrvm_overlap(system, signal, noise, priors, opts);
}

}  // namespace sdrvm
