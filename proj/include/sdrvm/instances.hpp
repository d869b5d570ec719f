#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "sdrvm/rng.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

enum class Method { Rvm, RbRvm, Sdrvm, SdrvmSparseDense, SdrvmBlock, SdrvmOverlap };

inline std::string method_name(Method method) {
  switch (method) {
    case Method::Rvm: return "rvm";
    case Method::RbRvm: return "rbrvm";
    case Method::Sdrvm: return "sdrvm";
    case Method::SdrvmSparseDense: return "sdrvm-sd";
    case Method::SdrvmBlock: return "sdrvm-block";
    case Method::SdrvmOverlap: return "sdrvm-overlap";
  }
  return "unknown";
}

inline Method method_from_name(const std::string& name) {
  if (name == "rvm") return Method::Rvm;
  if (name == "rbrvm") return Method::RbRvm;
  if (name == "sdrvm") return Method::Sdrvm;
  if (name == "sdrvm-sd") return Method::SdrvmSparseDense;
  if (name == "sdrvm-block") return Method::SdrvmBlock;
  if (name == "sdrvm-overlap") return Method::SdrvmOverlap;
  throw std::invalid_argument("unknown method: " + name);
}

/// Compressed-sensing benchmark configuration. `sdnr_db` is the
/// signal-to-dense-noise ratio ||x||_0 / (m sigma_n^2) in dB.
struct CsConfig {
  int n = 100;
  int m = 70;
  int k_signal = 10;
  int k_noise = 0;  // sparse-noise count (outliers)
  double sdnr_db = 20.0;
  int trials_matrices = 20;
  int trials_signals = 20;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Rvm, Method::RbRvm, Method::Sdrvm};

  void validate() const {
    if (n < 1 || m < 1) throw DimensionMismatch("dimensions must be >= 1");
    if (k_signal < 0 || k_signal > n) throw DimensionMismatch("k_signal out of range");
    if (k_noise < 0 || k_noise > m) throw DimensionMismatch("k_noise out of range");
    if (!std::isfinite(sdnr_db)) throw DimensionMismatch("sdnr_db must be finite");
    if (trials_matrices < 1 || trials_signals < 1)
      throw DimensionMismatch("trial counts must be >= 1");
  }

  double dense_noise_variance() const {
    return static_cast<double>(k_signal) /
           (static_cast<double>(m) * std::pow(10.0, sdnr_db / 10.0));
  }
};

struct CsInstance {
  LinearSystem system;
  Eigen::VectorXd x_true;
  Eigen::VectorXd e_true;
};

/// Gaussian matrix with unit-norm columns, applied to a k-sparse signal with
/// uniform support, plus sparse outliers and dense Gaussian noise.
inline Eigen::MatrixXd gen_measurement_matrix(int m, int n, Rng& rng) {
  Eigen::MatrixXd a(m, n);
  for (int c = 0; c < n; ++c)
    for (int r = 0; r < m; ++r) a(r, c) = rng.normal();
  for (int c = 0; c < n; ++c) a.col(c) /= a.col(c).norm();
  return a;
}

inline CsInstance gen_cs_instance(const CsConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed);
  CsInstance inst;
  Eigen::MatrixXd a = gen_measurement_matrix(cfg.m, cfg.n, rng);

  inst.x_true = Eigen::VectorXd::Zero(cfg.n);
  for (int idx : rng.sample_without_replacement(cfg.n, cfg.k_signal))
    inst.x_true[idx] = rng.normal();

  inst.e_true = Eigen::VectorXd::Zero(cfg.m);
  for (int idx : rng.sample_without_replacement(cfg.m, cfg.k_noise))
    inst.e_true[idx] = rng.normal();

  const double sigma_n = std::sqrt(cfg.dense_noise_variance());
  Eigen::VectorXd dense(cfg.m);
  for (int j = 0; j < cfg.m; ++j) dense[j] = sigma_n * rng.normal();

  Eigen::VectorXd y = a * inst.x_true + inst.e_true + dense;
  inst.system = LinearSystem{std::move(a), std::move(y)};
  return inst;
}

/// Same generator but reusing a pre-drawn measurement matrix, for the
/// "many signals per matrix" trial structure of the sweeps.
inline CsInstance gen_cs_instance_for_matrix(const CsConfig& cfg, const Eigen::MatrixXd& a,
                                             std::uint64_t seed) {
  Rng rng(seed);
  CsInstance inst;
  inst.x_true = Eigen::VectorXd::Zero(cfg.n);
  for (int idx : rng.sample_without_replacement(cfg.n, cfg.k_signal))
    inst.x_true[idx] = rng.normal();
  inst.e_true = Eigen::VectorXd::Zero(cfg.m);
  for (int idx : rng.sample_without_replacement(cfg.m, cfg.k_noise))
    inst.e_true[idx] = rng.normal();
  const double sigma_n = std::sqrt(cfg.dense_noise_variance());
  Eigen::VectorXd y = a * inst.x_true + inst.e_true;
  for (int j = 0; j < cfg.m; ++j) y[j] += sigma_n * rng.normal();
  inst.system = LinearSystem{a, std::move(y)};
  return inst;
}

/// Block-sparse benchmark configuration (known and unknown structure arms).
struct BlockConfig {
  int n = 100;
  int signal_blocks = 20;        // disjoint blocks the signal is divided into
  int active_signal_blocks = 3;
  int noise_block_size = 5;
  double active_noise_fraction = 0.05;
  double sdnr_db = 20.0;
  bool known_structure = true;   // false: uniformly random block starts, overlap allowed

  int signal_block_size() const { return n / signal_blocks; }
};

struct BlockInstance {
  LinearSystem system;
  Eigen::VectorXd x_true;
  Eigen::VectorXd e_true;
  BlockLayout signal_layout;  // the generating layout (known-structure arm)
  BlockLayout noise_layout;
};

inline BlockInstance gen_block_instance(const BlockConfig& cfg, int m, std::uint64_t seed) {
  if (cfg.n % cfg.signal_blocks != 0)
    throw InvalidBlockLayout("signal dimension not divisible into equal blocks");
  Rng rng(seed);
  BlockInstance inst;
  Eigen::MatrixXd a = gen_measurement_matrix(m, cfg.n, rng);

  const int bs = cfg.signal_block_size();
  inst.x_true = Eigen::VectorXd::Zero(cfg.n);
  if (cfg.known_structure) {
    inst.signal_layout = BlockLayout::contiguous(cfg.n, bs);
    for (int b : rng.sample_without_replacement(cfg.signal_blocks, cfg.active_signal_blocks))
      for (int i : inst.signal_layout.blocks[static_cast<size_t>(b)]) inst.x_true[i] = rng.normal();
  } else {
    for (int b = 0; b < cfg.active_signal_blocks; ++b) {
      const int start = static_cast<int>(rng.integer(static_cast<std::uint64_t>(cfg.n - bs + 1)));
      for (int i = start; i < start + bs; ++i) inst.x_true[i] = rng.normal();
    }
  }

  inst.e_true = Eigen::VectorXd::Zero(m);
  const int noise_blocks = m / cfg.noise_block_size;
  const int active_noise = static_cast<int>(
      std::lround(cfg.active_noise_fraction * static_cast<double>(noise_blocks)));
  if (cfg.known_structure) {
    inst.noise_layout = BlockLayout::contiguous(noise_blocks * cfg.noise_block_size,
                                                cfg.noise_block_size);
    // pad a trailing short block when m is not divisible
    if (noise_blocks * cfg.noise_block_size < m) {
      std::vector<int> tail;
      for (int j = noise_blocks * cfg.noise_block_size; j < m; ++j) tail.push_back(j);
      inst.noise_layout.blocks.push_back(std::move(tail));
    }
    for (int b : rng.sample_without_replacement(noise_blocks, active_noise))
      for (int j : inst.noise_layout.blocks[static_cast<size_t>(b)]) inst.e_true[j] = rng.normal();
  } else {
    for (int b = 0; b < active_noise; ++b) {
      const int start = static_cast<int>(
          rng.integer(static_cast<std::uint64_t>(m - cfg.noise_block_size + 1)));
      for (int j = start; j < start + cfg.noise_block_size; ++j) inst.e_true[j] = rng.normal();
    }
  }

  const double k_signal = static_cast<double>(cfg.active_signal_blocks * bs);
  const double sigma_n =
      std::sqrt(k_signal / (static_cast<double>(m) * std::pow(10.0, cfg.sdnr_db / 10.0)));
  Eigen::VectorXd y = a * inst.x_true + inst.e_true;
  for (int j = 0; j < m; ++j) y[j] += sigma_n * rng.normal();
  inst.system = LinearSystem{std::move(a), std::move(y)};
  return inst;
}

}  // namespace sdrvm
