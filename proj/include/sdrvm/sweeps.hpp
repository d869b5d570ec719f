#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "sdrvm/baselines.hpp"
#include "sdrvm/block.hpp"
#include "sdrvm/instances.hpp"
#include "sdrvm/metrics.hpp"
#include "sdrvm/solver.hpp"
#include "sdrvm/table.hpp"

namespace sdrvm {

namespace detail {

/// Run body(i) for i in [0, count) on `jobs` threads. Work items are
/// independent and written to per-index slots, so the schedule cannot change
/// the results.
inline void parallel_for(int count, int jobs, const std::function<void(int)>& body) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || count <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> cursor{0};
  std::vector<std::thread> workers;
  workers.reserve(static_cast<size_t>(jobs));
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&]() {
      for (int i = cursor.fetch_add(1); i < count; i = cursor.fetch_add(1)) body(i);
    });
  }
  for (auto& worker : workers) worker.join();
}

inline double mean(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return values.empty() ? 0.0 : sum / static_cast<double>(values.size());
}

inline double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

}  // namespace detail

struct MethodOutput {
  Eigen::VectorXd x_hat;
  double seconds = 0.0;
  int iterations = 0;
  double evidence_first = 0.0;
  double evidence_last = 0.0;
};

/// Dispatch one fit. Block layouts are only consulted by the structured
/// solvers.
inline MethodOutput run_method(Method method, const LinearSystem& system,
                               const BlockLayout* signal_layout, const BlockLayout* noise_layout,
                               const HyperPriors& priors, const FitOptions& opts) {
  MethodOutput out;
  auto fill = [&out](const Eigen::VectorXd& x_hat, const FitReport& report) {
    out.x_hat = x_hat;
    out.seconds = report.elapsed_seconds;
    out.iterations = report.iterations;
    if (!report.evidence_trace.empty()) {
      out.evidence_first = report.evidence_trace.front();
      out.evidence_last = report.evidence_trace.back();
    }
  };
  switch (method) {
    case Method::Rvm: {
      const FitResult r = fit_rvm(system, priors, opts);
      fill(r.posterior.x_hat, r.report);
      break;
    }
    case Method::RbRvm: {
      const RbRvmResult r = fit_rbrvm(system, priors, opts);
      fill(r.posterior.x_hat, r.report);
      break;
    }
    case Method::Sdrvm: {
      const FitResult r = fit_sdrvm(system, priors, opts);
      fill(r.posterior.x_hat, r.report);
      break;
    }
    case Method::SdrvmSparseDense: {
      const FitResult r = fit_sdrvm_sparse_dense(system, priors, opts);
      fill(r.posterior.x_hat, r.report);
      break;
    }
    case Method::SdrvmBlock: {
      if (!signal_layout || !noise_layout)
        throw InvalidBlockLayout("block solver needs signal and noise layouts");
      const FitResult r = fit_sdrvm_blocks(system, *signal_layout, *noise_layout, priors, opts);
      fill(r.posterior.x_hat, r.report);
      break;
    }
    case Method::SdrvmOverlap: {
      if (!signal_layout || !noise_layout)
        throw InvalidBlockLayout("overlap solver needs signal and noise layouts");
      const FitResult r = fit_sdrvm_overlap(system, *signal_layout, *noise_layout, priors, opts);
      fill(r.posterior.x_hat, r.report);
      break;
    }
  }
  return out;
}

struct CsSweepConfig {
  int n = 100;
  std::vector<double> mn_grid{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int k_signal = 10;
  double outlier_fraction = 0.05;  // ||e||_0 = round(fraction * m)
  double sdnr_db = 20.0;
  int trials_matrices = 20;
  int trials_signals = 20;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Rvm, Method::RbRvm, Method::Sdrvm};
  std::optional<HyperPriors> priors;  // fixed override; defaults to experiment_priors(y)
  FitOptions opts{};
  int jobs = 1;
};

namespace detail {

inline void append_timing_rows(ResultTable& table, const std::string& sweep_param,
                               const std::string& method, const std::vector<double>& seconds,
                               const std::vector<double>& iterations, long trials,
                               std::uint64_t seed) {
  table.push_back({sweep_param, method, "mean_fit_seconds", mean(seconds), trials, seed});
  table.push_back({sweep_param, method, "median_fit_seconds", median(seconds), trials, seed});
  table.push_back({sweep_param, method, "mean_iterations", mean(iterations), trials, seed});
  static const double edges[] = {0.02, 0.05, 0.1, 0.2, 0.5};
  std::vector<long> counts(std::size(edges) + 1, 0);
  for (double s : seconds) {
    size_t bin = std::size(edges);
    for (size_t k = 0; k < std::size(edges); ++k)
      if (s <= edges[k]) {
        bin = k;
        break;
      }
    ++counts[bin];
  }
  for (size_t k = 0; k < std::size(edges); ++k)
    table.push_back({sweep_param, method, "time_hist_le_" + format_double(edges[k]) + "s",
                     static_cast<double>(counts[k]), trials, seed});
  table.push_back({sweep_param, method, "time_hist_gt_" + format_double(edges[std::size(edges) - 1]) + "s",
                   static_cast<double>(counts.back()), trials, seed});
}

}  // namespace detail

/// Compressed-sensing recovery sweep over the measurement rate m/n.
inline ResultTable run_cs_sweep(const CsSweepConfig& cfg) {
  ResultTable table;
  for (size_t point = 0; point < cfg.mn_grid.size(); ++point) {
    const double mn = cfg.mn_grid[point];
    if (!(mn > 0.0) || mn > 1.5) throw std::invalid_argument("m/n out of range (0, 1.5]");
    CsConfig inst_cfg;
    inst_cfg.n = cfg.n;
    inst_cfg.m = static_cast<int>(std::lround(mn * cfg.n));
    inst_cfg.k_signal = cfg.k_signal;
    inst_cfg.k_noise = static_cast<int>(std::lround(cfg.outlier_fraction * inst_cfg.m));
    inst_cfg.sdnr_db = cfg.sdnr_db;

    const int total = cfg.trials_matrices * cfg.trials_signals;
    struct TrialOut {
      Eigen::VectorXd x_true;
      std::vector<MethodOutput> outputs;
    };
    std::vector<TrialOut> trials(static_cast<size_t>(total));
    detail::parallel_for(total, cfg.jobs, [&](int trial) {
      const int t = trial / cfg.trials_signals;
      const int s = trial % cfg.trials_signals;
      const std::uint64_t matrix_seed = mix_seed(cfg.seed, point, static_cast<std::uint64_t>(t));
      Rng matrix_rng(matrix_seed);
      const Eigen::MatrixXd a = gen_measurement_matrix(inst_cfg.m, inst_cfg.n, matrix_rng);
      const CsInstance inst = gen_cs_instance_for_matrix(
          inst_cfg, a, mix_seed(matrix_seed, static_cast<std::uint64_t>(s) + 1));
      TrialOut& out = trials[static_cast<size_t>(trial)];
      out.x_true = inst.x_true;
      out.outputs.reserve(cfg.methods.size());
      const HyperPriors priors = cfg.priors ? *cfg.priors : experiment_priors(inst.system.y);
      for (Method method : cfg.methods)
        out.outputs.push_back(run_method(method, inst.system, nullptr, nullptr, priors, cfg.opts));
    });

    const std::string sweep_param = format_double(mn);
    for (size_t mi = 0; mi < cfg.methods.size(); ++mi) {
      std::vector<Eigen::VectorXd> truths, estimates;
      std::vector<double> seconds, iterations;
      truths.reserve(trials.size());
      for (const auto& trial : trials) {
        truths.push_back(trial.x_true);
        estimates.push_back(trial.outputs[mi].x_hat);
        seconds.push_back(trial.outputs[mi].seconds);
        iterations.push_back(static_cast<double>(trial.outputs[mi].iterations));
      }
      const std::string name = method_name(cfg.methods[mi]);
      table.push_back({sweep_param, name, "nmse_db", nmse_db(truths, estimates),
                       static_cast<long>(total), cfg.seed});
      detail::append_timing_rows(table, sweep_param, name, seconds, iterations,
                                 static_cast<long>(total), cfg.seed);
    }
  }
  return table;
}

struct BlockSweepConfig {
  BlockConfig block{};
  std::vector<double> mn_grid{0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  int trials_matrices = 10;
  int trials_signals = 10;
  std::uint64_t seed = 1;
  std::optional<HyperPriors> priors;  // fixed override; defaults to experiment_priors(y)
  FitOptions opts{};
  int jobs = 1;
};

/// Block-sparse recovery sweep. The known-structure arm hands the generating
/// disjoint layout to the block solver; the unknown-structure arm uses the
/// sliding-window dictionary instead.
inline ResultTable run_block_sweep(const BlockSweepConfig& cfg) {
  ResultTable table;
  const Method structured = cfg.block.known_structure ? Method::SdrvmBlock : Method::SdrvmOverlap;
  const std::vector<Method> methods{structured, Method::Sdrvm, Method::Rvm, Method::RbRvm};

  for (size_t point = 0; point < cfg.mn_grid.size(); ++point) {
    const double mn = cfg.mn_grid[point];
    const int m = static_cast<int>(std::lround(mn * cfg.block.n));

    const int total = cfg.trials_matrices * cfg.trials_signals;
    struct TrialOut {
      Eigen::VectorXd x_true;
      std::vector<MethodOutput> outputs;
    };
    std::vector<TrialOut> trials(static_cast<size_t>(total));

    // unknown-structure dictionary: every contiguous window, stride 1
    BlockLayout window_signal, window_noise;
    if (!cfg.block.known_structure) {
      window_signal = BlockLayout::sliding_windows(cfg.block.n, cfg.block.signal_block_size());
      window_noise = BlockLayout::sliding_windows(m, std::min(m, cfg.block.noise_block_size));
    }

    detail::parallel_for(total, cfg.jobs, [&](int trial) {
      const int t = trial / cfg.trials_signals;
      const int s = trial % cfg.trials_signals;
      const std::uint64_t inst_seed =
          mix_seed(mix_seed(cfg.seed, point, static_cast<std::uint64_t>(t)),
                   static_cast<std::uint64_t>(s) + 1);
      const BlockInstance inst = gen_block_instance(cfg.block, m, inst_seed);
      const BlockLayout& signal_layout =
          cfg.block.known_structure ? inst.signal_layout : window_signal;
      const BlockLayout& noise_layout =
          cfg.block.known_structure ? inst.noise_layout : window_noise;
      TrialOut& out = trials[static_cast<size_t>(trial)];
      out.x_true = inst.x_true;
      const HyperPriors priors = cfg.priors ? *cfg.priors : experiment_priors(inst.system.y);
      for (Method method : methods)
        out.outputs.push_back(
            run_method(method, inst.system, &signal_layout, &noise_layout, priors, cfg.opts));
    });

    const std::string sweep_param = format_double(mn);
    for (size_t mi = 0; mi < methods.size(); ++mi) {
      std::vector<Eigen::VectorXd> truths, estimates;
      std::vector<double> seconds, iterations;
      bool all_zero = true;
      for (const auto& trial : trials) {
        truths.push_back(trial.x_true);
        estimates.push_back(trial.outputs[mi].x_hat);
        seconds.push_back(trial.outputs[mi].seconds);
        iterations.push_back(static_cast<double>(trial.outputs[mi].iterations));
        if (trial.x_true.squaredNorm() > 0.0) all_zero = false;
      }
      const std::string name = method_name(methods[mi]);
      const double nmse = all_zero ? kNmseSentinelDb : nmse_db(truths, estimates);
      table.push_back({sweep_param, name, "nmse_db", nmse, static_cast<long>(total), cfg.seed});
      detail::append_timing_rows(table, sweep_param, name, seconds, iterations,
                                 static_cast<long>(total), cfg.seed);
    }
  }
  return table;
}

}  // namespace sdrvm
