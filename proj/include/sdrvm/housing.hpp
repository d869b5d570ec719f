#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "sdrvm/instances.hpp"
#include "sdrvm/rng.hpp"
#include "sdrvm/sweeps.hpp"
#include "sdrvm/table.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

struct HousingDataset {
  Eigen::MatrixXd features;  // 506 x 13
  Eigen::VectorXd prices;    // median home value per row
  std::vector<std::string> feature_names;

  Eigen::Index rows() const { return features.rows(); }
};

namespace detail {

inline bool parse_double(const std::string& cell, double& out) {
  std::size_t consumed = 0;
  try {
    out = std::stod(cell, &consumed);
  } catch (const std::exception&) {
    return false;
  }
  while (consumed < cell.size() &&
         std::isspace(static_cast<unsigned char>(cell[consumed])))
    ++consumed;
  return consumed == cell.size() && std::isfinite(out);
}

}  // namespace detail

/// Load a housing CSV: 13 feature columns plus the price column, optional
/// single header line. Row/column numbers in errors are 1-based data rows.
inline HousingDataset load_housing(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open housing CSV: " + path);

  constexpr int kColumns = 14;
  std::vector<std::array<double, kColumns>> rows;
  std::vector<std::string> names;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");

    if (line_no == 1) {
      double probe;
      if (!cells.empty() && !detail::parse_double(cells[0], probe)) {
        // header line
        if (static_cast<int>(cells.size()) != kColumns)
          throw WrongColumnCount("header has " + std::to_string(cells.size()) +
                                 " columns, expected " + std::to_string(kColumns));
        names.assign(cells.begin(), cells.end() - 1);
        continue;
      }
    }
    if (static_cast<int>(cells.size()) != kColumns)
      throw WrongColumnCount("row " + std::to_string(line_no) + " has " +
                             std::to_string(cells.size()) + " columns, expected " +
                             std::to_string(kColumns));
    std::array<double, kColumns> parsed{};
    for (int c = 0; c < kColumns; ++c) {
      if (!detail::parse_double(cells[static_cast<size_t>(c)], parsed[static_cast<size_t>(c)]))
        throw ParseError("non-numeric cell", line_no, c + 1);
    }
    rows.push_back(parsed);
  }
  if (rows.empty()) throw std::runtime_error("housing CSV has no data rows");

  HousingDataset dataset;
  dataset.features.resize(static_cast<Eigen::Index>(rows.size()), kColumns - 1);
  dataset.prices.resize(static_cast<Eigen::Index>(rows.size()));
  for (size_t r = 0; r < rows.size(); ++r) {
    for (int c = 0; c < kColumns - 1; ++c)
      dataset.features(static_cast<Eigen::Index>(r), c) = rows[r][static_cast<size_t>(c)];
    dataset.prices[static_cast<Eigen::Index>(r)] = rows[r][kColumns - 1];
  }
  dataset.feature_names = std::move(names);
  return dataset;
}

inline double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t h = values.size() / 2;
  return values.size() % 2 ? values[h] : 0.5 * (values[h - 1] + values[h]);
}

struct HousingRunConfig {
  double rho = 0.5;  // training fraction
  int trials = 100;
  std::uint64_t seed = 1;
  std::vector<Method> methods{Method::Rvm, Method::RbRvm, Method::Sdrvm};
  std::optional<HyperPriors> priors;  // fixed override; defaults to experiment_priors(y)
  FitOptions opts{};
  int jobs = 1;
};

/// Median house-price prediction: per trial, split the rows at random, fit
/// each method on the standardized training rows (intercept appended), and
/// score |median(true test prices) - median(predicted test prices)|.
inline ResultTable run_housing(const HousingDataset& dataset, const HousingRunConfig& cfg) {
  if (!(cfg.rho > 0.0 && cfg.rho < 1.0))
    throw std::invalid_argument("training fraction must lie in (0, 1)");
  const int rows = static_cast<int>(dataset.rows());
  const int dims = static_cast<int>(dataset.features.cols()) + 1;  // + intercept
  const int train_count = static_cast<int>(std::lround(cfg.rho * rows));

  struct TrialOut {
    bool skipped = false;
    std::vector<double> errors;   // per method
    std::vector<double> seconds;  // per method
  };
  std::vector<TrialOut> trials(static_cast<size_t>(cfg.trials));

  detail::parallel_for(cfg.trials, cfg.jobs, [&](int trial) {
    TrialOut& out = trials[static_cast<size_t>(trial)];
    if (train_count < dims || train_count >= rows) {
      out.skipped = true;
      return;
    }
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(trial)));
    std::vector<int> order(static_cast<size_t>(rows));
    for (int i = 0; i < rows; ++i) order[static_cast<size_t>(i)] = i;
    rng.shuffle(order);

    // standardize with training statistics only
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dims - 1);
    Eigen::VectorXd stddev = Eigen::VectorXd::Ones(dims - 1);
    for (int r = 0; r < train_count; ++r)
      mean += dataset.features.row(order[static_cast<size_t>(r)]).transpose();
    mean /= static_cast<double>(train_count);
    Eigen::VectorXd var = Eigen::VectorXd::Zero(dims - 1);
    for (int r = 0; r < train_count; ++r) {
      const Eigen::VectorXd centered =
          dataset.features.row(order[static_cast<size_t>(r)]).transpose() - mean;
      var += centered.cwiseProduct(centered);
    }
    var /= static_cast<double>(train_count);
    for (int c = 0; c < dims - 1; ++c) stddev[c] = var[c] > 0.0 ? std::sqrt(var[c]) : 1.0;

    auto design_row = [&](int row_index) {
      Eigen::VectorXd w(dims);
      w.head(dims - 1) =
          (dataset.features.row(row_index).transpose() - mean).cwiseQuotient(stddev);
      w[dims - 1] = 1.0;
      return w;
    };

    Eigen::MatrixXd train(train_count, dims);
    Eigen::VectorXd train_prices(train_count);
    for (int r = 0; r < train_count; ++r) {
      train.row(r) = design_row(order[static_cast<size_t>(r)]).transpose();
      train_prices[r] = dataset.prices[order[static_cast<size_t>(r)]];
    }
    const LinearSystem system{std::move(train), std::move(train_prices)};

    std::vector<double> test_prices;
    Eigen::MatrixXd test(rows - train_count, dims);
    for (int r = train_count; r < rows; ++r) {
      test.row(r - train_count) = design_row(order[static_cast<size_t>(r)]).transpose();
      test_prices.push_back(dataset.prices[order[static_cast<size_t>(r)]]);
    }
    const double median_true = median_of(test_prices);

    const HyperPriors priors = cfg.priors ? *cfg.priors : experiment_priors(system.y);
    for (Method method : cfg.methods) {
      const MethodOutput fit = run_method(method, system, nullptr, nullptr, priors, cfg.opts);
      const Eigen::VectorXd predictions = test * fit.x_hat;
      std::vector<double> predicted(predictions.data(), predictions.data() + predictions.size());
      out.errors.push_back(std::abs(median_true - median_of(predicted)));
      out.seconds.push_back(fit.seconds);
    }
  });

  ResultTable table;
  const std::string sweep_param = format_double(cfg.rho);
  long used = 0;
  for (const auto& t : trials)
    if (!t.skipped) ++used;
  if (used == 0) {
    std::cerr << "warning: all trials skipped (training split smaller than the model)\n";
    return table;
  }
  for (size_t mi = 0; mi < cfg.methods.size(); ++mi) {
    double err_sum = 0.0, sec_sum = 0.0;
    for (const auto& t : trials) {
      if (t.skipped) continue;
      err_sum += t.errors[mi];
      sec_sum += t.seconds[mi];
    }
    const std::string name = method_name(cfg.methods[mi]);
    table.push_back({sweep_param, name, "mean_abs_median_error",
                     err_sum / static_cast<double>(used), used, cfg.seed});
    table.push_back({sweep_param, name, "mean_fit_seconds", sec_sum / static_cast<double>(used),
                     used, cfg.seed});
  }
  return table;
}

}  // namespace sdrvm
