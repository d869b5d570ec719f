#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "sdrvm/types.hpp"

namespace sdrvm {

/// Sentinel reported when an error metric is exactly zero (the dB value would
/// be -infinity).
constexpr double kNmseSentinelDb = -999.0;

/// Normalized mean square error in dB over a set of trials:
/// 10 log10( sum ||x - x_hat||^2 / sum ||x||^2 ).
inline double nmse_db(const std::vector<Eigen::VectorXd>& truth,
                      const std::vector<Eigen::VectorXd>& estimate) {
  if (truth.empty() || truth.size() != estimate.size())
    throw DimensionMismatch("nmse needs matched, nonempty trial sets");
  double err = 0.0;
  double ref = 0.0;
  for (size_t t = 0; t < truth.size(); ++t) {
    if (truth[t].size() != estimate[t].size())
      throw DimensionMismatch("nmse trial vectors differ in length");
    err += (truth[t] - estimate[t]).squaredNorm();
    ref += truth[t].squaredNorm();
  }
  if (ref == 0.0) throw DivisionByZero("nmse undefined: all truth vectors are zero");
  if (err == 0.0) return kNmseSentinelDb;
  return 10.0 * std::log10(err / ref);
}

inline double nmse_db(const Eigen::VectorXd& truth, const Eigen::VectorXd& estimate) {
  return nmse_db(std::vector<Eigen::VectorXd>{truth}, std::vector<Eigen::VectorXd>{estimate});
}

}  // namespace sdrvm
