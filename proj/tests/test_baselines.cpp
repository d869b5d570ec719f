#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "sdrvm/baselines.hpp"
#include "sdrvm/block.hpp"
#include "sdrvm/instances.hpp"
#include "sdrvm/rng.hpp"

using Catch::Approx;
using namespace sdrvm;

TEST_CASE("noiseless 2-sparse recovery matches least squares on the support") {
  Rng rng(51);
  Eigen::MatrixXd a = gen_measurement_matrix(20, 5, rng);
  Eigen::VectorXd x_true = Eigen::VectorXd::Zero(5);
  x_true[1] = 1.4;
  x_true[3] = -0.7;
  const LinearSystem system{a, a * x_true};
  const FitResult fit = fit_rvm(system);

  REQUIRE(fit.posterior.active == std::vector<int>{1, 3});
  Eigen::MatrixXd support(20, 2);
  support.col(0) = a.col(1);
  support.col(1) = a.col(3);
  const Eigen::Vector2d ls =
      (support.transpose() * support).ldlt().solve(support.transpose() * system.y);
  CHECK(std::abs(fit.posterior.x_hat[1] - ls[0]) < 1e-3);
  CHECK(std::abs(fit.posterior.x_hat[3] - ls[1]) < 1e-3);
  CHECK((fit.posterior.x_hat - x_true).norm() <= 1e-3);
}

TEST_CASE("scalar noise step equals the whole-range block noise step") {
  // with one noise block covering every measurement, the block solver's beta
  // update must coincide with the standard RVM scalar update through
  // m - beta tr(A Sigma A') = m - n_active + sum_i gamma_i Sigma_ii
  Rng rng(52);
  const CsConfig cfg{.n = 8, .m = 12, .k_signal = 3, .k_noise = 0};
  const CsInstance inst = gen_cs_instance(cfg, 3);

  FitOptions one_step;
  one_step.max_iter = 1;

  BlockLayout whole_noise;
  whole_noise.blocks.push_back({});
  for (int j = 0; j < 12; ++j) whole_noise.blocks[0].push_back(j);
  BlockLayout singleton_signal = BlockLayout::singletons(8);

  const FitResult rvm = fit_rvm(inst.system, {}, one_step);
  const FitResult blocked =
      fit_sdrvm_blocks(inst.system, singleton_signal, whole_noise, {}, one_step);
  CHECK(blocked.state.beta[0] == Approx(rvm.state.beta[0]).epsilon(1e-10));
}

TEST_CASE("robust variant on null data returns zero estimates") {
  Rng rng(53);
  const LinearSystem system{gen_measurement_matrix(8, 4, rng), Eigen::VectorXd::Zero(8)};
  const RbRvmResult fit = fit_rbrvm(system);
  CHECK(fit.posterior.x_hat.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.posterior.e_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("robust variant localizes a gross outlier") {
  Rng rng(54);
  Eigen::MatrixXd a = gen_measurement_matrix(30, 5, rng);
  Eigen::VectorXd x_true = Eigen::VectorXd::Zero(5);
  x_true[0] = 1.0;
  Eigen::VectorXd y = a * x_true;
  const int outlier_at = 17;
  y[outlier_at] += 5.0;
  for (int j = 0; j < 30; ++j) y[j] += 0.01 * rng.normal();

  const RbRvmResult fit = fit_rbrvm(LinearSystem{a, y});
  const std::vector<int>& noise_support = fit.report.active_noise_set;
  CHECK(std::find(noise_support.begin(), noise_support.end(), outlier_at) != noise_support.end());
  // the outlier estimate dominates all other sparse-noise entries
  int largest = 0;
  for (int j = 1; j < 30; ++j)
    if (std::abs(fit.posterior.e_hat[j]) > std::abs(fit.posterior.e_hat[largest])) largest = j;
  CHECK(largest == outlier_at);
}

TEST_CASE("robust variant is the standard fit on the augmented dictionary") {
  Rng rng(55);
  const CsConfig cfg{.n = 10, .m = 14, .k_signal = 3, .k_noise = 2};
  const CsInstance inst = gen_cs_instance(cfg, 9);
  const int n = 10, m = 14;

  Eigen::MatrixXd augmented(m, n + m);
  augmented.leftCols(n) = inst.system.A;
  augmented.rightCols(m) = Eigen::MatrixXd::Identity(m, m);
  const FitResult direct = fit_rvm(LinearSystem{augmented, inst.system.y});
  const RbRvmResult robust = fit_rbrvm(inst.system);

  // bitwise: the robust fit is defined as exactly this augmented run
  for (int i = 0; i < n; ++i) {
    CHECK(robust.posterior.x_hat[i] == direct.posterior.x_hat[i]);
    CHECK(robust.state.gamma[i] == direct.state.gamma[i]);
  }
  for (int j = 0; j < m; ++j) {
    CHECK(robust.posterior.e_hat[j] == direct.posterior.x_hat[n + j]);
    CHECK(robust.state.tilde_gamma[j] == direct.state.gamma[n + j]);
  }
  CHECK(robust.state.beta[0] == direct.state.beta[0]);
  CHECK(robust.report.iterations == direct.report.iterations);
}

TEST_CASE("forcing the sparse-noise precisions out reduces to the standard fit") {
  Rng rng(56);
  const CsConfig cfg{.n = 10, .m = 16, .k_signal = 3, .k_noise = 0, .sdnr_db = 25.0};
  const CsInstance inst = gen_cs_instance(cfg, 12);

  const FitResult plain = fit_rvm(inst.system);
  const RbRvmResult pinned = fit_rbrvm(inst.system, {}, {}, std::vector<bool>(16, true));
  CHECK((pinned.posterior.x_hat - plain.posterior.x_hat).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(pinned.posterior.e_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("report invariants") {
  Rng rng(57);
  const CsConfig cfg{.n = 6, .m = 9, .k_signal = 2, .k_noise = 1};
  const CsInstance inst = gen_cs_instance(cfg, 4);
  FitOptions opts;
  opts.max_iter = 50;
  const FitResult fit = fit_rvm(inst.system, {}, opts);
  CHECK(fit.report.iterations <= opts.max_iter);
  CHECK(fit.report.evidence_trace.size() == static_cast<size_t>(fit.report.iterations));
  CHECK(fit.state.beta.size() == 1);
}
