#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdrvm/metrics.hpp"

using Catch::Approx;
using namespace sdrvm;

TEST_CASE("perfect estimate hits the sentinel") {
  Eigen::VectorXd x(2);
  x << 1.0, -2.0;
  CHECK(nmse_db(x, x) == kNmseSentinelDb);
}

TEST_CASE("all-zero estimate of a unit vector is 0 dB") {
  Eigen::VectorXd x(2), zero(2);
  x << 1.0, 0.0;
  zero.setZero();
  CHECK(nmse_db(x, zero) == Approx(0.0).margin(1e-12));
}

TEST_CASE("aggregation pools errors and references across trials") {
  Eigen::VectorXd x1(2), e1(2), x2(2), e2(2);
  x1 << 1.0, 0.0;
  e1 << 0.0, 0.0;
  x2 << 2.0, 0.0;
  e2 << 2.0, 0.0;
  const std::vector<Eigen::VectorXd> truths{x1, x2}, estimates{e1, e2};
  const double value = nmse_db(truths, estimates);
  CHECK(value == Approx(10.0 * std::log10(1.0 / 5.0)).epsilon(1e-12));
}

TEST_CASE("degenerate inputs are rejected") {
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(nmse_db(zero, zero), DivisionByZero);
  CHECK_THROWS_AS(nmse_db(std::vector<Eigen::VectorXd>{}, {}), DimensionMismatch);
  Eigen::VectorXd x(2), longer(3);
  x.setOnes();
  longer.setOnes();
  CHECK_THROWS_AS(nmse_db(x, longer), DimensionMismatch);
}
