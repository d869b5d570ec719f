#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <string>

#include "sdrvm/housing.hpp"

using Catch::Approx;
using namespace sdrvm;

namespace {

const std::string kCsv = std::string(SDRVM_DATA_DIR) + "/boston_housing.csv";

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "tmp_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("the bundled dataset loads with 506 rows") {
  const HousingDataset dataset = load_housing(kCsv);
  CHECK(dataset.rows() == 506);
  CHECK(dataset.features.cols() == 13);
  REQUIRE(dataset.feature_names.size() == 13);
  CHECK(dataset.feature_names.front() == "CRIM");
  CHECK(dataset.feature_names.back() == "LSTAT");
  // first record of the canonical ordering
  CHECK(dataset.features(0, 0) == Approx(0.00632));
  CHECK(dataset.prices[0] == Approx(24.0));
  CHECK(dataset.prices.minCoeff() > 0.0);
}

TEST_CASE("wrong column counts are rejected") {
  const std::string path =
      write_temp("short.csv", "1,2,3,4,5,6,7,8,9,10,11,12,13\n");
  CHECK_THROWS_AS(load_housing(path), WrongColumnCount);
  std::remove(path.c_str());
}

TEST_CASE("a non-numeric cell reports its location") {
  std::string content;
  for (int r = 1; r <= 10; ++r) {
    for (int c = 0; c < 14; ++c) content += (c ? "," : "") + std::to_string(r);
    content += "\n";
  }
  content.replace(content.find("7,7,7"), 1, "x");
  const std::string path = write_temp("badcell.csv", content);
  try {
    load_housing(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.row == 7);
    CHECK(e.col == 1);
  }
  std::remove(path.c_str());
}

TEST_CASE("missing file is reported") {
  CHECK_THROWS_AS(load_housing("does_not_exist.csv"), std::runtime_error);
}

TEST_CASE("median helper") {
  CHECK(median_of({3.0, 1.0, 2.0}) == Approx(2.0));
  CHECK(median_of({4.0, 1.0, 2.0, 3.0}) == Approx(2.5));
}

TEST_CASE("a run emits per-method error and timing rows") {
  const HousingDataset dataset = load_housing(kCsv);
  HousingRunConfig cfg;
  cfg.trials = 3;
  cfg.methods = {Method::Rvm};
  cfg.seed = 2;
  const ResultTable table = run_housing(dataset, cfg);
  REQUIRE(table.size() == 2);
  CHECK(table[0].metric == "mean_abs_median_error");
  CHECK(table[0].trials == 3);
  CHECK(std::isfinite(table[0].value));
  CHECK(table[0].value >= 0.0);
  CHECK(table[1].metric == "mean_fit_seconds");

  // parallel run matches
  cfg.jobs = 3;
  const ResultTable parallel = run_housing(dataset, cfg);
  CHECK(parallel[0].value == table[0].value);
}

TEST_CASE("degenerate training fractions skip every trial") {
  const HousingDataset dataset = load_housing(kCsv);
  HousingRunConfig cfg;
  cfg.rho = 0.02;  // ~10 training rows, fewer than the 14 model dimensions
  cfg.trials = 2;
  cfg.methods = {Method::Rvm};
  CHECK(run_housing(dataset, cfg).empty());
  cfg.rho = 1.5;
  CHECK_THROWS_AS(run_housing(dataset, cfg), std::invalid_argument);
}

TEST_CASE("robust fits beat the plain baseline on median price error") {
  const HousingDataset dataset = load_housing(kCsv);
  HousingRunConfig cfg;
  cfg.rho = 0.5;
  cfg.trials = 20;
  cfg.seed = 6;
  cfg.methods = {Method::Rvm, Method::Sdrvm};
  const ResultTable table = run_housing(dataset, cfg);
  double rvm_error = -1.0, sdrvm_error = -1.0;
  for (const auto& row : table) {
    if (row.metric != "mean_abs_median_error") continue;
    if (row.method == "rvm") rvm_error = row.value;
    if (row.method == "sdrvm") sdrvm_error = row.value;
  }
  REQUIRE(rvm_error >= 0.0);
  REQUIRE(sdrvm_error >= 0.0);
  CHECK(sdrvm_error < rvm_error);
}
