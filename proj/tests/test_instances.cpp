#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "sdrvm/instances.hpp"

using Catch::Approx;
using namespace sdrvm;

TEST_CASE("dense-noise variance follows the SDNR definition") {
  CsConfig cfg;
  cfg.k_signal = 10;
  cfg.m = 50;
  cfg.sdnr_db = 20.0;
  CHECK(cfg.dense_noise_variance() == Approx(0.002).epsilon(1e-12));
}

TEST_CASE("measurement columns have unit norm") {
  Rng rng(71);
  const Eigen::MatrixXd a = gen_measurement_matrix(30, 20, rng);
  for (int c = 0; c < 20; ++c) CHECK(std::abs(a.col(c).norm() - 1.0) < 1e-12);
}

TEST_CASE("same seed reproduces the instance bit for bit") {
  const CsConfig cfg{.n = 20, .m = 14, .k_signal = 4, .k_noise = 2};
  const CsInstance a = gen_cs_instance(cfg, 99);
  const CsInstance b = gen_cs_instance(cfg, 99);
  CHECK(a.system.A == b.system.A);
  CHECK(a.system.y == b.system.y);
  CHECK(a.x_true == b.x_true);
  CHECK(a.e_true == b.e_true);
  const CsInstance c = gen_cs_instance(cfg, 100);
  CHECK(a.system.y != c.system.y);
}

TEST_CASE("sparsity counts are honored exactly") {
  const CsConfig cfg{.n = 30, .m = 20, .k_signal = 7, .k_noise = 3};
  const CsInstance inst = gen_cs_instance(cfg, 5);
  int nz_signal = 0, nz_noise = 0;
  for (int i = 0; i < 30; ++i) nz_signal += inst.x_true[i] != 0.0;
  for (int j = 0; j < 20; ++j) nz_noise += inst.e_true[j] != 0.0;
  CHECK(nz_signal == 7);
  CHECK(nz_noise == 3);
}

TEST_CASE("empirical SDNR matches the requested level") {
  const CsConfig cfg{.n = 40, .m = 30, .k_signal = 6, .k_noise = 0, .sdnr_db = 20.0};
  double signal_energy = 0.0, noise_energy = 0.0;
  for (int t = 0; t < 500; ++t) {
    const CsInstance inst =
        gen_cs_instance(cfg, mix_seed(1234, static_cast<std::uint64_t>(t)));
    const Eigen::VectorXd clean = inst.system.A * inst.x_true;
    signal_energy += clean.squaredNorm();
    noise_energy += (inst.system.y - clean - inst.e_true).squaredNorm();
  }
  const double empirical_db = 10.0 * std::log10(signal_energy / noise_energy);
  CHECK(std::abs(empirical_db - 20.0) <= 1.0);
}

TEST_CASE("config validation rejects out-of-range fields") {
  CsConfig bad;
  bad.k_signal = bad.n + 1;
  CHECK_THROWS_AS(bad.validate(), DimensionMismatch);
  CsConfig bad2;
  bad2.k_noise = bad2.m + 1;
  CHECK_THROWS_AS(bad2.validate(), DimensionMismatch);
}

TEST_CASE("block instances honor the generating layouts") {
  BlockConfig cfg;
  const BlockInstance inst = gen_block_instance(cfg, 60, 3);
  CHECK(inst.x_true.size() == 100);
  inst.signal_layout.validate(100);
  inst.noise_layout.validate(60);

  // active coordinates form whole blocks of the layout
  int active_blocks = 0;
  for (const auto& block : inst.signal_layout.blocks) {
    int nz = 0;
    for (int i : block) nz += inst.x_true[i] != 0.0;
    CHECK((nz == 0 || nz == static_cast<int>(block.size())));
    active_blocks += nz > 0;
  }
  CHECK(active_blocks == cfg.active_signal_blocks);

  const BlockInstance again = gen_block_instance(cfg, 60, 3);
  CHECK(inst.system.y == again.system.y);
}

TEST_CASE("unknown-structure blocks are contiguous runs of the block size") {
  BlockConfig cfg;
  cfg.known_structure = false;
  const BlockInstance inst = gen_block_instance(cfg, 50, 4);
  // every nonzero coordinate lies in some window of the block size
  const int bs = cfg.signal_block_size();
  for (int i = 0; i < 100; ++i) {
    if (inst.x_true[i] == 0.0) continue;
    bool in_run = false;
    for (int start = std::max(0, i - bs + 1); start <= std::min(i, 100 - bs); ++start) {
      bool full = true;
      for (int k = start; k < start + bs; ++k) full &= inst.x_true[k] != 0.0;
      in_run |= full;
    }
    CHECK(in_run);
  }
}

TEST_CASE("method names round trip") {
  for (Method m : {Method::Rvm, Method::RbRvm, Method::Sdrvm, Method::SdrvmSparseDense,
                   Method::SdrvmBlock, Method::SdrvmOverlap})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK_THROWS_AS(method_from_name("nope"), std::invalid_argument);
}
