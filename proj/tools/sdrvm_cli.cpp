// Command-line front end: cs-sweep, block-sweep, housing, denoise, selfcheck.
// Exit codes: 0 success, 1 runtime failure, 2 bad arguments.

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sdrvm/sdrvm.hpp"

namespace {

std::vector<double> parse_grid(const std::string& text) {
  // "lo:hi:step" inclusive, or a single value
  double lo = 0.0, hi = 0.0, step = 0.0;
  const int fields = std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step);
  if (fields == 1) return {lo};
  if (fields != 3 || step <= 0.0 || hi < lo)
    throw std::invalid_argument("grid must be lo:hi:step with step > 0 and hi >= lo: " + text);
  std::vector<double> grid;
  for (double v = lo; v <= hi + 1e-9; v += step) grid.push_back(v);
  return grid;
}

void parse_trials(const std::string& text, int& matrices, int& signals) {
  // "AxB" = matrices x signals-per-matrix, or a single count
  int a = 0, b = 0;
  if (std::sscanf(text.c_str(), "%dx%d", &a, &b) == 2) {
    if (a < 1 || b < 1) throw std::invalid_argument("trial counts must be >= 1");
    matrices = a;
    signals = b;
    return;
  }
  if (std::sscanf(text.c_str(), "%d", &a) == 1 && a >= 1) {
    matrices = a;
    signals = 1;
    return;
  }
  throw std::invalid_argument("trials must be a count or AxB: " + text);
}

std::vector<sdrvm::Method> parse_methods(const std::string& csv) {
  std::vector<sdrvm::Method> methods;
  std::stringstream ss(csv);
  std::string name;
  while (std::getline(ss, name, ',')) methods.push_back(sdrvm::method_from_name(name));
  if (methods.empty()) throw std::invalid_argument("no methods given");
  return methods;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Bayesian learning for sparse-plus-dense noise: solvers and experiments"};
  app.require_subcommand(1);
  app.fallthrough();  // accept the global options after the subcommand too

  std::string out_path = "results.csv";
  std::string format = "csv";
  std::uint64_t seed = 1;  // default seed for every command
  int jobs = 1;

  // cs-sweep
  auto* cs = app.add_subcommand("cs-sweep", "Compressed-sensing recovery sweep over m/n");
  int cs_n = 100;
  std::string cs_mn = "0.3:0.9:0.1";
  int cs_k = 10;
  double cs_outliers = 0.05;
  double cs_sdnr = 20.0;
  std::string cs_trials = "20x20";
  std::string cs_methods = "rvm,rbrvm,sdrvm";
  cs->add_option("--n", cs_n, "Signal dimension")->capture_default_str();
  cs->add_option("--mn", cs_mn, "m/n grid lo:hi:step or single value")->capture_default_str();
  cs->add_option("--k", cs_k, "Signal sparsity")->capture_default_str();
  cs->add_option("--outliers", cs_outliers, "Sparse-noise fraction of m")->capture_default_str();
  cs->add_option("--sdnr-db", cs_sdnr, "Signal-to-dense-noise ratio in dB")->capture_default_str();
  cs->add_option("--trials", cs_trials, "Trials as matrices x signals (AxB)")->capture_default_str();
  cs->add_option("--methods", cs_methods, "Comma-separated method list")->capture_default_str();

  // block-sweep
  auto* bs = app.add_subcommand("block-sweep", "Block-sparse recovery sweep over m/n");
  int bs_n = 100;
  std::string bs_mn = "0.3:0.9:0.1";
  int bs_signal_blocks = 20;
  int bs_active_blocks = 3;
  int bs_block_size = 5;
  double bs_noise_fraction = 0.05;
  double bs_sdnr = 20.0;
  std::string bs_structure = "known";
  std::string bs_trials = "10x10";
  bs->add_option("--n", bs_n, "Signal dimension")->capture_default_str();
  bs->add_option("--mn", bs_mn, "m/n grid lo:hi:step or single value")->capture_default_str();
  bs->add_option("--signal-blocks", bs_signal_blocks, "Number of signal blocks")->capture_default_str();
  bs->add_option("--active-blocks", bs_active_blocks, "Active signal blocks")->capture_default_str();
  bs->add_option("--block-size", bs_block_size, "Noise block size")->capture_default_str();
  bs->add_option("--noise-fraction", bs_noise_fraction, "Active noise-block fraction")->capture_default_str();
  bs->add_option("--sdnr-db", bs_sdnr, "Signal-to-dense-noise ratio in dB")->capture_default_str();
  bs->add_option("--structure", bs_structure, "known|unknown block structure")
      ->check(CLI::IsMember({"known", "unknown"}))
      ->capture_default_str();
  bs->add_option("--trials", bs_trials, "Trials as matrices x signals (AxB)")->capture_default_str();

  // housing
  auto* ho = app.add_subcommand("housing", "Median house-price prediction benchmark");
  std::string ho_csv = "data/boston_housing.csv";
  double ho_rho = 0.5;
  int ho_trials = 100;
  std::string ho_methods = "rvm,rbrvm,sdrvm";
  ho->add_option("--csv", ho_csv, "Housing CSV path")->capture_default_str();
  ho->add_option("--rho", ho_rho, "Training fraction")->capture_default_str();
  ho->add_option("--trials", ho_trials, "Number of random splits")->capture_default_str();
  ho->add_option("--methods", ho_methods, "Comma-separated method list")->capture_default_str();

  // denoise
  auto* de = app.add_subcommand("denoise", "Salt-and-pepper image denoising");
  std::string de_in, de_out = "denoised.pgm", de_ref, de_method = "sdrvm";
  double de_rho = 0.2;
  de->add_option("--in", de_in, "Input PGM image")->required();
  de->add_option("--rho", de_rho, "Corruption fraction; 0 skips corruption")->capture_default_str();
  de->add_option("--method", de_method, "rvm|rbrvm|sdrvm|median|none")
      ->check(CLI::IsMember({"rvm", "rbrvm", "sdrvm", "median", "none"}))
      ->capture_default_str();
  de->add_option("--ref", de_ref, "Reference image: prints PSNR of the result against it");

  // selfcheck
  auto* sc = app.add_subcommand("selfcheck", "Run the solver identity suites");
  int sc_trials = 200;
  std::string sc_perturb;
  sc->add_option("--trials", sc_trials, "Random instances per identity")->capture_default_str();
  sc->add_option("--perturb", sc_perturb, "Deliberately break the named check (test hook)");

  app.add_option("--seed", seed, "Random seed (mt19937_64 streams)")->capture_default_str();
  app.add_option("--out", out_path, "Output file path")->capture_default_str();
  app.add_option("--format", format, "csv|json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app.add_option("--jobs", jobs, "Worker threads; results identical to --jobs 1")
      ->capture_default_str();
  de->add_option("--out", de_out, "Output image path")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (cs->parsed()) {
      sdrvm::CsSweepConfig cfg;
      cfg.n = cs_n;
      cfg.mn_grid = parse_grid(cs_mn);
      cfg.k_signal = cs_k;
      cfg.outlier_fraction = cs_outliers;
      cfg.sdnr_db = cs_sdnr;
      parse_trials(cs_trials, cfg.trials_matrices, cfg.trials_signals);
      cfg.methods = parse_methods(cs_methods);
      cfg.seed = seed;
      cfg.jobs = jobs;
      std::cerr << "cs-sweep: " << cfg.mn_grid.size() << " points, "
                << cfg.trials_matrices * cfg.trials_signals << " trials each\n";
      sdrvm::write_table(sdrvm::run_cs_sweep(cfg), out_path, format);
      std::cerr << "wrote " << out_path << "\n";
    } else if (bs->parsed()) {
      sdrvm::BlockSweepConfig cfg;
      cfg.block.n = bs_n;
      cfg.block.signal_blocks = bs_signal_blocks;
      cfg.block.active_signal_blocks = bs_active_blocks;
      cfg.block.noise_block_size = bs_block_size;
      cfg.block.active_noise_fraction = bs_noise_fraction;
      cfg.block.sdnr_db = bs_sdnr;
      cfg.block.known_structure = bs_structure == "known";
      cfg.mn_grid = parse_grid(bs_mn);
      parse_trials(bs_trials, cfg.trials_matrices, cfg.trials_signals);
      cfg.seed = seed;
      cfg.jobs = jobs;
      std::cerr << "block-sweep (" << bs_structure << " structure): " << cfg.mn_grid.size()
                << " points\n";
      sdrvm::write_table(sdrvm::run_block_sweep(cfg), out_path, format);
      std::cerr << "wrote " << out_path << "\n";
    } else if (ho->parsed()) {
      sdrvm::HousingRunConfig cfg;
      cfg.rho = ho_rho;
      cfg.trials = ho_trials;
      cfg.seed = seed;
      cfg.methods = parse_methods(ho_methods);
      cfg.jobs = jobs;
      const sdrvm::HousingDataset dataset = sdrvm::load_housing(ho_csv);
      std::cerr << "housing: " << dataset.rows() << " rows, " << cfg.trials << " splits\n";
      sdrvm::write_table(sdrvm::run_housing(dataset, cfg), out_path, format);
      std::cerr << "wrote " << out_path << "\n";
    } else if (de->parsed()) {
      sdrvm::GrayImage img = sdrvm::read_pgm(de_in);
      if (de_rho > 0.0) img = sdrvm::salt_pepper(img, de_rho, seed);
      sdrvm::GrayImage result;
      if (de_method == "median") {
        result = sdrvm::median_filter_3x3(img);
      } else if (de_method == "none") {
        result = img;
      } else {
        sdrvm::DenoiseOptions opts;
        opts.jobs = jobs;
        std::cerr << "denoising " << img.rows << "x" << img.cols << " with " << de_method << "\n";
        result = sdrvm::denoise_image(img, sdrvm::method_from_name(de_method), {}, opts);
      }
      sdrvm::write_pgm(result, de_out);
      std::cerr << "wrote " << de_out << "\n";
      if (!de_ref.empty()) {
        const sdrvm::GrayImage ref = sdrvm::read_pgm(de_ref);
        std::cout << "psnr_db " << sdrvm::format_double(sdrvm::psnr(ref, result)) << "\n";
      }
    } else if (sc->parsed()) {
      sdrvm::SelfcheckConfig cfg;
      cfg.trials = sc_trials;
      cfg.seed = seed;
      cfg.perturb = sc_perturb;
      bool all_pass = true;
      for (const auto& check : sdrvm::run_selfcheck(cfg)) {
        std::cout << check.name << ": max_error=" << sdrvm::format_double(check.max_error)
                  << " tolerance=" << sdrvm::format_double(check.tolerance) << " "
                  << (check.pass ? "ok" : "FAILED") << "\n";
        if (!check.pass) {
          if (all_pass) std::cerr << "selfcheck failed: " << check.name << "\n";
          all_pass = false;
        }
      }
      return all_pass ? 0 : 1;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
