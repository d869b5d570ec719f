#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "sdrvm/baselines.hpp"
#include "sdrvm/rng.hpp"
#include "sdrvm/solver.hpp"
#include "sdrvm/sweeps.hpp"
#include "sdrvm/types.hpp"

namespace sdrvm {

/// Grayscale image with intensities in [0, 1], row-major.
struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<double> pixels;

  GrayImage() = default;
  GrayImage(int r, int c, double fill = 0.0)
      : rows(r), cols(c), pixels(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& at(int r, int c) { return pixels[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return pixels[static_cast<size_t>(r) * cols + c]; }
  long size() const { return static_cast<long>(rows) * cols; }
};

namespace detail {

inline int next_pgm_token(std::istream& in, std::string& token) {
  token.clear();
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!token.empty()) return 1;
      continue;
    }
    token.push_back(static_cast<char>(ch));
  }
  return token.empty() ? 0 : 1;
}

inline long pgm_int(std::istream& in, const char* what) {
  std::string token;
  if (!next_pgm_token(in, token)) throw ParseError(std::string("missing PGM ") + what, 0, 0);
  try {
    return std::stol(token);
  } catch (const std::exception&) {
    throw ParseError(std::string("bad PGM ") + what + ": " + token, 0, 0);
  }
}

}  // namespace detail

/// Read a PGM file (P2 ASCII or P5 binary, maxval 255) into [0, 1].
inline GrayImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open image: " + path);
  std::string magic;
  if (!detail::next_pgm_token(in, magic) || (magic != "P2" && magic != "P5"))
    throw ParseError("not a PGM file (expected P2 or P5)", 0, 0);
  const long cols = detail::pgm_int(in, "width");
  const long rows = detail::pgm_int(in, "height");
  const long maxval = detail::pgm_int(in, "maxval");
  if (cols < 1 || rows < 1) throw ParseError("PGM dimensions must be positive", 0, 0);
  if (maxval != 255) throw ParseError("only maxval 255 PGM is supported", 0, 0);

  GrayImage img(static_cast<int>(rows), static_cast<int>(cols));
  if (magic == "P5") {
    std::vector<unsigned char> raw(static_cast<size_t>(img.size()));
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size()))
      throw ParseError("truncated PGM pixel data", 0, 0);
    for (long i = 0; i < img.size(); ++i)
      img.pixels[static_cast<size_t>(i)] = raw[static_cast<size_t>(i)] / 255.0;
  } else {
    for (long i = 0; i < img.size(); ++i) {
      const long v = detail::pgm_int(in, "pixel");
      if (v < 0 || v > 255) throw ParseError("PGM pixel out of range", 0, 0);
      img.pixels[static_cast<size_t>(i)] = static_cast<double>(v) / 255.0;
    }
  }
  return img;
}

/// Write a P5 binary PGM, quantizing [0, 1] to 8 bits.
inline void write_pgm(const GrayImage& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open output image: " + path);
  out << "P5\n" << img.cols << ' ' << img.rows << "\n255\n";
  for (double v : img.pixels) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
}

/// Corrupt exactly round(rho * pixels) distinct pixels with 0 or 1, each with
/// probability one half.
inline GrayImage salt_pepper(const GrayImage& img, double rho, std::uint64_t seed) {
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("corruption fraction must lie in [0, 1]");
  GrayImage out = img;
  const int count = static_cast<int>(std::lround(rho * static_cast<double>(img.size())));
  Rng rng(seed);
  for (int idx : rng.sample_without_replacement(static_cast<int>(img.size()), count))
    out.pixels[static_cast<size_t>(idx)] = rng.coin() ? 1.0 : 0.0;
  return out;
}

inline GrayImage median_filter_3x3(const GrayImage& img) {
  GrayImage out(img.rows, img.cols);
  double window[9];
  for (int r = 0; r < img.rows; ++r) {
    for (int c = 0; c < img.cols; ++c) {
      int k = 0;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          const int rr = std::clamp(r + dr, 0, img.rows - 1);
          const int cc = std::clamp(c + dc, 0, img.cols - 1);
          window[k++] = img.at(rr, cc);
        }
      std::nth_element(window, window + 4, window + 9);
      out.at(r, c) = window[4];
    }
  }
  return out;
}

/// Half-vectorization of a symmetric 2x2 matrix: [[a,b],[b,c]] -> (a, b, c).
inline Eigen::Vector3d vech(const Eigen::Matrix2d& sym) {
  if (std::abs(sym(0, 1) - sym(1, 0)) > 1e-12)
    throw NotSymmetric("vech input is not symmetric");
  return Eigen::Vector3d(sym(0, 0), sym(0, 1), sym(1, 1));
}

/// Local polynomial patch regression: each pixel value is modeled as
/// beta0 + beta1' d + beta2' vech(d d') over offsets d in the patch, with
/// observations weighted by the kernel exp(-|d|^2 / r^2) (1 + x'x_i)^p.
/// Offsets are measured from the patch center, so the polynomial kernel
/// factor is 1 at p = 1 for the center-anchored coordinates used here.
struct PatchModel {
  int side = 5;
  double r = 2.1;
  int p = 1;

  int half() const { return side / 2; }
  int patch_pixels() const { return side * side; }

  double kernel(int dr, int dc) const {
    const double d2 = static_cast<double>(dr * dr + dc * dc);
    // x is the center (origin), so x' x_i = 0 and the polynomial factor is 1
    return std::exp(-d2 / (r * r)) * std::pow(1.0, p);
  }

  /// 25x6 design for the default side: columns [1, dr, dc, dr^2, dr*dc, dc^2].
  Eigen::MatrixXd design() const {
    Eigen::MatrixXd d(patch_pixels(), 6);
    int row = 0;
    for (int dr = -half(); dr <= half(); ++dr)
      for (int dc = -half(); dc <= half(); ++dc) {
        const Eigen::Vector2d offset(static_cast<double>(dr), static_cast<double>(dc));
        d(row, 0) = 1.0;
        d(row, 1) = offset[0];
        d(row, 2) = offset[1];
        d.row(row).segment(3, 3) = vech(offset * offset.transpose()).transpose();
        ++row;
      }
    return d;
  }
};

struct DenoiseOptions {
  std::optional<HyperPriors> priors;  // fixed override; defaults to experiment_priors(y)
  FitOptions fit{};
  int jobs = 1;
};

/// Per-pixel kernel regression denoiser; the estimate is the fitted intercept.
inline GrayImage denoise_image(const GrayImage& img, Method method, const PatchModel& model = {},
                               const DenoiseOptions& opts = {}) {
  if (method != Method::Rvm && method != Method::RbRvm && method != Method::Sdrvm)
    throw std::invalid_argument("denoise supports rvm, rbrvm, and sdrvm");
  const int h = model.half();
  const Eigen::MatrixXd base_design = model.design();
  Eigen::VectorXd weights(model.patch_pixels());
  {
    int k = 0;
    for (int dr = -h; dr <= h; ++dr)
      for (int dc = -h; dc <= h; ++dc) weights[k++] = std::sqrt(model.kernel(dr, dc));
  }
  const Eigen::MatrixXd weighted_design = weights.asDiagonal() * base_design;

  GrayImage out(img.rows, img.cols);
  detail::parallel_for(static_cast<int>(img.size()), opts.jobs, [&](int pixel) {
    const int r = pixel / img.cols;
    const int c = pixel % img.cols;
    Eigen::VectorXd y(model.patch_pixels());
    int k = 0;
    for (int dr = -h; dr <= h; ++dr)
      for (int dc = -h; dc <= h; ++dc) {
        const int rr = std::clamp(r + dr, 0, img.rows - 1);
        const int cc = std::clamp(c + dc, 0, img.cols - 1);
        y[k] = weights[k] * img.at(rr, cc);
        ++k;
      }
    const LinearSystem system{weighted_design, std::move(y)};
    const HyperPriors priors = opts.priors ? *opts.priors : experiment_priors(system.y);
    double beta0 = 0.0;
    switch (method) {
      case Method::Rvm: beta0 = fit_rvm(system, priors, opts.fit).posterior.x_hat[0]; break;
      case Method::RbRvm: beta0 = fit_rbrvm(system, priors, opts.fit).posterior.x_hat[0]; break;
      default: beta0 = fit_sdrvm(system, priors, opts.fit).posterior.x_hat[0]; break;
    }
    out.at(r, c) = std::clamp(beta0, 0.0, 1.0);
  });
  return out;
}

/// Peak signal-to-noise ratio in dB with unit peak, capped at 99 dB.
inline double psnr(const GrayImage& reference, const GrayImage& estimate) {
  if (reference.rows != estimate.rows || reference.cols != estimate.cols)
    throw DimensionMismatch("psnr images differ in shape");
  double sq = 0.0;
  for (long i = 0; i < reference.size(); ++i) {
    const double d =
        reference.pixels[static_cast<size_t>(i)] - estimate.pixels[static_cast<size_t>(i)];
    sq += d * d;
  }
  const double mse = sq / static_cast<double>(reference.size());
  if (mse <= 0.0) return 99.0;
  return std::min(99.0, -10.0 * std::log10(mse));
}

}  // namespace sdrvm
