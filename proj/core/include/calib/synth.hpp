#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "calib/types.hpp"

namespace calib {

// Synthetic dataset specification. Scores are unit-variance Gaussians
// with class-conditional means, which gives an exact closed-form
// logistic/softmax posterior — the ground truth every statistical claim
// is checked against.
//
// Binary: label y ~ priors, score x ~ N(mean[y], 1), calibrated logit
//   z = log(pi1/pi0) + (mean1 - mean0) x + (mean0^2 - mean1^2)/2.
// Multi-class: score vector x ~ N(0, I_K) with mean[y] added to
//   coordinate y, calibrated logits z_k = log pi_k + mean_k x_k - mean_k^2/2.
//
// The emitted dataset carries miscal_scale * z; fitting a temperature on
// it should recover miscal_scale.
struct SynthSpec {
  std::size_t n = 1000;
  int num_classes = 2;           // 2 selects the binary scalar-logit mode
  std::vector<double> class_priors;   // defaults to uniform
  std::vector<double> separation;     // per-class mean, defaults below
  double miscal_scale = 1.0;
  std::uint64_t seed = 0;
  // Needed by the region generator in multi-class mode; also written to
  // dataset files so downstream selectors work.
  std::optional<ClassTaxonomy> taxonomy;

  // Binary default means (-1, +1); multi-class default all-equal 2.
  static SynthSpec binary(std::size_t n, double miscal_scale,
                          std::uint64_t seed);
  static SynthSpec multiclass(std::size_t n, int num_classes,
                              double miscal_scale, std::uint64_t seed);
};

// True per-example posterior from the generating model.
class SynthOracle {
 public:
  SynthOracle(std::vector<double> posteriors, std::size_t cols)
      : posteriors_(std::move(posteriors)), cols_(cols) {}

  std::size_t size() const noexcept { return posteriors_.size() / cols_; }
  std::size_t num_classes() const noexcept { return cols_; }
  double posterior(std::size_t i, std::size_t k) const {
    return posteriors_[i * cols_ + k];
  }
  // Binary convenience: P(y = 1 | x).
  double positive_posterior(std::size_t i) const {
    return posteriors_[i * cols_ + (cols_ - 1)];
  }

 private:
  std::vector<double> posteriors_;
  std::size_t cols_;
};

struct SynthResult {
  LogitDataset dataset;
  SynthOracle oracle;
};

// Uniform miscalibration: emitted logits are miscal_scale * z.
// Bitwise-deterministic given spec.seed.
SynthResult generate(const SynthSpec& spec);

// Region-wise miscalibration: s_neg scales the decision-relevant region
// (calibrated z < 0 in binary mode; benign argmax in multi-class mode,
// which requires spec.taxonomy), s_pos scales the rest. Positive scales
// preserve sign and argmax, so region membership computed from the
// emitted logits matches the calibrated ones.
SynthResult generate_region_miscalibrated(const SynthSpec& spec, double s_neg,
                                          double s_pos);

}  // namespace calib
