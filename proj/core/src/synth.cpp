#include "calib/synth.hpp"

#include <cmath>

#include "calib/error.hpp"
#include "calib/rng.hpp"
#include "calib/scaling.hpp"

namespace calib {

namespace {

void check_spec(const SynthSpec& spec) {
  if (spec.n < 1)
    throw Error(ErrorCode::InvalidArgument, "synth spec needs n >= 1");
  if (spec.num_classes < 2)
    throw Error(ErrorCode::InvalidArgument, "synth spec needs >= 2 classes");
  if (!(spec.miscal_scale > 0.0) || !std::isfinite(spec.miscal_scale))
    throw Error(ErrorCode::InvalidArgument, "miscal_scale must be positive");
  const std::size_t K = static_cast<std::size_t>(spec.num_classes);
  if (!spec.class_priors.empty()) {
    if (spec.class_priors.size() != K)
      throw Error(ErrorCode::InvalidArgument, "priors length != num_classes");
    double sum = 0.0;
    for (double p : spec.class_priors) {
      // Strictly positive: a zero prior has no finite log-posterior.
      if (!(p > 0.0))
        throw Error(ErrorCode::InvalidArgument, "priors must be positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw Error(ErrorCode::InvalidArgument, "priors must sum to 1");
  }
  if (!spec.separation.empty() && spec.separation.size() != K)
    throw Error(ErrorCode::InvalidArgument, "separation length != num_classes");
}

std::vector<double> priors_of(const SynthSpec& spec) {
  if (!spec.class_priors.empty()) return spec.class_priors;
  return std::vector<double>(spec.num_classes,
                             1.0 / static_cast<double>(spec.num_classes));
}

std::vector<double> separation_of(const SynthSpec& spec) {
  if (!spec.separation.empty()) return spec.separation;
  if (spec.num_classes == 2) return {-1.0, 1.0};
  return std::vector<double>(spec.num_classes, 2.0);
}

int draw_label(Rng& rng, const std::vector<double>& priors) {
  const double u = rng.uniform();
  double cum = 0.0;
  for (std::size_t k = 0; k + 1 < priors.size(); ++k) {
    cum += priors[k];
    if (u < cum) return static_cast<int>(k);
  }
  return static_cast<int>(priors.size()) - 1;
}

struct CalibratedSample {
  std::vector<double> calibrated_logits;  // row-major, n x cols
  std::vector<int> labels;
  std::size_t cols;
};

// Draws labels and scores and returns the exact calibrated logits.
CalibratedSample draw_calibrated(const SynthSpec& spec) {
  const auto priors = priors_of(spec);
  const auto mean = separation_of(spec);
  Rng rng(spec.seed);
  CalibratedSample out;
  out.labels.resize(spec.n);

  if (spec.num_classes == 2) {
    out.cols = 1;
    out.calibrated_logits.resize(spec.n);
    const double prior_odds = std::log(priors[1] / priors[0]);
    const double slope = mean[1] - mean[0];
    const double offset = 0.5 * (mean[0] * mean[0] - mean[1] * mean[1]);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const int y = draw_label(rng, priors);
      const double x = mean[y] + rng.normal();
      out.labels[i] = y;
      out.calibrated_logits[i] = prior_odds + slope * x + offset;
    }
  } else {
    const std::size_t K = static_cast<std::size_t>(spec.num_classes);
    out.cols = K;
    out.calibrated_logits.resize(spec.n * K);
    for (std::size_t i = 0; i < spec.n; ++i) {
      const int y = draw_label(rng, priors);
      out.labels[i] = y;
      for (std::size_t k = 0; k < K; ++k) {
        double x = rng.normal();
        if (static_cast<int>(k) == y) x += mean[k];
        out.calibrated_logits[i * K + k] =
            std::log(priors[k]) + mean[k] * x - 0.5 * mean[k] * mean[k];
      }
    }
  }
  return out;
}

SynthOracle oracle_from(const CalibratedSample& sample, int num_classes) {
  const std::size_t n = sample.labels.size();
  std::vector<double> posteriors(n * static_cast<std::size_t>(num_classes));
  const Temperature unit(1.0);
  if (sample.cols == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid_scaled(sample.calibrated_logits[i], unit);
      posteriors[i * 2] = 1.0 - p;
      posteriors[i * 2 + 1] = p;
    }
  } else {
    const std::size_t K = sample.cols;
    for (std::size_t i = 0; i < n; ++i) {
      const auto probs = softmax_scaled(
          {sample.calibrated_logits.data() + i * K, K}, unit);
      for (std::size_t k = 0; k < K; ++k) posteriors[i * K + k] = probs[k];
    }
  }
  return SynthOracle(std::move(posteriors),
                     static_cast<std::size_t>(num_classes));
}

}  // namespace

SynthSpec SynthSpec::binary(std::size_t n, double miscal_scale,
                            std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.num_classes = 2;
  spec.miscal_scale = miscal_scale;
  spec.seed = seed;
  return spec;
}

SynthSpec SynthSpec::multiclass(std::size_t n, int num_classes,
                                double miscal_scale, std::uint64_t seed) {
  SynthSpec spec;
  spec.n = n;
  spec.num_classes = num_classes;
  spec.miscal_scale = miscal_scale;
  spec.seed = seed;
  return spec;
}

SynthResult generate(const SynthSpec& spec) {
  check_spec(spec);
  auto sample = draw_calibrated(spec);
  auto oracle = oracle_from(sample, spec.num_classes);
  for (double& z : sample.calibrated_logits) z *= spec.miscal_scale;
  return SynthResult{
      validate_dataset(std::move(sample.calibrated_logits), sample.cols,
                       std::move(sample.labels), spec.num_classes),
      std::move(oracle)};
}

SynthResult generate_region_miscalibrated(const SynthSpec& spec, double s_neg,
                                          double s_pos) {
  check_spec(spec);
  if (!(s_neg > 0.0) || !(s_pos > 0.0))
    throw Error(ErrorCode::InvalidArgument, "region scales must be positive");
  const bool multiclass = spec.num_classes != 2;
  if (multiclass && !spec.taxonomy)
    throw Error(ErrorCode::InvalidArgument,
                "multi-class region miscalibration needs a taxonomy");
  if (multiclass &&
      spec.taxonomy->num_classes() != spec.num_classes)
    throw Error(ErrorCode::ShapeMismatch, "taxonomy does not match classes");

  auto sample = draw_calibrated(spec);
  auto oracle = oracle_from(sample, spec.num_classes);
  const std::size_t n = sample.labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    bool in_region;
    if (!multiclass) {
      in_region = sample.calibrated_logits[i] < 0.0;
    } else {
      const std::span<const double> row{
          sample.calibrated_logits.data() + i * sample.cols, sample.cols};
      in_region = spec.taxonomy->is_benign(predict_class(row));
    }
    const double s = in_region ? s_neg : s_pos;
    for (std::size_t k = 0; k < sample.cols; ++k)
      sample.calibrated_logits[i * sample.cols + k] *= s;
  }
  return SynthResult{
      validate_dataset(std::move(sample.calibrated_logits), sample.cols,
                       std::move(sample.labels), spec.num_classes),
      std::move(oracle)};
}

}  // namespace calib
