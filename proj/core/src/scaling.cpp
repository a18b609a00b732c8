#include "calib/scaling.hpp"

#include <cmath>
#include <numeric>

#include "calib/error.hpp"
#include "calib/numeric.hpp"

namespace calib {

ProbabilityVector::ProbabilityVector(std::vector<double> probs)
    : probs_(std::move(probs)) {
  if (probs_.empty())
    throw Error(ErrorCode::ShapeMismatch, "empty probability vector");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0 && p <= 1.0))
      throw Error(ErrorCode::InvalidArgument,
                  "probability entry outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidArgument,
                "probabilities sum to " + std::to_string(sum));
}

double sigmoid_scaled(double z, const Temperature& T) {
  const double x = z / T.value();
  return std::exp(std::min(x, 0.0)) / (1.0 + std::exp(-std::abs(x)));
}

ProbabilityVector softmax_scaled(std::span<const double> z,
                                 const Temperature& T) {
  if (z.size() < 2)
    throw Error(ErrorCode::ShapeMismatch, "softmax needs at least 2 logits");
  const double t = T.value();
  double m = z[0] / t;
  for (double v : z) m = std::max(m, v / t);
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < z.size(); ++k) {
    out[k] = std::exp(z[k] / t - m);
    sum += out[k];
  }
  for (double& v : out) v /= sum;
  return ProbabilityVector(std::move(out));
}

int predict_class(std::span<const double> z) {
  int best = 0;
  for (std::size_t k = 1; k < z.size(); ++k) {
    if (z[k] > z[best]) best = static_cast<int>(k);
  }
  return best;
}

int predict_class_binary(double z) { return z > 0.0 ? 1 : 0; }

int predicted_class_of(const LogitDataset& dataset, std::size_t i) {
  if (dataset.binary_mode())
    return predict_class_binary(dataset.scalar_logit(i));
  return predict_class(dataset.row(i));
}

namespace {

// -log sigma(x) = softplus(-x), computed without forming sigma(x).
inline double binary_nll_term(double x, int label) {
  return label == 1 ? softplus(-x) : softplus(x);
}

}  // namespace

double nll(const LogitDataset& dataset, const Temperature& T,
           std::span<const std::size_t> subset) {
  if (subset.empty())
    throw Error(ErrorCode::EmptySubset, "NLL over an empty subset");
  const double t = T.value();
  std::vector<double> terms(subset.size());
  if (dataset.binary_mode()) {
    for (std::size_t j = 0; j < subset.size(); ++j) {
      const std::size_t i = subset[j];
      terms[j] = binary_nll_term(dataset.scalar_logit(i) / t, dataset.label(i));
    }
  } else {
    const std::size_t cols = dataset.logit_cols();
    std::vector<double> scaled(cols);
    for (std::size_t j = 0; j < subset.size(); ++j) {
      const std::size_t i = subset[j];
      const auto row = dataset.row(i);
      for (std::size_t k = 0; k < cols; ++k) scaled[k] = row[k] / t;
      terms[j] = log_sum_exp(scaled) - scaled[dataset.label(i)];
    }
  }
  return pairwise_sum(terms) / static_cast<double>(subset.size());
}

double nll(const LogitDataset& dataset, const Temperature& T) {
  std::vector<std::size_t> all(dataset.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return nll(dataset, T, all);
}

}  // namespace calib
