#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "calib/types.hpp"

namespace calib {

// Length-K probability vector: entries in [0,1], summing to 1 within
// 1e-9. Produced by softmax_scaled; validated on construction.
class ProbabilityVector {
 public:
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t k) const { return probs_[k]; }
  const std::vector<double>& probs() const noexcept { return probs_; }

 private:
  std::vector<double> probs_;
};

// sigma(z/T) in the branch-free stable form exp(min(x,0)) / (1 + exp(-|x|));
// no overflow for |z/T| up to 1e4 and beyond, result in the open (0,1)
// only up to double rounding (saturates to 0/1 for extreme inputs).
double sigmoid_scaled(double z, const Temperature& T);

// Max-subtracted softmax of z/T.
ProbabilityVector softmax_scaled(std::span<const double> z,
                                 const Temperature& T);

// Index of the maximum logit; ties break to the lowest index.
int predict_class(std::span<const double> z);

// Binary counterpart on the scalar logit: class 1 iff z > 0. z == 0 is a
// two-logit tie and resolves to class 0 per the lowest-index rule.
int predict_class_binary(double z);

// Predicted class of example i from raw logits (temperature-invariant).
int predicted_class_of(const LogitDataset& dataset, std::size_t i);

// Mean negative log-likelihood of the tempered model over `subset`.
// Binary: -log sigma(z/T) for label 1 and -log sigma(-z/T) for label 0.
// Multi-class: logsumexp(z/T) - z_y/T. Both paths work in log space;
// no probability is ever formed and then logged. Accumulation uses
// pairwise summation.
double nll(const LogitDataset& dataset, const Temperature& T,
           std::span<const std::size_t> subset);

// NLL over the full dataset.
double nll(const LogitDataset& dataset, const Temperature& T);

}  // namespace calib
