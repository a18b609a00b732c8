#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calib/error.hpp"

namespace calib {

// Strictly positive scalar divisor applied to logits. Construction
// rejects non-finite or non-positive values, so downstream code never
// re-checks.
class Temperature {
 public:
  explicit Temperature(double value);

  double value() const noexcept { return value_; }

 private:
  double value_;
};

enum class Malignancy { Benign, Malignant };

// Class names plus a benign/malignant flag per class. Requires at least
// one class on each side; the flags define the benign-argmax calibration
// subset and the class-wise evaluation split.
class ClassTaxonomy {
 public:
  ClassTaxonomy(std::vector<std::string> class_names,
                std::vector<Malignancy> malignancy);

  int num_classes() const noexcept {
    return static_cast<int>(class_names_.size());
  }
  const std::vector<std::string>& class_names() const noexcept {
    return class_names_;
  }
  const std::vector<Malignancy>& malignancy() const noexcept {
    return malignancy_;
  }
  bool is_benign(int k) const { return malignancy_.at(k) == Malignancy::Benign; }

 private:
  std::vector<std::string> class_names_;
  std::vector<Malignancy> malignancy_;
};

// Immutable matrix of raw logits plus integer labels.
//
// Binary datasets carry one scalar logit per example: the log-odds of the
// positive class (num_classes is recorded as 2). sigma(z/T) and the
// two-class tempered softmax of (z0, z1) coincide when z = z1 - z0, so
// the scalar form loses nothing and makes the z<0 subset rule exact.
class LogitDataset {
 public:
  std::size_t size() const noexcept { return labels_.size(); }
  int num_classes() const noexcept { return num_classes_; }
  bool binary_mode() const noexcept { return binary_mode_; }
  std::size_t logit_cols() const noexcept { return cols_; }

  // Row view, length logit_cols().
  std::span<const double> row(std::size_t i) const {
    return {logits_.data() + i * cols_, cols_};
  }
  // Binary scalar logit of example i. Only meaningful in binary_mode.
  double scalar_logit(std::size_t i) const { return logits_[i]; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<double>& logits_flat() const noexcept { return logits_; }
  const std::vector<int>& labels() const noexcept { return labels_; }

  // New dataset with every logit multiplied by `factor` (> 0). Dividing
  // by a fitted temperature is scale_logits(1/T).
  LogitDataset scale_logits(double factor) const;

 private:
  friend LogitDataset validate_dataset(std::vector<double> logits,
                                       std::size_t cols,
                                       std::vector<int> labels,
                                       int num_classes);
  LogitDataset() = default;

  std::vector<double> logits_;  // row-major, size() * cols_
  std::vector<int> labels_;
  std::size_t cols_ = 0;
  int num_classes_ = 0;
  bool binary_mode_ = false;
};

// The only way to obtain a LogitDataset. Validates shape, label range and
// finiteness; the error names the first offending row/column.
//
// cols == 1 with num_classes == 2 yields a binary dataset; otherwise cols
// must equal num_classes.
LogitDataset validate_dataset(std::vector<double> logits, std::size_t cols,
                              std::vector<int> labels, int num_classes);

// Convenience overload for row-of-rows input.
LogitDataset validate_dataset(const std::vector<std::vector<double>>& logits,
                              const std::vector<int>& labels, int num_classes);

// action x class cost table. Entries are non-negative and finite. An
// action is dominated when some other action is at least as cheap for
// every class; a matrix where every action is dominated is accepted but
// flagged (all_actions_dominated) so callers can warn.
class CostMatrix {
 public:
  CostMatrix(std::vector<double> costs, std::size_t num_actions,
             std::size_t num_classes, std::vector<std::string> action_names);

  std::size_t num_actions() const noexcept { return num_actions_; }
  std::size_t num_classes() const noexcept { return num_classes_; }
  double cost(std::size_t action, std::size_t klass) const {
    return costs_[action * num_classes_ + klass];
  }
  const std::vector<double>& costs_flat() const noexcept { return costs_; }
  const std::vector<std::string>& action_names() const noexcept {
    return action_names_;
  }
  const std::vector<std::size_t>& dominated_actions() const noexcept {
    return dominated_actions_;
  }
  bool all_actions_dominated() const noexcept {
    return dominated_actions_.size() == num_actions_;
  }

 private:
  std::vector<double> costs_;
  std::size_t num_actions_;
  std::size_t num_classes_;
  std::vector<std::string> action_names_;
  std::vector<std::size_t> dominated_actions_;
};

// How the calibration subset is chosen. NegativeLogit needs a binary
// dataset; PredictedBenign needs a taxonomy matching the dataset width.
class SubsetSelector {
 public:
  enum class Kind { All, NegativeLogit, PredictedBenign };

  static SubsetSelector all() { return SubsetSelector(Kind::All, {}); }
  static SubsetSelector negative_logit() {
    return SubsetSelector(Kind::NegativeLogit, {});
  }
  static SubsetSelector predicted_benign(ClassTaxonomy taxonomy) {
    return SubsetSelector(Kind::PredictedBenign, std::move(taxonomy));
  }

  Kind kind() const noexcept { return kind_; }
  const ClassTaxonomy& taxonomy() const { return *taxonomy_; }

  // Throws IncompatibleSelector when the selector cannot be applied.
  void check_compatible(const LogitDataset& dataset) const;

 private:
  SubsetSelector(Kind kind, std::optional<ClassTaxonomy> taxonomy)
      : kind_(kind), taxonomy_(std::move(taxonomy)) {}

  Kind kind_;
  std::optional<ClassTaxonomy> taxonomy_;
};

}  // namespace calib
