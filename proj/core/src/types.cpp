#include "calib/types.hpp"

#include <cmath>
#include <utility>

namespace calib {

Temperature::Temperature(double value) : value_(value) {
  if (!std::isfinite(value) || value <= 0.0)
    throw Error(ErrorCode::InvalidTemperature,
                "temperature must be a finite positive real, got " +
                    std::to_string(value));
}

ClassTaxonomy::ClassTaxonomy(std::vector<std::string> class_names,
                             std::vector<Malignancy> malignancy)
    : class_names_(std::move(class_names)), malignancy_(std::move(malignancy)) {
  if (class_names_.size() != malignancy_.size())
    throw Error(ErrorCode::InvalidTaxonomy,
                "class_names and malignancy flags differ in length");
  if (class_names_.size() < 2)
    throw Error(ErrorCode::InvalidTaxonomy, "taxonomy needs at least 2 classes");
  bool any_benign = false;
  bool any_malignant = false;
  for (Malignancy m : malignancy_) {
    (m == Malignancy::Benign ? any_benign : any_malignant) = true;
  }
  if (!any_benign || !any_malignant)
    throw Error(ErrorCode::InvalidTaxonomy,
                "taxonomy needs at least one benign and one malignant class");
}

LogitDataset LogitDataset::scale_logits(double factor) const {
  if (!std::isfinite(factor) || factor <= 0.0)
    throw Error(ErrorCode::InvalidArgument,
                "logit scale factor must be finite and positive");
  LogitDataset out(*this);
  for (double& z : out.logits_) z *= factor;
  return out;
}

LogitDataset validate_dataset(std::vector<double> logits, std::size_t cols,
                              std::vector<int> labels, int num_classes) {
  if (num_classes < 2)
    throw Error(ErrorCode::ShapeMismatch, "num_classes must be at least 2");
  const std::size_t n = labels.size();
  const bool binary = (cols == 1);
  if (binary && num_classes != 2)
    throw Error(ErrorCode::ShapeMismatch,
                "single-column logits imply a binary dataset (num_classes 2)");
  if (!binary && cols != static_cast<std::size_t>(num_classes))
    throw Error(ErrorCode::ShapeMismatch,
                "logit columns (" + std::to_string(cols) +
                    ") do not match num_classes (" +
                    std::to_string(num_classes) + ")");
  if (cols == 0 || logits.size() != n * cols)
    throw Error(ErrorCode::ShapeMismatch,
                "logit matrix size does not match label count");

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < cols; ++k) {
      if (!std::isfinite(logits[i * cols + k]))
        throw Error(ErrorCode::NonFiniteLogit,
                    "non-finite logit at row " + std::to_string(i) +
                        ", col " + std::to_string(k),
                    static_cast<long>(i), static_cast<long>(k));
    }
    if (labels[i] < 0 || labels[i] >= num_classes)
      throw Error(ErrorCode::LabelOutOfRange,
                  "label " + std::to_string(labels[i]) + " at row " +
                      std::to_string(i) + " outside [0, " +
                      std::to_string(num_classes) + ")",
                  static_cast<long>(i));
  }

  LogitDataset out;
  out.logits_ = std::move(logits);
  out.labels_ = std::move(labels);
  out.cols_ = cols;
  out.num_classes_ = num_classes;
  out.binary_mode_ = binary;
  return out;
}

LogitDataset validate_dataset(const std::vector<std::vector<double>>& logits,
                              const std::vector<int>& labels,
                              int num_classes) {
  if (logits.size() != labels.size())
    throw Error(ErrorCode::ShapeMismatch,
                "logit rows do not match label count");
  if (logits.empty())
    throw Error(ErrorCode::ShapeMismatch, "dataset is empty");
  const std::size_t cols = logits.front().size();
  std::vector<double> flat;
  flat.reserve(logits.size() * cols);
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (logits[i].size() != cols)
      throw Error(ErrorCode::ShapeMismatch,
                  "ragged logit row at index " + std::to_string(i),
                  static_cast<long>(i));
    flat.insert(flat.end(), logits[i].begin(), logits[i].end());
  }
  return validate_dataset(std::move(flat), cols, labels, num_classes);
}

CostMatrix::CostMatrix(std::vector<double> costs, std::size_t num_actions,
                       std::size_t num_classes,
                       std::vector<std::string> action_names)
    : costs_(std::move(costs)),
      num_actions_(num_actions),
      num_classes_(num_classes),
      action_names_(std::move(action_names)) {
  if (num_actions_ < 2)
    throw Error(ErrorCode::InvalidCostMatrix, "need at least 2 actions");
  if (num_classes_ < 2)
    throw Error(ErrorCode::InvalidCostMatrix, "need at least 2 classes");
  if (costs_.size() != num_actions_ * num_classes_)
    throw Error(ErrorCode::InvalidCostMatrix,
                "cost entries do not match actions x classes");
  if (!action_names_.empty() && action_names_.size() != num_actions_)
    throw Error(ErrorCode::InvalidCostMatrix,
                "action_names length does not match actions");
  for (double c : costs_) {
    if (!std::isfinite(c) || c < 0.0)
      throw Error(ErrorCode::InvalidCostMatrix,
                  "cost entries must be finite and non-negative");
  }
  if (action_names_.empty()) {
    for (std::size_t a = 0; a < num_actions_; ++a)
      action_names_.push_back("action" + std::to_string(a));
  }
  // Action a is dominated if some other action is never more expensive.
  for (std::size_t a = 0; a < num_actions_; ++a) {
    for (std::size_t b = 0; b < num_actions_; ++b) {
      if (a == b) continue;
      bool never_worse = true;
      for (std::size_t k = 0; k < num_classes_; ++k) {
        if (cost(b, k) > cost(a, k)) {
          never_worse = false;
          break;
        }
      }
      if (never_worse) {
        dominated_actions_.push_back(a);
        break;
      }
    }
  }
}

void SubsetSelector::check_compatible(const LogitDataset& dataset) const {
  switch (kind_) {
    case Kind::All:
      return;
    case Kind::NegativeLogit:
      if (!dataset.binary_mode())
        throw Error(ErrorCode::IncompatibleSelector,
                    "negative-logit selector requires a binary dataset");
      return;
    case Kind::PredictedBenign:
      if (dataset.binary_mode())
        throw Error(ErrorCode::IncompatibleSelector,
                    "predicted-benign selector requires a multi-class dataset");
      if (!taxonomy_)
        throw Error(ErrorCode::IncompatibleSelector,
                    "predicted-benign selector requires a taxonomy");
      if (taxonomy_->num_classes() != dataset.num_classes())
        throw Error(ErrorCode::IncompatibleSelector,
                    "taxonomy has " + std::to_string(taxonomy_->num_classes()) +
                        " classes, dataset has " +
                        std::to_string(dataset.num_classes()));
      return;
  }
}

}  // namespace calib
