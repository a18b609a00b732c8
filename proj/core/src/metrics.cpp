#include "calib/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "calib/error.hpp"
#include "calib/numeric.hpp"
#include "calib/scaling.hpp"

namespace calib {

namespace {

void check_bins(const BinningConfig& bins) {
  if (bins.num_bins < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least 2 bins");
}

int bin_index(double p, int num_bins) {
  int b = static_cast<int>(p * num_bins);
  return std::min(b, num_bins - 1);  // p = 1.0 goes to the top bin
}

struct BinAccumulator {
  std::vector<double> conf_sum;
  std::vector<std::size_t> pos_count;
  std::vector<std::size_t> count;

  explicit BinAccumulator(int num_bins)
      : conf_sum(num_bins, 0.0), pos_count(num_bins, 0), count(num_bins, 0) {}

  void add(double p, bool outcome) {
    const int b = bin_index(p, static_cast<int>(count.size()));
    conf_sum[b] += p;
    pos_count[b] += outcome ? 1 : 0;
    count[b] += 1;
  }

  // Appends non-empty bins to `out` and returns the count-weighted gap
  // sum together with the total count.
  std::pair<double, std::size_t> finalize(std::vector<BinStat>& out,
                                          int class_index) const {
    const int num_bins = static_cast<int>(count.size());
    double gap_sum = 0.0;
    std::size_t total = 0;
    for (int b = 0; b < num_bins; ++b) {
      if (count[b] == 0) continue;
      const double n = static_cast<double>(count[b]);
      BinStat stat;
      stat.lo = static_cast<double>(b) / num_bins;
      stat.hi = static_cast<double>(b + 1) / num_bins;
      stat.mean_confidence = conf_sum[b] / n;
      stat.observed_frequency = static_cast<double>(pos_count[b]) / n;
      stat.count = count[b];
      stat.class_index = class_index;
      out.push_back(stat);
      gap_sum += n * std::abs(stat.mean_confidence - stat.observed_frequency);
      total += count[b];
    }
    return {gap_sum, total};
  }
};

bool in_region(double z, EceRegion region) {
  switch (region) {
    case EceRegion::All: return true;
    case EceRegion::LogitNegative: return z < 0.0;
    case EceRegion::LogitNonNegative: return z >= 0.0;
  }
  return false;
}

}  // namespace

EceReport ece_binary(const LogitDataset& dataset, const Temperature& T,
                     EceRegion region, const BinningConfig& bins) {
  check_bins(bins);
  if (!dataset.binary_mode())
    throw Error(ErrorCode::ShapeMismatch,
                "ece_binary requires a binary dataset");

  BinAccumulator acc(bins.num_bins);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const double z = dataset.scalar_logit(i);
    if (!in_region(z, region)) continue;
    acc.add(sigmoid_scaled(z, T), dataset.label(i) == 1);
  }

  EceReport report;
  const auto [gap_sum, total] = acc.finalize(report.per_bin, -1);
  if (total == 0)
    throw Error(ErrorCode::EmptyRegion, "no examples in the requested region");
  report.n_used = total;
  report.value = gap_sum / static_cast<double>(total);
  return report;
}

EceReport classwise_ece(const LogitDataset& dataset,
                        const ClassTaxonomy& taxonomy, const Temperature& T,
                        ClasswiseSplit split, const BinningConfig& bins) {
  check_bins(bins);
  if (dataset.binary_mode())
    throw Error(ErrorCode::ShapeMismatch,
                "classwise_ece requires a multi-class dataset");
  if (taxonomy.num_classes() != dataset.num_classes())
    throw Error(ErrorCode::ShapeMismatch,
                "taxonomy does not match dataset classes");

  const bool want_benign = (split == ClasswiseSplit::PredictedBenign);
  std::vector<std::size_t> subset;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (taxonomy.is_benign(predict_class(dataset.row(i))) == want_benign)
      subset.push_back(i);
  }
  if (subset.empty())
    throw Error(ErrorCode::EmptySplit, "no examples in the requested split");

  const int K = dataset.num_classes();
  std::vector<BinAccumulator> per_class(
      static_cast<std::size_t>(K), BinAccumulator(bins.num_bins));
  for (std::size_t i : subset) {
    const auto probs = softmax_scaled(dataset.row(i), T);
    for (int k = 0; k < K; ++k)
      per_class[k].add(probs[k], dataset.label(i) == k);
  }

  EceReport report;
  double ece_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    const auto [gap_sum, total] = per_class[k].finalize(report.per_bin, k);
    ece_sum += gap_sum / static_cast<double>(total);
    report.n_used += total;
  }
  report.value = ece_sum / static_cast<double>(K);
  return report;
}

double balanced_accuracy(const LogitDataset& dataset) {
  const int K = dataset.num_classes();
  std::vector<std::size_t> true_count(K, 0), hit_count(K, 0);
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const int y = dataset.label(i);
    true_count[y] += 1;
    if (predicted_class_of(dataset, i) == y) hit_count[y] += 1;
  }
  double recall_sum = 0.0;
  for (int k = 0; k < K; ++k) {
    if (true_count[k] == 0)
      throw Error(ErrorCode::ClassAbsentFromLabels,
                  "class " + std::to_string(k) + " has no true examples");
    recall_sum += static_cast<double>(hit_count[k]) /
                  static_cast<double>(true_count[k]);
  }
  return recall_sum / static_cast<double>(K);
}

namespace {

// AUC of `scores` against binary outcomes via average ranks.
double mann_whitney_auc(std::vector<std::pair<double, std::uint8_t>>& scored) {
  std::sort(scored.begin(), scored.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const std::size_t n = scored.size();
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scored[j].first == scored[i].first) ++j;
    // Tied block [i, j): everyone gets the average 1-based rank.
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t r = i; r < j; ++r) {
      if (scored[r].second) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw Error(ErrorCode::ClassAbsentFromLabels,
                "one-vs-rest AUC needs both positives and negatives");
  const double u = pos_rank_sum -
                   static_cast<double>(n_pos) * (static_cast<double>(n_pos) + 1.0) / 2.0;
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace

double auc_ovr(const LogitDataset& dataset) {
  const int K = dataset.num_classes();
  const std::size_t n = dataset.size();
  double auc_sum = 0.0;
  std::vector<std::pair<double, std::uint8_t>> scored(n);
  std::vector<double> rest(dataset.logit_cols() > 0 ? dataset.logit_cols() - 1
                                                    : 0);
  for (int k = 0; k < K; ++k) {
    for (std::size_t i = 0; i < n; ++i) {
      double score;
      if (dataset.binary_mode()) {
        const double z = dataset.scalar_logit(i);
        score = (k == 1) ? z : -z;
      } else {
        // One-vs-rest log-odds of class k at T = 1.
        const auto row = dataset.row(i);
        std::size_t r = 0;
        for (std::size_t j = 0; j < row.size(); ++j) {
          if (static_cast<int>(j) != k) rest[r++] = row[j];
        }
        score = row[k] - log_sum_exp(rest);
      }
      scored[i] = {score, dataset.label(i) == k ? std::uint8_t{1}
                                                : std::uint8_t{0}};
    }
    double auc_k;
    try {
      auc_k = mann_whitney_auc(scored);
    } catch (const Error&) {
      throw Error(ErrorCode::ClassAbsentFromLabels,
                  "class " + std::to_string(k) +
                      " is absent (or exhaustive) in the labels");
    }
    auc_sum += auc_k;
  }
  return auc_sum / static_cast<double>(K);
}

}  // namespace calib
