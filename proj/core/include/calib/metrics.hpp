#pragma once

#include <cstddef>
#include <vector>

#include "calib/types.hpp"

namespace calib {

// Equal-width binning of [0,1]. Bins are half-open [lo, hi) except the
// last, which also takes p = 1.0.
struct BinningConfig {
  int num_bins = 15;
};

struct BinStat {
  double lo = 0.0;
  double hi = 0.0;
  double mean_confidence = 0.0;
  double observed_frequency = 0.0;
  std::size_t count = 0;
  // Class whose probability was binned; -1 for the binary metric.
  int class_index = -1;
};

// ECE = count-weighted mean over non-empty bins of
// |mean confidence - observed frequency|. Empty bins are skipped.
// For class-wise reports each (example, class) probability entry is one
// contribution, so n_used counts entries, not examples.
struct EceReport {
  double value = 0.0;
  std::vector<BinStat> per_bin;  // non-empty bins only
  std::size_t n_used = 0;
};

enum class EceRegion { All, LogitNegative, LogitNonNegative };
enum class ClasswiseSplit { PredictedBenign, PredictedMalignant };

// Binary ECE restricted to a raw-logit-sign region (z < 0, or z >= 0 for
// LogitNonNegative). Region membership never looks at tempered
// probabilities, so it is the same at every temperature. Bins are the
// global [0,1] grid restricted to the region; gaps are weighted by the
// region's own counts.
EceReport ece_binary(const LogitDataset& dataset, const Temperature& T,
                     EceRegion region, const BinningConfig& bins = {});

// Class-wise ECE over the examples whose raw-logit argmax falls in the
// split's malignancy group. Within the split, class k's tempered
// probability is binned against the indicator label == k; the report
// value is the unweighted mean of the K per-class ECEs (equivalently the
// count-weighted mean over all (class, bin) cells, since every class
// contributes the same entry count).
EceReport classwise_ece(const LogitDataset& dataset,
                        const ClassTaxonomy& taxonomy, const Temperature& T,
                        ClasswiseSplit split, const BinningConfig& bins = {});

// Unweighted mean of per-class recall under the raw-logit argmax
// prediction; temperature has no effect. Throws ClassAbsentFromLabels
// (naming the class) when some class has no true examples.
double balanced_accuracy(const LogitDataset& dataset);

// Macro-averaged one-vs-rest AUC via the Mann-Whitney rank statistic,
// ties counted 1/2. Examples are ranked by the class's one-vs-rest
// log-odds computed from raw logits — the same ordering as the tempered
// probability at T = 1 and independent of any temperature, which keeps
// the statistic exactly calibration-free.
double auc_ovr(const LogitDataset& dataset);

}  // namespace calib
