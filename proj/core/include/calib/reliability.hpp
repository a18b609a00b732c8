#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "calib/metrics.hpp"
#include "calib/types.hpp"

namespace calib {

struct ReliabilityBin {
  double lo = 0.0;
  double hi = 0.0;
  double mean_confidence = 0.0;
  double observed_frequency = 0.0;
  std::size_t count = 0;  // 0 marks an empty bin; no statistics are faked
  double interval_lo = 0.0;
  double interval_hi = 0.0;
  bool has_interval = false;
};

// Per-bin reliability statistics with 5%-95% bootstrap consistency
// intervals. The intervals answer "where would the observed frequency
// fall if the predictions were true probabilities", so markers outside
// the bars indicate miscalibration.
struct ReliabilityReport {
  std::vector<ReliabilityBin> bins;  // one entry per bin, empty bins included
  std::size_t n = 0;
  double quantile_lo = 0.05;
  double quantile_hi = 0.95;
  std::size_t n_boot = 0;
  std::uint64_t seed = 0;
};

// Bins tempered probabilities of a binary dataset; observed frequency is
// the positive-label rate per bin. No intervals yet (has_interval false).
ReliabilityReport reliability_bins(const LogitDataset& dataset,
                                   const Temperature& T,
                                   const BinningConfig& bins = {});

// Consistency resampling: each replicate resamples N predictions with
// replacement, draws every outcome as Bernoulli(prediction), and rebins.
// Per-bin interval = empirical 5th/95th percentile of the replicate
// frequencies (replicates in which the bin is empty contribute nothing
// to that bin). Replicate r uses substream(seed, r), so results do not
// depend on evaluation order. Requires n_boot >= 100.
ReliabilityReport consistency_intervals(const LogitDataset& dataset,
                                        const Temperature& T,
                                        const BinningConfig& bins,
                                        std::size_t n_boot,
                                        std::uint64_t seed);

enum class PlotFormat { Svg, Csv };

// Writes the report as a static SVG reliability diagram or as CSV with
// header bin_lo,bin_hi,mean_conf,obs_freq,count,lo,hi. Byte-deterministic
// for identical reports; file goes through a temp-and-rename write.
void render_reliability(const ReliabilityReport& report, PlotFormat format,
                        const std::string& path);

// The serialized forms, exposed for tests and in-memory use.
std::string reliability_csv(const ReliabilityReport& report);
std::string reliability_svg(const ReliabilityReport& report);

}  // namespace calib
