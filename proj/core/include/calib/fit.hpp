#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "calib/types.hpp"

namespace calib {

enum class FitMethod { GoldenSection, Grid };

struct FitResult {
  Temperature temperature;
  std::size_t subset_size = 0;
  double final_nll = 0.0;
  std::size_t iterations = 0;
  FitMethod method = FitMethod::GoldenSection;
  // Set when the minimiser landed within tolerance of a bracket end,
  // which usually means the bracket is too small.
  bool at_bracket_edge = false;
};

struct FitConfig {
  double bracket_lo = 0.05;
  double bracket_hi = 20.0;
  double tolerance = 1e-6;  // on log T
};

// Indices selected by the rule, in ascending order. Membership is
// computed from raw logits only: z < 0 (strict) for NegativeLogit, and
// argmax-in-benign-group for PredictedBenign. Dividing all logits by any
// positive temperature changes neither the sign nor the argmax, so the
// subset is invariant to scaling.
std::vector<std::size_t> select_subset(const LogitDataset& dataset,
                                       const SubsetSelector& selector);

// Minimises subset NLL over T by golden-section search on log T. The
// subset is computed once, before the search, and frozen. Throws
// EmptyCalibrationSubset when the selector matches no examples.
FitResult fit_temperature(const LogitDataset& dataset,
                          const SubsetSelector& selector,
                          const FitConfig& config = {});

// Exhaustive oracle: evaluates the subset NLL at every grid value and
// returns the argmin, preferring the lowest T on ties.
FitResult fit_temperature_grid(const LogitDataset& dataset,
                               const SubsetSelector& selector,
                               std::span<const double> grid);

// Geometric grid of `points` values covering [lo, hi].
std::vector<double> geometric_grid(double lo, double hi, std::size_t points);

}  // namespace calib
