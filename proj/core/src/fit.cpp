#include "calib/fit.hpp"

#include <cmath>
#include <numeric>

#include "calib/error.hpp"
#include "calib/scaling.hpp"

namespace calib {

std::vector<std::size_t> select_subset(const LogitDataset& dataset,
                                       const SubsetSelector& selector) {
  selector.check_compatible(dataset);
  std::vector<std::size_t> out;
  switch (selector.kind()) {
    case SubsetSelector::Kind::All:
      out.resize(dataset.size());
      std::iota(out.begin(), out.end(), std::size_t{0});
      break;
    case SubsetSelector::Kind::NegativeLogit:
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (dataset.scalar_logit(i) < 0.0) out.push_back(i);
      }
      break;
    case SubsetSelector::Kind::PredictedBenign:
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        if (selector.taxonomy().is_benign(predict_class(dataset.row(i))))
          out.push_back(i);
      }
      break;
  }
  return out;
}

namespace {

std::vector<std::size_t> frozen_subset(const LogitDataset& dataset,
                                       const SubsetSelector& selector) {
  auto subset = select_subset(dataset, selector);
  if (subset.empty())
    throw Error(ErrorCode::EmptyCalibrationSubset,
                "selector matched no calibration examples");
  return subset;
}

}  // namespace

FitResult fit_temperature(const LogitDataset& dataset,
                          const SubsetSelector& selector,
                          const FitConfig& config) {
  if (!(config.bracket_lo > 0.0) || !(config.bracket_hi > config.bracket_lo))
    throw Error(ErrorCode::InvalidArgument,
                "fit bracket must satisfy 0 < lo < hi");
  if (!(config.tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "fit tolerance must be positive");

  const auto subset = frozen_subset(dataset, selector);
  const auto objective = [&](double log_t) {
    return nll(dataset, Temperature(std::exp(log_t)), subset);
  };

  // Golden-section on log T: derivative-free and robust on the unimodal
  // NLL profiles this objective produces.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  const double lo0 = std::log(config.bracket_lo);
  const double hi0 = std::log(config.bracket_hi);
  double lo = lo0, hi = hi0;
  double c = hi - inv_phi * (hi - lo);
  double d = lo + inv_phi * (hi - lo);
  double fc = objective(c);
  double fd = objective(d);
  std::size_t iterations = 0;
  while (hi - lo > config.tolerance) {
    ++iterations;
    if (fc < fd) {
      hi = d;
      d = c;
      fd = fc;
      c = hi - inv_phi * (hi - lo);
      fc = objective(c);
    } else {
      lo = c;
      c = d;
      fc = fd;
      d = lo + inv_phi * (hi - lo);
      fd = objective(d);
    }
  }
  const double log_t = 0.5 * (lo + hi);
  FitResult result{Temperature(std::exp(log_t)), subset.size(), 0.0,
                   iterations, FitMethod::GoldenSection, false};
  result.final_nll = nll(dataset, result.temperature, subset);
  result.at_bracket_edge = (lo - lo0 <= config.tolerance) ||
                           (hi0 - hi <= config.tolerance);
  return result;
}

FitResult fit_temperature_grid(const LogitDataset& dataset,
                               const SubsetSelector& selector,
                               std::span<const double> grid) {
  if (grid.empty())
    throw Error(ErrorCode::InvalidArgument, "temperature grid is empty");
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (!(grid[g] > 0.0) || !std::isfinite(grid[g]))
      throw Error(ErrorCode::InvalidArgument,
                  "grid temperatures must be positive and finite");
    if (g > 0 && grid[g] < grid[g - 1])
      throw Error(ErrorCode::InvalidArgument, "grid must be ascending");
  }
  const auto subset = frozen_subset(dataset, selector);

  std::size_t best = 0;
  double best_nll = nll(dataset, Temperature(grid[0]), subset);
  for (std::size_t g = 1; g < grid.size(); ++g) {
    const double value = nll(dataset, Temperature(grid[g]), subset);
    // Strict improvement only: equal NLL keeps the lower temperature.
    if (value < best_nll) {
      best_nll = value;
      best = g;
    }
  }
  return FitResult{Temperature(grid[best]), subset.size(), best_nll,
                   grid.size(), FitMethod::Grid, false};
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2)
    throw Error(ErrorCode::InvalidArgument, "bad geometric grid spec");
  std::vector<double> grid(points);
  const double step = (std::log(hi) - std::log(lo)) /
                      static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i)
    grid[i] = std::exp(std::log(lo) + step * static_cast<double>(i));
  grid.front() = lo;
  grid.back() = hi;
  return grid;
}

}  // namespace calib
