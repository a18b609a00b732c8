#include "calib/reliability.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "calib/error.hpp"
#include "calib/io.hpp"
#include "calib/numeric.hpp"
#include "calib/rng.hpp"
#include "calib/scaling.hpp"

namespace calib {

namespace {

std::vector<double> tempered_probs(const LogitDataset& dataset,
                                   const Temperature& T) {
  if (!dataset.binary_mode())
    throw Error(ErrorCode::ShapeMismatch,
                "reliability diagrams require a binary dataset");
  std::vector<double> probs(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i)
    probs[i] = sigmoid_scaled(dataset.scalar_logit(i), T);
  return probs;
}

int bin_of(double p, int num_bins) {
  return std::min(static_cast<int>(p * num_bins), num_bins - 1);
}

}  // namespace

ReliabilityReport reliability_bins(const LogitDataset& dataset,
                                   const Temperature& T,
                                   const BinningConfig& bins) {
  if (bins.num_bins < 2)
    throw Error(ErrorCode::InvalidArgument, "need at least 2 bins");
  const auto probs = tempered_probs(dataset, T);

  const int B = bins.num_bins;
  std::vector<double> conf_sum(B, 0.0);
  std::vector<std::size_t> pos(B, 0), count(B, 0);
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const int b = bin_of(probs[i], B);
    conf_sum[b] += probs[i];
    pos[b] += dataset.label(i) == 1 ? 1 : 0;
    count[b] += 1;
  }

  ReliabilityReport report;
  report.n = dataset.size();
  report.bins.resize(B);
  for (int b = 0; b < B; ++b) {
    auto& bin = report.bins[b];
    bin.lo = static_cast<double>(b) / B;
    bin.hi = static_cast<double>(b + 1) / B;
    bin.count = count[b];
    if (count[b] > 0) {
      bin.mean_confidence = conf_sum[b] / static_cast<double>(count[b]);
      bin.observed_frequency =
          static_cast<double>(pos[b]) / static_cast<double>(count[b]);
    }
  }
  return report;
}

ReliabilityReport consistency_intervals(const LogitDataset& dataset,
                                        const Temperature& T,
                                        const BinningConfig& bins,
                                        std::size_t n_boot,
                                        std::uint64_t seed) {
  if (n_boot < 100)
    throw Error(ErrorCode::InvalidArgument,
                "consistency intervals need n_boot >= 100");
  ReliabilityReport report = reliability_bins(dataset, T, bins);
  report.n_boot = n_boot;
  report.seed = seed;

  const auto probs = tempered_probs(dataset, T);
  const std::size_t n = probs.size();
  const int B = bins.num_bins;

  // Pre-binning the predictions lets each replicate work on bin ids
  // instead of recomputing p * B.
  std::vector<int> bin_id(n);
  for (std::size_t i = 0; i < n; ++i) bin_id[i] = bin_of(probs[i], B);

  std::vector<std::vector<double>> freqs(B);
  const Rng master(seed);
  std::vector<std::size_t> hits(B), draws(B);
  for (std::size_t r = 0; r < n_boot; ++r) {
    Rng rng = master.substream(r);
    std::fill(hits.begin(), hits.end(), 0);
    std::fill(draws.begin(), draws.end(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t idx = rng.uniform_index(n);
      const int b = bin_id[idx];
      draws[b] += 1;
      hits[b] += rng.bernoulli(probs[idx]) ? 1 : 0;
    }
    for (int b = 0; b < B; ++b) {
      if (draws[b] > 0)
        freqs[b].push_back(static_cast<double>(hits[b]) /
                           static_cast<double>(draws[b]));
    }
  }

  for (int b = 0; b < B; ++b) {
    auto& bin = report.bins[b];
    if (freqs[b].empty()) continue;
    bin.interval_lo = quantile(freqs[b], report.quantile_lo);
    bin.interval_hi = quantile(std::move(freqs[b]), report.quantile_hi);
    bin.has_interval = true;
  }
  return report;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_svg(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string reliability_csv(const ReliabilityReport& report) {
  std::ostringstream out;
  out << "bin_lo,bin_hi,mean_conf,obs_freq,count,lo,hi\n";
  for (const auto& bin : report.bins) {
    out << fmt(bin.lo) << ',' << fmt(bin.hi) << ',';
    if (bin.count > 0)
      out << fmt(bin.mean_confidence) << ',' << fmt(bin.observed_frequency);
    else
      out << "nan,nan";
    out << ',' << bin.count << ',';
    if (bin.has_interval)
      out << fmt(bin.interval_lo) << ',' << fmt(bin.interval_hi);
    else
      out << "nan,nan";
    out << '\n';
  }
  return out.str();
}

std::string reliability_svg(const ReliabilityReport& report) {
  // Fixed 480x480 canvas, data area with 56px margins, y axis flipped.
  constexpr double kSize = 480.0;
  constexpr double kMargin = 56.0;
  constexpr double kSpan = kSize - 2.0 * kMargin;
  const auto x_of = [&](double v) { return kMargin + v * kSpan; };
  const auto y_of = [&](double v) { return kSize - kMargin - v * kSpan; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" "
         "width=\"480\" height=\"480\" viewBox=\"0 0 480 480\">\n";
  svg << "  <rect x=\"0\" y=\"0\" width=\"480\" height=\"480\" "
         "fill=\"white\"/>\n";
  svg << "  <rect x=\"" << fmt_svg(kMargin) << "\" y=\"" << fmt_svg(kMargin)
      << "\" width=\"" << fmt_svg(kSpan) << "\" height=\"" << fmt_svg(kSpan)
      << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // Axis ticks every 0.2 with labels.
  for (int t = 0; t <= 5; ++t) {
    const double v = 0.2 * t;
    char label[8];
    std::snprintf(label, sizeof(label), "%.1f", v);
    svg << "  <line x1=\"" << fmt_svg(x_of(v)) << "\" y1=\""
        << fmt_svg(kSize - kMargin) << "\" x2=\"" << fmt_svg(x_of(v))
        << "\" y2=\"" << fmt_svg(kSize - kMargin + 5) << "\" stroke=\"black\" "
           "stroke-width=\"1\"/>\n";
    svg << "  <text x=\"" << fmt_svg(x_of(v)) << "\" y=\""
        << fmt_svg(kSize - kMargin + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"middle\">" << label << "</text>\n";
    svg << "  <line x1=\"" << fmt_svg(kMargin - 5) << "\" y1=\""
        << fmt_svg(y_of(v)) << "\" x2=\"" << fmt_svg(kMargin) << "\" y2=\""
        << fmt_svg(y_of(v)) << "\" stroke=\"black\" stroke-width=\"1\"/>\n";
    svg << "  <text x=\"" << fmt_svg(kMargin - 8) << "\" y=\""
        << fmt_svg(y_of(v) + 4)
        << "\" font-family=\"sans-serif\" font-size=\"11\" "
           "text-anchor=\"end\">" << label << "</text>\n";
  }
  svg << "  <text x=\"" << fmt_svg(kSize / 2) << "\" y=\""
      << fmt_svg(kSize - 14)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\">mean predicted probability</text>\n";
  svg << "  <text x=\"16\" y=\"" << fmt_svg(kSize / 2)
      << "\" font-family=\"sans-serif\" font-size=\"13\" "
         "text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << fmt_svg(kSize / 2) << ")\">observed frequency</text>\n";

  // Perfect-calibration diagonal.
  svg << "  <line x1=\"" << fmt_svg(x_of(0.0)) << "\" y1=\""
      << fmt_svg(y_of(0.0)) << "\" x2=\"" << fmt_svg(x_of(1.0)) << "\" y2=\""
      << fmt_svg(y_of(1.0))
      << "\" stroke=\"gray\" stroke-width=\"1\" stroke-dasharray=\"4,3\"/>\n";

  // Consistency bars, then markers on top.
  for (const auto& bin : report.bins) {
    if (bin.count == 0 || !bin.has_interval) continue;
    const double x = x_of(bin.mean_confidence);
    svg << "  <line x1=\"" << fmt_svg(x) << "\" y1=\""
        << fmt_svg(y_of(bin.interval_lo)) << "\" x2=\"" << fmt_svg(x)
        << "\" y2=\"" << fmt_svg(y_of(bin.interval_hi))
        << "\" stroke=\"#4878cf\" stroke-width=\"3\" opacity=\"0.7\"/>\n";
  }
  for (const auto& bin : report.bins) {
    if (bin.count == 0) continue;
    svg << "  <circle cx=\"" << fmt_svg(x_of(bin.mean_confidence))
        << "\" cy=\"" << fmt_svg(y_of(bin.observed_frequency))
        << "\" r=\"3.5\" fill=\"#d1494e\"/>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

void render_reliability(const ReliabilityReport& report, PlotFormat format,
                        const std::string& path) {
  const std::string body =
      format == PlotFormat::Csv ? reliability_csv(report)
                                : reliability_svg(report);
  write_text_atomic(path, body);
}

}  // namespace calib
