#include <cmath>
#include <vector>

#include "calib/error.hpp"
#include "calib/fit.hpp"
#include "calib/metrics.hpp"
#include "calib/scaling.hpp"
#include "calib/synth.hpp"
#include "doctest.h"
#include "test_helpers.hpp"

using namespace calib;

TEST_CASE("generate is bitwise deterministic given the seed") {
  const auto spec = SynthSpec::binary(500, 1.7, 42);
  const auto a = generate(spec);
  const auto b = generate(spec);
  CHECK(a.dataset.logits_flat() == b.dataset.logits_flat());
  CHECK(a.dataset.labels() == b.dataset.labels());
  const auto c = generate(SynthSpec::binary(500, 1.7, 43));
  CHECK(a.dataset.logits_flat() != c.dataset.logits_flat());
}

TEST_CASE("scale 1 data is calibrated: tiny ECE at large n") {
  const auto synth = generate(SynthSpec::binary(100000, 1.0, 7));
  const auto report =
      ece_binary(synth.dataset, Temperature(1.0), EceRegion::All,
                 BinningConfig{15});
  CHECK(report.value < 0.01);
}

TEST_CASE("fit recovers the generating scale (binary and multiclass)") {
  SUBCASE("binary") {
    const auto synth = generate(SynthSpec::binary(50000, 2.5, 11));
    const auto fit = fit_temperature(synth.dataset, SubsetSelector::all());
    CHECK(std::abs(fit.temperature.value() - 2.5) < 0.05);
  }
  SUBCASE("multiclass") {
    const auto synth = generate(SynthSpec::multiclass(30000, 5, 1.8, 13));
    const auto fit = fit_temperature(synth.dataset, SubsetSelector::all());
    CHECK(std::abs(fit.temperature.value() - 1.8) < 0.08);
  }
}

TEST_CASE("oracle consistency: observed frequency tracks the true posterior") {
  // Among examples whose oracle posterior sits in [p - delta, p + delta],
  // the empirical positive rate converges to about p.
  const auto synth = generate(SynthSpec::binary(200000, 1.0, 17));
  for (double p : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const double delta = 0.02;
    std::size_t count = 0, positives = 0;
    for (std::size_t i = 0; i < synth.dataset.size(); ++i) {
      const double q = synth.oracle.positive_posterior(i);
      if (q < p - delta || q > p + delta) continue;
      count += 1;
      positives += synth.dataset.label(i) == 1 ? 1 : 0;
    }
    REQUIRE(count > 100);
    const double freq =
        static_cast<double>(positives) / static_cast<double>(count);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(count));
    CHECK(std::abs(freq - p) < 3.0 * se + delta);
  }
}

TEST_CASE("oracle posterior matches sigma of the calibrated logit") {
  const auto synth = generate(SynthSpec::binary(1000, 2.0, 19));
  // Emitted logits are 2 * z_cal, so sigma(z_emitted / 2) must equal the
  // oracle posterior.
  for (std::size_t i = 0; i < 50; ++i) {
    const double rebuilt =
        sigmoid_scaled(synth.dataset.scalar_logit(i), Temperature(2.0));
    CHECK(rebuilt ==
          doctest::Approx(synth.oracle.positive_posterior(i)).epsilon(1e-12));
  }
}

TEST_CASE("scale identifiability: fitted T is monotone in the generating s") {
  double prev = 0.0;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    const auto synth = generate(SynthSpec::binary(20000, s, 23));
    const auto fit = fit_temperature(synth.dataset, SubsetSelector::all());
    CHECK(fit.temperature.value() > prev);
    prev = fit.temperature.value();
  }
}

TEST_CASE("label priors are matched empirically") {
  SynthSpec spec = SynthSpec::binary(50000, 1.0, 29);
  spec.class_priors = {0.8, 0.2};
  const auto synth = generate(spec);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < synth.dataset.size(); ++i)
    positives += synth.dataset.label(i) == 1 ? 1 : 0;
  const double freq =
      static_cast<double>(positives) / static_cast<double>(synth.dataset.size());
  const double se = std::sqrt(0.2 * 0.8 / 50000.0);
  CHECK(std::abs(freq - 0.2) < 3.0 * se);
}

TEST_CASE("multiclass label priors and posterior sanity") {
  SynthSpec spec = SynthSpec::multiclass(30000, 3, 1.0, 31);
  spec.class_priors = {0.6, 0.3, 0.1};
  const auto synth = generate(spec);
  std::vector<std::size_t> counts(3, 0);
  for (std::size_t i = 0; i < synth.dataset.size(); ++i)
    counts[synth.dataset.label(i)] += 1;
  for (int k = 0; k < 3; ++k) {
    const double p = spec.class_priors[k];
    const double freq =
        static_cast<double>(counts[k]) / static_cast<double>(spec.n);
    const double se = std::sqrt(p * (1.0 - p) / static_cast<double>(spec.n));
    CHECK(std::abs(freq - p) < 3.5 * se);
  }
  // Posterior rows are proper distributions.
  for (std::size_t i = 0; i < 20; ++i) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 3; ++k) sum += synth.oracle.posterior(i, k);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("region generator degenerates to the uniform generator") {
  SynthSpec spec = SynthSpec::binary(2000, 1.0, 37);
  spec.miscal_scale = 2.2;  // ignored by the region generator inputs below
  const auto uniform = generate(SynthSpec::binary(2000, 2.2, 37));
  SynthSpec base = SynthSpec::binary(2000, 1.0, 37);
  const auto regional = generate_region_miscalibrated(base, 2.2, 2.2);
  CHECK(uniform.dataset.logits_flat() == regional.dataset.logits_flat());
  CHECK(uniform.dataset.labels() == regional.dataset.labels());
}

TEST_CASE("region miscalibration: T* tracks the negative-region scale") {
  SynthSpec spec = SynthSpec::binary(50000, 1.0, 41);
  const auto synth = generate_region_miscalibrated(spec, 3.0, 1.2);
  const auto t_star =
      fit_temperature(synth.dataset, SubsetSelector::negative_logit());
  const auto t_all = fit_temperature(synth.dataset, SubsetSelector::all());
  CHECK(std::abs(t_star.temperature.value() - 3.0) < 0.1);
  CHECK(t_all.temperature.value() > 1.2);
  CHECK(t_all.temperature.value() < 3.0);
  // The region scaling preserves signs, so the subset is the same set of
  // indices it would have been on calibrated logits.
  const auto subset =
      select_subset(synth.dataset, SubsetSelector::negative_logit());
  CHECK(subset.size() == t_star.subset_size);

  SUBCASE("ECE in the negative region: T* beats the global T") {
    const auto ece_star = ece_binary(synth.dataset, t_star.temperature,
                                     EceRegion::LogitNegative);
    const auto ece_all = ece_binary(synth.dataset, t_all.temperature,
                                    EceRegion::LogitNegative);
    CHECK(ece_star.value < ece_all.value);
  }
}

TEST_CASE("multiclass region generator needs a taxonomy") {
  SynthSpec spec = SynthSpec::multiclass(100, 4, 1.0, 43);
  CHECK_THROWS_AS(generate_region_miscalibrated(spec, 2.0, 1.0), Error);
  spec.taxonomy = helpers::taxonomy_bm(2, 2);
  CHECK_NOTHROW(generate_region_miscalibrated(spec, 2.0, 1.0));
}

TEST_CASE("synth spec validation") {
  SynthSpec bad = SynthSpec::binary(0, 1.0, 1);
  CHECK_THROWS_AS(generate(bad), Error);
  bad = SynthSpec::binary(10, -1.0, 1);
  CHECK_THROWS_AS(generate(bad), Error);
  bad = SynthSpec::binary(10, 1.0, 1);
  bad.class_priors = {0.7, 0.2};
  CHECK_THROWS_AS(generate(bad), Error);
  bad.class_priors = {1.0, 0.0};
  CHECK_THROWS_AS(generate(bad), Error);
  bad = SynthSpec::binary(10, 1.0, 1);
  bad.separation = {1.0, 2.0, 3.0};
  CHECK_THROWS_AS(generate(bad), Error);
}
