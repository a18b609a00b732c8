#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "calib/error.hpp"
#include "calib/metrics.hpp"
#include "calib/scaling.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "test_helpers.hpp"

using namespace calib;

namespace {

// Binary dataset whose tempered probability at T=1 equals the wanted
// values: z = logit(p).
LogitDataset dataset_with_probs(const std::vector<double>& probs,
                                const std::vector<int>& labels) {
  std::vector<double> z(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i)
    z[i] = std::log(probs[i] / (1.0 - probs[i]));
  return helpers::binary_dataset(std::move(z), labels);
}

}  // namespace

TEST_CASE("ece_binary reproduces the two-bin hand computation") {
  // p = [0.2, 0.2, 0.8, 0.8], labels [0,1,1,1], 2 bins:
  // 0.5*|0.2-0.5| + 0.5*|0.8-1.0| = 0.25.
  const auto ds = dataset_with_probs({0.2, 0.2, 0.8, 0.8}, {0, 1, 1, 1});
  BinningConfig two_bins{2};
  const auto report =
      ece_binary(ds, Temperature(1.0), EceRegion::All, two_bins);
  CHECK(report.value == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(report.n_used == 4);
  REQUIRE(report.per_bin.size() == 2);
  CHECK(report.per_bin[0].mean_confidence == doctest::Approx(0.2));
  CHECK(report.per_bin[0].observed_frequency == doctest::Approx(0.5));
  CHECK(report.per_bin[0].count == 2);
  CHECK(report.per_bin[1].mean_confidence == doctest::Approx(0.8));
  CHECK(report.per_bin[1].observed_frequency == doctest::Approx(1.0));
}

TEST_CASE("ece_binary is zero when confidences equal bin frequencies") {
  // Two bins; within each bin the positive rate equals every p.
  const auto ds = dataset_with_probs({0.25, 0.25, 0.25, 0.25, 0.75, 0.75,
                                      0.75, 0.75},
                                     {0, 0, 0, 1, 1, 1, 1, 0});
  const auto report =
      ece_binary(ds, Temperature(1.0), EceRegion::All, BinningConfig{2});
  CHECK(report.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("ece_binary regions split by raw logit sign") {
  const auto ds =
      helpers::binary_dataset({-2.0, -0.5, 0.0, 1.0, 3.0}, {0, 1, 0, 1, 1});
  const auto neg =
      ece_binary(ds, Temperature(1.0), EceRegion::LogitNegative);
  const auto pos =
      ece_binary(ds, Temperature(1.0), EceRegion::LogitNonNegative);
  // z = 0 belongs to the non-negative region.
  CHECK(neg.n_used == 2);
  CHECK(pos.n_used == 3);
  CHECK(neg.n_used + pos.n_used == ds.size());

  SUBCASE("empty region throws") {
    const auto all_positive = helpers::binary_dataset({0.5, 1.5}, {1, 1});
    CHECK_THROWS_AS(ece_binary(all_positive, Temperature(1.0),
                               EceRegion::LogitNegative),
                    Error);
  }
  SUBCASE("region membership never depends on the temperature") {
    for (double t : {0.2, 1.0, 9.0}) {
      CHECK(ece_binary(ds, Temperature(t), EceRegion::LogitNegative).n_used ==
            2);
      CHECK(ece_binary(ds, Temperature(t), EceRegion::LogitNonNegative)
                .n_used == 3);
    }
  }
}

TEST_CASE("property: ece_binary equals the brute-force reference exactly") {
  Rng rng(61);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(32);
    const int bins = 2 + static_cast<int>(rng.uniform_index(3));
    std::vector<double> z(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      z[i] = rng.uniform(-4.0, 4.0);
      labels[i] = rng.bernoulli(0.5) ? 1 : 0;
    }
    const auto ds = helpers::binary_dataset(z, labels);
    const double t = std::exp(rng.uniform(-1.0, 1.0));
    std::vector<double> probs(n);
    for (std::size_t i = 0; i < n; ++i)
      probs[i] = sigmoid_scaled(z[i], Temperature(t));
    const auto report =
        ece_binary(ds, Temperature(t), EceRegion::All, BinningConfig{bins});
    CHECK(report.value == oracles::brute_force_ece(probs, labels, bins));
  }
}

TEST_CASE("property: ECE is bounded and permutation invariant") {
  Rng rng(67);
  const std::size_t n = 200;
  std::vector<double> z(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = rng.uniform(-5.0, 5.0);
    labels[i] = rng.bernoulli(0.3) ? 1 : 0;
  }
  const auto ds = helpers::binary_dataset(z, labels);
  const auto base = ece_binary(ds, Temperature(1.0), EceRegion::All);
  CHECK(base.value >= 0.0);
  CHECK(base.value <= 1.0);

  // Shuffle via a fixed permutation.
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  for (std::size_t i = n - 1; i > 0; --i)
    std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
  std::vector<double> z2(n);
  std::vector<int> labels2(n);
  for (std::size_t i = 0; i < n; ++i) {
    z2[i] = z[perm[i]];
    labels2[i] = labels[perm[i]];
  }
  const auto shuffled = ece_binary(helpers::binary_dataset(z2, labels2),
                                   Temperature(1.0), EceRegion::All);
  CHECK(shuffled.value == base.value);
  CHECK(shuffled.n_used == base.n_used);
}

TEST_CASE("classwise_ece splits by argmax malignancy group") {
  const auto tax = helpers::taxonomy_bm(1, 2);  // class 0 benign
  const auto ds = helpers::multiclass_dataset(
      {{3.0, 0.0, 0.0}, {0.0, 3.0, 0.0}, {0.0, 0.0, 3.0}, {2.0, 1.0, 0.0}},
      {0, 1, 2, 0});
  const auto ben = classwise_ece(ds, tax, Temperature(1.0),
                                 ClasswiseSplit::PredictedBenign);
  const auto mal = classwise_ece(ds, tax, Temperature(1.0),
                                 ClasswiseSplit::PredictedMalignant);
  // Rows 0 and 3 predict class 0 (benign); rows 1 and 2 predict malignant.
  // n_used counts (example, class) probability entries.
  CHECK(ben.n_used == 2 * 3);
  CHECK(mal.n_used == 2 * 3);
  CHECK(ben.value >= 0.0);
  CHECK(ben.value <= 1.0);

  SUBCASE("empty split throws") {
    const auto all_benign_pred = helpers::multiclass_dataset(
        {{5.0, 0.0, 0.0}, {4.0, 1.0, 0.0}}, {0, 0});
    CHECK_THROWS_AS(classwise_ece(all_benign_pred, tax, Temperature(1.0),
                                  ClasswiseSplit::PredictedMalignant),
                    Error);
  }
}

TEST_CASE("classwise_ece agrees with two binary ECEs on a 2-class dataset") {
  // All rows predict class 0 (benign), so the PredictedBenign split is
  // the whole set; the class-wise value must equal the mean of the
  // binary ECE of p (class 1) and of 1-p (class 0).
  Rng rng(71);
  const std::size_t n = 120;
  std::vector<std::vector<double>> logits(n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = rng.uniform(0.0, 3.0);
    logits[i] = {a, a - rng.uniform(0.1, 2.0)};  // class 0 always wins
    labels[i] = rng.bernoulli(0.4) ? 1 : 0;
  }
  const auto ds = helpers::multiclass_dataset(logits, labels);
  const auto tax = ClassTaxonomy({"neg", "pos"},
                                 {Malignancy::Benign, Malignancy::Malignant});
  const double t = 1.7;
  const auto cw =
      classwise_ece(ds, tax, Temperature(t), ClasswiseSplit::PredictedBenign);

  // Binary path on the folded scalar logit z1 - z0.
  std::vector<double> z(n);
  for (std::size_t i = 0; i < n; ++i) z[i] = logits[i][1] - logits[i][0];
  const auto binary = helpers::binary_dataset(z, labels);
  const auto pos_ece =
      ece_binary(binary, Temperature(t), EceRegion::All).value;
  // Complement side: flip logits and labels.
  std::vector<double> flipped(n);
  std::vector<int> flipped_labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    flipped[i] = -z[i];
    flipped_labels[i] = 1 - labels[i];
  }
  const auto neg_ece = ece_binary(helpers::binary_dataset(flipped,
                                                          flipped_labels),
                                  Temperature(t), EceRegion::All)
                           .value;
  CHECK(cw.value == doctest::Approx(0.5 * (pos_ece + neg_ece)).epsilon(1e-9));
}

TEST_CASE("balanced_accuracy hand cases") {
  SUBCASE("perfect predictor scores 1") {
    const auto ds = helpers::binary_dataset({-1.0, -2.0, 1.0, 2.0},
                                            {0, 0, 1, 1});
    CHECK(balanced_accuracy(ds) == 1.0);
  }
  SUBCASE("hand-computed 0.75") {
    // labels [0,0,1,1], predictions [0,1,1,1]: recalls 0.5 and 1.0.
    const auto ds = helpers::binary_dataset({-1.0, 1.0, 1.0, 1.0},
                                            {0, 0, 1, 1});
    CHECK(balanced_accuracy(ds) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("constant predictor on balanced data scores 0.5") {
    const auto ds = helpers::binary_dataset({1.0, 1.0, 1.0, 1.0},
                                            {0, 0, 1, 1});
    CHECK(balanced_accuracy(ds) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("absent class is a typed error") {
    const auto ds = helpers::binary_dataset({1.0, 2.0}, {1, 1});
    try {
      balanced_accuracy(ds);
      FAIL("expected ClassAbsentFromLabels");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ClassAbsentFromLabels);
      CHECK(std::string(e.what()).find("class 0") != std::string::npos);
    }
  }
  SUBCASE("temperature cannot change it (argmax invariance)") {
    Rng rng(73);
    const auto ds = helpers::random_multiclass(100, 4, 2.0, rng);
    const double base = balanced_accuracy(ds);
    CHECK(balanced_accuracy(ds.scale_logits(1.0 / 5.0)) == base);
    CHECK(balanced_accuracy(ds.scale_logits(1.0 / 0.01)) == base);
  }
}

TEST_CASE("auc_ovr hand cases and brute force") {
  SUBCASE("perfect separation scores 1") {
    const auto ds = helpers::binary_dataset({-2.0, -1.0, 1.0, 2.0},
                                            {0, 0, 1, 1});
    CHECK(auc_ovr(ds) == 1.0);
  }
  SUBCASE("hand-computed 0.75 with one inverted pair") {
    // scores [0.1, 0.4, 0.35, 0.8] as probabilities; logit is monotone,
    // so the AUC is the same 3-of-4 pair count.
    const auto ds = dataset_with_probs({0.1, 0.4, 0.35, 0.8}, {0, 0, 1, 1});
    CHECK(auc_ovr(ds) == doctest::Approx(0.75).epsilon(1e-12));
  }
  SUBCASE("temperature scaling cannot change the ranks") {
    Rng rng(79);
    const auto ds = helpers::random_multiclass(80, 3, 2.0, rng);
    const double base = auc_ovr(ds);
    CHECK(auc_ovr(ds.scale_logits(1.0 / 5.0)) == base);
    CHECK(auc_ovr(ds.scale_logits(1.0 / 0.2)) == base);
  }
  SUBCASE("ties contribute one half") {
    const auto ds = helpers::binary_dataset({0.5, 0.5}, {0, 1});
    CHECK(auc_ovr(ds) == doctest::Approx(0.5).epsilon(1e-12));
  }
  SUBCASE("property: equals brute-force pair counting") {
    Rng rng(83);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 4 + rng.uniform_index(61);
      std::vector<double> z(n);
      std::vector<int> labels(n);
      bool has_both = false;
      for (std::size_t i = 0; i < n; ++i) {
        // Quantized logits so ties actually happen.
        z[i] = std::round(rng.uniform(-3.0, 3.0) * 4.0) / 4.0;
        labels[i] = rng.bernoulli(0.5) ? 1 : 0;
      }
      for (std::size_t i = 1; i < n; ++i)
        if (labels[i] != labels[0]) has_both = true;
      if (!has_both) labels[0] = 1 - labels[0];
      const auto ds = helpers::binary_dataset(z, labels);

      // Class 1 side: score z; class 0 side: score -z with flipped labels.
      std::vector<double> neg_z(n);
      std::vector<int> flipped(n);
      for (std::size_t i = 0; i < n; ++i) {
        neg_z[i] = -z[i];
        flipped[i] = 1 - labels[i];
      }
      const double expected = 0.5 * (oracles::brute_force_auc(z, labels) +
                                     oracles::brute_force_auc(neg_z, flipped));
      CHECK(auc_ovr(ds) == doctest::Approx(expected).epsilon(1e-13));
    }
  }
  SUBCASE("absent class is a typed error") {
    const auto ds = helpers::binary_dataset({0.5, 1.0}, {1, 1});
    CHECK_THROWS_AS(auc_ovr(ds), Error);
  }
}

TEST_CASE("binning config is validated") {
  const auto ds = helpers::binary_dataset({0.0, 1.0}, {0, 1});
  CHECK_THROWS_AS(
      ece_binary(ds, Temperature(1.0), EceRegion::All, BinningConfig{1}),
      Error);
}

TEST_CASE("boundary probability 1.0 lands in the top bin") {
  // z huge -> p saturates to 1.0 exactly; must not index past the end.
  const auto ds = helpers::binary_dataset({1e6, 1e6}, {1, 1});
  const auto report = ece_binary(ds, Temperature(1.0), EceRegion::All,
                                 BinningConfig{15});
  REQUIRE(report.per_bin.size() == 1);
  CHECK(report.per_bin[0].hi == doctest::Approx(1.0));
  CHECK(report.per_bin[0].count == 2);
  CHECK(report.value == doctest::Approx(0.0).epsilon(1e-12));
}
