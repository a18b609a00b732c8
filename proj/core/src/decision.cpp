#include "calib/decision.hpp"

#include <cmath>
#include <string>

#include "calib/error.hpp"

namespace calib {

double binary_threshold(const BinaryCosts& costs) {
  for (double c : {costs.c_fp, costs.c_fn, costs.c_tp, costs.c_tn}) {
    if (!std::isfinite(c))
      throw Error(ErrorCode::DegenerateCosts, "costs must be finite");
  }
  const double fp_margin = costs.c_fp - costs.c_tn;
  const double fn_margin = costs.c_fn - costs.c_tp;
  if (!(fp_margin > 0.0) || !(fn_margin > 0.0))
    throw Error(ErrorCode::DegenerateCosts,
                "errors must cost more than correct actions");
  return fp_margin / (fp_margin + fn_margin);
}

CostMatrix binary_cost_matrix(const BinaryCosts& costs) {
  // Rows are actions (benign, malignant), columns true classes.
  return CostMatrix({costs.c_tn, costs.c_fn, costs.c_fp, costs.c_tp}, 2, 2,
                    {"act_benign", "act_malignant"});
}

std::size_t decide(const ProbabilityVector& prob, const CostMatrix& costs) {
  if (prob.size() != costs.num_classes())
    throw Error(ErrorCode::ShapeMismatch,
                "probability vector has " + std::to_string(prob.size()) +
                    " classes, cost matrix expects " +
                    std::to_string(costs.num_classes()));
  std::size_t best = 0;
  double best_cost = 0.0;
  for (std::size_t a = 0; a < costs.num_actions(); ++a) {
    double expected = 0.0;
    for (std::size_t k = 0; k < costs.num_classes(); ++k)
      expected += costs.cost(a, k) * prob[k];
    if (a == 0 || expected < best_cost) {
      best_cost = expected;
      best = a;
    }
  }
  return best;
}

namespace {

ProbabilityVector tempered_posterior(const LogitDataset& dataset,
                                     std::size_t i, const Temperature& T) {
  if (dataset.binary_mode()) {
    const double p = sigmoid_scaled(dataset.scalar_logit(i), T);
    return ProbabilityVector({1.0 - p, p});
  }
  return softmax_scaled(dataset.row(i), T);
}

}  // namespace

double empirical_expected_cost(const LogitDataset& dataset,
                               const Temperature& T, const CostMatrix& costs) {
  if (static_cast<std::size_t>(dataset.num_classes()) != costs.num_classes())
    throw Error(ErrorCode::ShapeMismatch,
                "cost matrix classes do not match dataset classes");
  double total = 0.0;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto action = decide(tempered_posterior(dataset, i, T), costs);
    total += costs.cost(action, static_cast<std::size_t>(dataset.label(i)));
  }
  return total / static_cast<double>(dataset.size());
}

CostMatrix sample_constrained_costs(CostConstraint constraint, int num_classes,
                                    const ClassTaxonomy& taxonomy, Rng& rng) {
  if (taxonomy.num_classes() != num_classes)
    throw Error(ErrorCode::ShapeMismatch,
                "taxonomy does not match num_classes");
  const std::size_t K = static_cast<std::size_t>(num_classes);
  std::vector<double> costs(K * K, 0.0);
  const auto dominant = [&](bool action_benign, bool class_benign) {
    // The constrained direction: benign action taken on a malignant case
    // (a miss) or malignant action on a benign case, per the family.
    if (constraint == CostConstraint::MalignantMissDominant)
      return action_benign && !class_benign;
    return !action_benign && class_benign;
  };
  const auto draw_positive_unit = [&] {
    double u;
    do {
      u = rng.uniform();
    } while (u == 0.0);  // keep dominated costs strictly positive
    return u;
  };
  for (std::size_t a = 0; a < K; ++a) {
    for (std::size_t k = 0; k < K; ++k) {
      if (a == k) continue;  // correct action costs 0
      const bool ab = taxonomy.is_benign(static_cast<int>(a));
      const bool kb = taxonomy.is_benign(static_cast<int>(k));
      costs[a * K + k] =
          dominant(ab, kb) ? rng.uniform(1.0, 10.0) : draw_positive_unit();
    }
  }
  std::vector<std::string> names;
  names.reserve(K);
  for (const auto& cls : taxonomy.class_names()) names.push_back("act_" + cls);
  return CostMatrix(std::move(costs), K, K, std::move(names));
}

}  // namespace calib
