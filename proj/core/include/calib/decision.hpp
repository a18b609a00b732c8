#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "calib/rng.hpp"
#include "calib/scaling.hpp"
#include "calib/types.hpp"

namespace calib {

// 2-action, 2-class costs. `c_fp` is the cost of acting malignant on a
// benign case, `c_fn` of acting benign on a malignant case. Errors must
// cost more than the matching correct action.
struct BinaryCosts {
  double c_fp = 1.0;
  double c_fn = 1.0;
  double c_tp = 0.0;
  double c_tn = 0.0;
};

// Posterior threshold above which acting malignant minimises expected
// cost: t = (c_fp - c_tn) / ((c_fp - c_tn) + (c_fn - c_tp)). Class priors
// are already embedded in the posterior. Throws DegenerateCosts when the
// denominator is not positive.
double binary_threshold(const BinaryCosts& costs);

// The 2x2 cost matrix equivalent to BinaryCosts, actions ordered
// (act-benign, act-malignant), classes ordered (benign, malignant).
CostMatrix binary_cost_matrix(const BinaryCosts& costs);

// Expected-cost-minimising action: argmin_a sum_k costs[a][k] * prob[k],
// ties to the lowest action index.
std::size_t decide(const ProbabilityVector& prob, const CostMatrix& costs);

// Mean over examples of the realised cost of the decided action.
double empirical_expected_cost(const LogitDataset& dataset,
                               const Temperature& T, const CostMatrix& costs);

// Which family of cost functions the deployment is constrained to.
// MalignantMissDominant: deciding a benign action on a malignant case
// always costs more than any reverse confusion (the triage setting).
// BenignMisclassificationDominant is the mirror image.
enum class CostConstraint {
  MalignantMissDominant,
  BenignMisclassificationDominant,
};

// Draws a K-action, K-class cost matrix whose cross-group confusion
// costs satisfy the constraint by construction: dominant confusions are
// uniform on [1, 10), all other mistakes uniform on (0, 1), correct
// actions cost 0. Deterministic given the generator state.
CostMatrix sample_constrained_costs(CostConstraint constraint, int num_classes,
                                    const ClassTaxonomy& taxonomy, Rng& rng);

}  // namespace calib
