#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wexch/core.hpp"
#include "wexch/permanent.hpp"
#include "wexch/weights.hpp"

namespace wexch {

// Outcome of one enumeration check. pass holds exactly when
// max_violation <= the tolerance the check ran with.
struct CheckReport {
    bool pass = true;
    double max_violation = 0.0;
    double tolerance = 0.0;
    std::optional<std::vector<int>> witness_tuple;
    std::optional<std::pair<int, int>> witness_swap;  // 1-based coordinate pair
    std::string detail;
};

// Invariance of Q under all adjacent transpositions (they generate S_n);
// violations are absolute mass discrepancies.
CheckReport is_exchangeable(const JointDist& q, double tol);

// Symmetry of bar Q(x) = Q(x) / prod_i lambda_i(x_i) under adjacent
// transpositions; violations are log-space ratios (a zero mass paired with
// a nonzero one is an infinite violation).
CheckReport is_weighted_exchangeable(const JointDist& q, const WeightSeq& lambda, double tol);

// The weighted-swap identity for the coordinate pair (i, j):
//   E[f(X) / (lambda_i(X_i) lambda_j(X_j))] =
//   E[f(X^{ij}) / (lambda_i(X_i) lambda_j(X_j))]
// checked for every singleton indicator f, which spans everything by
// linearity on a finite space.
CheckReport weighted_swap_check(const JointDist& q, const WeightSeq& lambda, int i, int j,
                                double tol);

// weighted_swap_check over every pair i < j; pass iff all pairs pass.
CheckReport weighted_swap_check_all_pairs(const JointDist& q, const WeightSeq& lambda,
                                          double tol);

// For every atom of E_m (unordered first-m values plus the exact tail),
// the exact conditional law of X_i under Q must equal the permanent-based
// weighted empirical distribution of a representative ordering.
// Zero-probability atoms are skipped. Also asserts that the representative
// ordering does not matter.
CheckReport conditional_law_check(const JointDist& q, const WeightSeq& lambda, int i, int m,
                                  double tol);

struct FactorResult {
    std::optional<Measure> base;  // normalized candidate when Q factors
    double max_violation = 0.0;
    std::string detail;
};

// If Q is a product with marginals q_t = reweight(P, lambda_t) for the
// common candidate P ~ q_1 / lambda_1, returns that P; otherwise absent
// with the largest violation seen.
FactorResult factor_as_weighted_iid(const JointDist& q, const WeightSeq& lambda, double tol);

}  // namespace wexch
