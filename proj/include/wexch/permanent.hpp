#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "wexch/core.hpp"
#include "wexch/random.hpp"
#include "wexch/weights.hpp"

namespace wexch {

// Square matrix of log entries, entry(k, j) = log lambda_k(x_j). All
// entries finite (weights are strictly positive).
class LogMatrix {
  public:
    static constexpr int kMaxExact = 20;       // cap for exact permanents
    static constexpr int kMaxCondTable = 14;   // cap for conditional-weight tables

    LogMatrix(int n, std::vector<double> log_entries);

    static LogMatrix from_weights(std::span<const WeightFn> lambdas, std::span<const int> xs);

    int n() const { return n_; }
    double at(int row, int col) const { return e_[static_cast<std::size_t>(row) * n_ + col]; }
    const std::vector<double>& entries() const { return e_; }

    // Minor with one row and one column removed.
    LogMatrix minor(int row, int col) const;

  private:
    int n_;
    std::vector<double> e_;
};

// log perm(M) by Ryser's inclusion-exclusion with Gray-code updates over
// column subsets. Deterministic for a given input: the subset range is cut
// into a fixed chunk grid, chunks may run on OpenMP threads, and partial
// accumulators merge in chunk order, so the result does not depend on the
// thread count.
double log_permanent(const LogMatrix& m);

// Single Gray-code walk, no chunking. Reference implementation for the
// parallel kernel.
double log_permanent_serial(const LogMatrix& m);

// Literal sum over all n! permutations; reference oracle, n <= 8.
double oracle_log_permanent(const LogMatrix& m);

// Exact permanent exploiting repeated columns (<= K distinct symbols).
// Dynamic program over rows with per-column-type usage counts; capped by
// the state-space size rather than n. Ryser is its correctness oracle.
double log_permanent_multiset(const LogMatrix& m);

// Monte Carlo permutation-sampling estimate of log perm(M). Approximate,
// for scales beyond the exact caps; never used by the exact paths.
double log_permanent_mc(const LogMatrix& m, int samples, RandomSource rng);

// Conditional weights w_{n,i}: the law of X_i given the unordered first n
// values is sum_j w_j * delta_{x_j}, with
//   w_j = lambda_i(x_j) * perm(M without row i, column j) / perm(M).
struct CondWeights {
    int n = 0;
    int i = 1;                // 1-based target index
    std::vector<double> w;    // nonnegative, sums to 1 within 1e-10
};

CondWeights conditional_weights(std::span<const WeightFn> lambdas, std::span<const int> xs,
                                int i);

// Same quantity by brute-force enumeration of all n! permutations, n <= 8.
CondWeights oracle_conditional_weights(std::span<const WeightFn> lambdas,
                                       std::span<const int> xs, int i);

// Aggregates conditional-weight mass onto alphabet symbols.
Dist weighted_empirical_perm(std::span<const WeightFn> lambdas, std::span<const int> xs, int i,
                             const Alphabet& alphabet);

}  // namespace wexch
