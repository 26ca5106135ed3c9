#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wexch/core.hpp"

namespace wexch {

struct unknown_rule_error : error {
    using error::error;
};
struct wrong_alphabet_error : error {
    using error::error;
};

// Strictly positive weight function on the alphabet, stored as log values.
class WeightFn {
  public:
    WeightFn(Alphabet alphabet, std::vector<double> values);
    static WeightFn from_log(Alphabet alphabet, std::vector<double> log_values);
    static WeightFn constant_one(Alphabet alphabet);

    const Alphabet& alphabet() const { return alphabet_; }
    int size() const { return alphabet_.size(); }
    double log_at(int x) const { return log_values_.at(x); }
    double at(int x) const { return std::exp(log_values_.at(x)); }
    const std::vector<double>& log_values() const { return log_values_; }
    std::vector<double> linear() const;

    WeightFn times(const WeightFn& other) const;

  private:
    WeightFn(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}
    Alphabet alphabet_;
    std::vector<double> log_values_;
};

// Eventual closed form of a weight family: for i >= start and i in residue
// class c mod period, log lambda_i(x) = intercept[c][x] + slope[c][x] * i.
// This is what the symbolic series classifier runs on.
struct AffineTail {
    int period = 1;
    std::int64_t start = 1;
    std::vector<std::vector<double>> intercept;  // [class][symbol]
    std::vector<std::vector<double>> slope;      // [class][symbol]
};

enum class TailVerdict { DivergesProven, ConvergesProven, Unknown };

std::string to_string(TailVerdict v);

// Symbolic verdict on an infinite series of per-index terms. Partial sums
// are evidence for human inspection only; they never decide the verdict.
struct TailClass {
    TailVerdict verdict = TailVerdict::Unknown;
    std::string evidence;                 // closed-form tag, e.g. "geometric-ratio 0.5"
    double partial_sum_1e2 = 0.0;
    double partial_sum_1e4 = 0.0;
    double partial_sum_1e6 = 0.0;
};

// Per-index scalar series of the shape used throughout the conditions:
//   a_i = min_{x in min_over} lambda_i(x)/ref(x)
//       / max_{x in max_over} lambda_i(x)/ref(x).
struct SeriesRule {
    std::string name;
    std::vector<int> min_over;
    std::vector<int> max_over;
    std::vector<double> log_ref;  // per symbol; zeros for ref == 1
};

// Weight sequences lambda_1, lambda_2, ... as parametric generators.
// Families are deterministic and total in the 1-based index i.
class WeightSeq {
  public:
    struct Constant {
        WeightFn w;
    };
    struct BinaryExample {};  // lambda_i(0) = 1, lambda_i(1) = 2^-i on K = 2
    struct CyclicPartition {
        // Block b (0-based) is penalized by rate^-i at indices i with
        // (i - 1) mod B == b, so i = 1 penalizes the block holding symbol 0.
        std::vector<std::vector<int>> blocks;
        double rate;  // > 1
    };
    struct GeometricTilt {
        WeightFn base;
        std::vector<double> rates;  // lambda_i(x) = base(x) * rates[x]^i
    };
    struct BoundedRatio {
        std::vector<WeightFn> table;  // lambda_i = table[(i-1) mod p]
    };
    enum class CustomTail { RepeatLast, Cycle, Unspecified };
    struct Custom {
        std::vector<WeightFn> table;
        CustomTail tail = CustomTail::Unspecified;
        // Unspecified extends numerically by repeating the last entry but
        // carries no certified tail form, so every verdict is Unknown.
    };

    using Family =
        std::variant<Constant, BinaryExample, CyclicPartition, GeometricTilt, BoundedRatio, Custom>;

    WeightSeq(Alphabet alphabet, Family family);

    static WeightSeq constant(WeightFn w);
    static WeightSeq binary_example();
    static WeightSeq cyclic_partition(Alphabet alphabet, std::vector<std::vector<int>> blocks,
                                      double rate);
    static WeightSeq geometric_tilt(WeightFn base, std::vector<double> rates);
    static WeightSeq bounded_ratio(std::vector<WeightFn> table);
    static WeightSeq custom(std::vector<WeightFn> table, CustomTail tail);

    const Alphabet& alphabet() const { return alphabet_; }
    int k() const { return alphabet_.size(); }
    const Family& family() const { return family_; }
    std::string family_name() const;

    // lambda_i, i >= 1.
    WeightFn term_at(std::int64_t i) const;
    void log_term_at(std::int64_t i, std::span<double> out) const;

    // Eventual affine closed form, absent for Custom without a tail rule.
    const std::optional<AffineTail>& affine_tail() const { return affine_; }
    bool recognized() const { return affine_.has_value(); }

  private:
    Alphabet alphabet_;
    Family family_;
    std::optional<AffineTail> affine_;
};

WeightFn weight_at(const WeightSeq& seq, std::int64_t i);

// Summand of the sufficient condition: min_x(lambda_i/ref) / max_x(lambda_i/ref),
// always in (0, 1].
double ratio_term(const WeightSeq& seq, std::int64_t i, const WeightFn& ref);
double log_ratio_term(const WeightSeq& seq, std::int64_t i, const WeightFn& ref);

// Registered series rules.
SeriesRule sufficient_rule(const WeightSeq& seq, const WeightFn& ref);
SeriesRule binary_rule(const WeightSeq& seq);
SeriesRule graph_edge_rule(const WeightSeq& seq, int x0, int x1, std::span<const int> subset);

// Numeric value of a rule's term at index i (log scale).
double rule_log_term(const WeightSeq& seq, const SeriesRule& rule, std::int64_t i);

// Symbolic classification of sum_i a_i for a registered rule.
TailClass tail_classify(const WeightSeq& seq, const SeriesRule& rule);

// Upper bound on the tail sum_{i > n} a_i, finite only when the series is
// provably convergent (exact terms up to the settled index, closed-form
// geometric remainder beyond).
double series_tail_bound(const WeightSeq& seq, const SeriesRule& rule, std::int64_t n);

}  // namespace wexch
