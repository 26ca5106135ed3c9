#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wexch/log_real.hpp"
#include "wexch/random.hpp"

namespace wexch {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct zero_mass_error : error {
    using error::error;
};
struct non_positive_weight_error : error {
    using error::error;
};
struct bad_index_error : error {
    using error::error;
};
struct alphabet_mismatch_error : error {
    using error::error;
};
struct too_large_error : error {
    using error::error;
};
struct invalid_argument_error : error {
    using error::error;
};

// Finite symbol set. Symbols are 0..K-1; labels are display strings only.
class Alphabet {
  public:
    explicit Alphabet(int k);
    Alphabet(int k, std::vector<std::string> labels);

    int size() const { return k_; }
    const std::string& label(int x) const { return labels_.at(x); }
    const std::vector<std::string>& labels() const { return labels_; }

    friend bool operator==(const Alphabet& a, const Alphabet& b) {
        return a.k_ == b.k_;
    }

  private:
    int k_;
    std::vector<std::string> labels_;
};

// Nonnegative mass per symbol. Total mass must be finite; a base measure
// additionally needs positive total mass (checked at the point of use).
class Measure {
  public:
    Measure(Alphabet alphabet, std::vector<double> mass);
    static Measure from_log(Alphabet alphabet, std::vector<LogReal> mass);

    const Alphabet& alphabet() const { return alphabet_; }
    int size() const { return alphabet_.size(); }
    const LogReal& at(int x) const { return mass_.at(x); }
    LogReal total() const;
    std::vector<double> linear() const;

  private:
    Measure(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}
    Alphabet alphabet_;
    std::vector<LogReal> mass_;
};

// Probability vector over the alphabet. Construction rejects inputs whose
// mass differs from 1 by more than 1e-12; use normalized() to renormalize
// explicitly.
class Dist {
  public:
    Dist(Alphabet alphabet, std::vector<double> probs);
    static Dist from_log(Alphabet alphabet, std::vector<LogReal> probs);
    static Dist normalized(Alphabet alphabet, std::vector<LogReal> mass);
    static Dist point_mass(Alphabet alphabet, int x);

    const Alphabet& alphabet() const { return alphabet_; }
    int size() const { return alphabet_.size(); }
    const LogReal& at(int x) const { return probs_.at(x); }
    double prob(int x) const { return probs_.at(x).linear(); }
    std::vector<double> linear() const;
    Measure as_measure() const;

    static constexpr double kNormTol = 1e-12;

  private:
    Dist(Alphabet alphabet) : alphabet_(std::move(alphabet)) {}
    Alphabet alphabet_;
    std::vector<LogReal> probs_;
};

// Exact joint distribution on K^n tuples, dense, x_1 is the most
// significant digit of the flat index. Capped at 2^24 table entries so
// enumeration oracles stay exact.
class JointDist {
  public:
    static constexpr std::uint64_t kMaxTable = std::uint64_t{1} << 24;
    static constexpr double kNormTol = 1e-10;

    JointDist(Alphabet alphabet, int n, std::vector<LogReal> table,
              bool validate = true);

    const Alphabet& alphabet() const { return alphabet_; }
    int n() const { return n_; }
    int k() const { return alphabet_.size(); }
    std::uint64_t table_size() const { return table_.size(); }
    const LogReal& at(std::uint64_t idx) const { return table_[idx]; }
    const LogReal& at_tuple(std::span<const int> tuple) const {
        return table_[index_of(tuple)];
    }

    std::uint64_t index_of(std::span<const int> tuple) const;
    std::vector<int> tuple_of(std::uint64_t idx) const;
    void decode(std::uint64_t idx, std::span<int> out) const;

    LogReal total() const;

    static std::uint64_t table_entries_or_throw(int k, int n);

  private:
    Alphabet alphabet_;
    int n_;
    std::vector<LogReal> table_;
};

// Finitely checkable symmetric events on a prefix: counts of one symbol.
// Tail convention: the event is evaluated on the given prefix only; it
// stands in for the corresponding exchangeable event on the infinite
// sequence, whose truncation error callers bound separately.
struct EventSpec {
    enum class Kind { CountOfSymbolEquals, CountOfSymbolAtLeast };
    Kind kind;
    int symbol;
    std::int64_t count;

    bool evaluate(std::span<const int> prefix) const;
};

// Distribution proportional to w(x) * P(x). Errors: zero_mass_error if the
// normalizer vanishes, non_positive_weight_error on w <= 0.
Dist reweight(const Measure& p, std::span<const double> w_linear);
Dist reweight_log(const Measure& p, std::span<const double> w_log);

// Sums out coordinates m+1..n of an exact joint.
JointDist marginalize(const JointDist& q, int m);

// Distribution of coordinate i (1-based) under the joint.
Dist marginal_of_coordinate(const JointDist& q, int i);

// (1/2) sum_x |P(x) - R(x)|.
double total_variation(const Dist& p, const Dist& r);

}  // namespace wexch
