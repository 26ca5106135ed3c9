#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wexch/core.hpp"
#include "wexch/weights.hpp"

namespace wexch {

// Finite-support mixing distribution over base measures.
class MixtureSpec {
  public:
    struct Component {
        Measure base;
        double prob;
    };

    explicit MixtureSpec(std::vector<Component> components);

    const std::vector<Component>& components() const { return components_; }
    const Alphabet& alphabet() const { return components_.front().base.alphabet(); }
    int size() const { return static_cast<int>(components_.size()); }

  private:
    std::vector<Component> components_;
};

struct SampleRun {
    std::vector<int> symbols;
    std::optional<int> drawn_component;
    std::uint64_t seed = 0;
};

// Draws X_i ~ reweight(P, lambda_i) independently. Seed-path convention:
// the coordinate-i draw consumes one uniform from stream id i; stream id 0
// is reserved for the component draw of a mixture.
SampleRun sample_weighted_iid(const Measure& p, const WeightSeq& lambda, int n,
                              std::uint64_t seed);

SampleRun sample_mixture(const MixtureSpec& mu, const WeightSeq& lambda, int n,
                         std::uint64_t seed);

// Exact joint table of the product (P o lambda_1) x ... x (P o lambda_n).
JointDist exact_joint_weighted_iid(const Measure& p, const WeightSeq& lambda, int n);

// Probability-weighted combination of per-component exact joints.
JointDist exact_joint_mixture(const MixtureSpec& mu, const WeightSeq& lambda, int n);

// The binary counterexample law: mass 2^-i on the sequence with a single 1
// at position i, nothing else. The n-prefix puts 2^-i on e_i for i <= n and
// the remaining 2^-n on the all-zeros prefix.
JointDist example1_joint(int n);

// Exact sampler for the same law; the latent position is drawn by bit-scan
// on one uniform 64-bit word (stream id 0), so the geometric tail is exact.
SampleRun example1_sample(int n, std::uint64_t seed);

}  // namespace wexch
