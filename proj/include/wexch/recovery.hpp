#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wexch/conditions.hpp"
#include "wexch/core.hpp"
#include "wexch/weights.hpp"

namespace wexch {

struct empty_denominator_error : error {
    using error::error;
};
struct no_acceptances_error : error {
    using error::error;
};
struct same_symbol_error : error {
    using error::error;
};
struct not_a_tree_error : error {
    using error::error;
};
struct degenerate_ratio_error : error {
    using error::error;
};
struct undefined_edge_error : error {
    using error::error;
};
struct graph_disconnected_error : error {
    using error::error;
};

// Bookkeeping of one rejection-thinning pass: which indices were accepted
// and with what acceptance probabilities.
struct RejectionTrace {
    std::vector<double> acceptance_probs;   // p_i(x_i) for i = 1..n
    std::vector<std::int64_t> accepted;     // strictly increasing 1-based indices
    int padding_symbol = 0;                 // used only in the probability-zero M finite branch
    std::int64_t m(std::int64_t n) const;   // M_n = accepted count among the first n
};

// p_i(x) = (min_x' lambda_i(x')/lambda*(x')) / (lambda_i(x)/lambda*(x)),
// in (0, 1], equal to 1 at every argmin symbol.
double acceptance_prob(const WeightSeq& lambda, std::int64_t i, int x, const WeightFn& lambda_star);

// Thin the stream with fresh uniforms: B_i = 1{U_i <= p_i(x_i)}. The i-th
// uniform comes from rng.derive(i), so callers pass a source independent of
// whatever generated the stream itself.
std::pair<RejectionTrace, std::vector<int>> extract_subsequence(std::span<const int> xs,
                                                                const WeightSeq& lambda,
                                                                const WeightFn& lambda_star,
                                                                const RandomSource& rng);

// Weighted empirical distribution with weights p_i(x_i), streaming in log
// space per symbol.
Dist tilde_empirical(std::span<const int> xs, const WeightSeq& lambda,
                     const WeightFn& lambda_star);

// Unweighted empirical distribution of the accepted subsequence.
Dist bar_empirical(const RejectionTrace& trace, std::span<const int> xs,
                   const Alphabet& alphabet);

// Streaming estimator of the pairwise conditional ratio:
//   num = sum_i min{l_i(x), l_i(x')}/l_i(x_i) over x_i = x,
//   den = same restricted to x_i in {x, x'}.
struct EdgeEstimate {
    int x0 = 0;  // the (x; x') pair, ordered
    int x1 = 0;
    bool defined = false;
    double ratio = 0.0;        // num / den when defined
    double log_num = 0.0;
    double log_den = 0.0;
    double effective_sample_size = 0.0;  // Kish ESS of the contributing weights
    std::int64_t support_count = 0;      // draws landing in {x, x'}
};

EdgeEstimate pairwise_ratio(std::span<const int> xs, const WeightSeq& lambda, int x, int x1);

// Latent component rebuilt from ratio estimates along a rooted spanning
// tree: unnormalized values follow the product of (1 - r)/r along the
// root-to-x path, tilde_p normalizes them on S, and tilde_p_star divides by
// lambda* and renormalizes.
struct ReconstructedComponent {
    std::vector<int> support;          // sorted S
    int root = 0;
    std::vector<EdgeEstimate> tree;    // directed parent -> child edges
    std::vector<double> log_unnormalized;  // per symbol; -inf off support, 0 at root
    Dist tilde_p;
    Dist tilde_p_star;
    bool used_complete_graph = false;  // set when the weight family was not recognized
};

ReconstructedComponent tree_reconstruct(const Alphabet& alphabet, std::span<const int> support,
                                        std::span<const EdgeEstimate> edges,
                                        const WeightFn& lambda_star);

// Full pipeline: support detection, spanning tree over G_S, one pairwise
// ratio per tree edge, then tree_reconstruct.
ReconstructedComponent recover_component(std::span<const int> xs, const WeightSeq& lambda,
                                         const WeightFn& lambda_star);

// Coordinate-i marginal implied by the reconstruction, for held-out checks.
Dist predicted_marginal(const ReconstructedComponent& rc, const WeightSeq& lambda,
                        std::int64_t i);

}  // namespace wexch
