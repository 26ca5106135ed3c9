#include "wexch/recovery.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <set>

namespace wexch {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_acceptance(std::span<const double> lw, const WeightFn& lambda_star, int x) {
    double lo = std::numeric_limits<double>::infinity();
    for (int y = 0; y < static_cast<int>(lw.size()); ++y)
        lo = std::min(lo, lw[y] - lambda_star.log_at(y));
    return lo - (lw[x] - lambda_star.log_at(x));
}
}  // namespace

std::int64_t RejectionTrace::m(std::int64_t n) const {
    return static_cast<std::int64_t>(
        std::upper_bound(accepted.begin(), accepted.end(), n) - accepted.begin());
}

double acceptance_prob(const WeightSeq& lambda, std::int64_t i, int x,
                       const WeightFn& lambda_star) {
    if (!(lambda.alphabet() == lambda_star.alphabet()))
        throw alphabet_mismatch_error("acceptance_prob: alphabets differ");
    std::vector<double> lw(lambda.k());
    lambda.log_term_at(i, lw);
    return std::exp(log_acceptance(lw, lambda_star, x));
}

namespace {
void check_stream(std::span<const int> xs, const WeightSeq& lambda,
                  const WeightFn& lambda_star, const char* who) {
    if (!(lambda.alphabet() == lambda_star.alphabet()))
        throw alphabet_mismatch_error(std::string(who) + ": alphabets differ");
    for (int x : xs)
        if (x < 0 || x >= lambda.k())
            throw bad_index_error(std::string(who) + ": symbol out of range");
}
}  // namespace

std::pair<RejectionTrace, std::vector<int>> extract_subsequence(std::span<const int> xs,
                                                                const WeightSeq& lambda,
                                                                const WeightFn& lambda_star,
                                                                const RandomSource& rng) {
    if (xs.empty()) throw invalid_argument_error("extract_subsequence: empty stream");
    check_stream(xs, lambda, lambda_star, "extract_subsequence");
    RejectionTrace trace;
    trace.acceptance_probs.reserve(xs.size());
    std::vector<int> sub;
    std::vector<double> lw(lambda.k());
    for (std::int64_t i = 1; i <= static_cast<std::int64_t>(xs.size()); ++i) {
        lambda.log_term_at(i, lw);
        const double p = std::exp(log_acceptance(lw, lambda_star, xs[i - 1]));
        trace.acceptance_probs.push_back(p);
        RandomSource stream = rng.derive(static_cast<std::uint64_t>(i));
        if (stream.uniform() <= p) {
            trace.accepted.push_back(i);
            sub.push_back(xs[i - 1]);
        }
    }
    return {std::move(trace), std::move(sub)};
}

Dist tilde_empirical(std::span<const int> xs, const WeightSeq& lambda,
                     const WeightFn& lambda_star) {
    if (xs.empty()) throw empty_denominator_error("tilde_empirical: empty stream");
    check_stream(xs, lambda, lambda_star, "tilde_empirical");
    const int k = lambda.k();
    std::vector<LogAccumulator> num(k);
    std::vector<bool> any(k, false);
    std::vector<double> lw(k);
    for (std::int64_t i = 1; i <= static_cast<std::int64_t>(xs.size()); ++i) {
        lambda.log_term_at(i, lw);
        const int x = xs[i - 1];
        num[x].add_log(log_acceptance(lw, lambda_star, x));
        any[x] = true;
    }
    std::vector<LogReal> mass(k);
    for (int x = 0; x < k; ++x)
        if (any[x]) mass[x] = LogReal::from_log(num[x].log_value());
    return Dist::normalized(lambda.alphabet(), std::move(mass));
}

Dist bar_empirical(const RejectionTrace& trace, std::span<const int> xs,
                   const Alphabet& alphabet) {
    if (trace.accepted.empty()) throw no_acceptances_error("bar_empirical: no accepted indices");
    std::vector<double> counts(alphabet.size(), 0.0);
    for (std::int64_t i : trace.accepted) counts[xs[i - 1]] += 1.0;
    const double m = static_cast<double>(trace.accepted.size());
    for (double& c : counts) c /= m;
    return Dist(alphabet, std::move(counts));
}

EdgeEstimate pairwise_ratio(std::span<const int> xs, const WeightSeq& lambda, int x, int x1) {
    if (x == x1) throw same_symbol_error("pairwise_ratio: the two symbols must differ");
    if (x < 0 || x >= lambda.k() || x1 < 0 || x1 >= lambda.k())
        throw bad_index_error("pairwise_ratio: symbol out of range");
    EdgeEstimate e;
    e.x0 = x;
    e.x1 = x1;
    LogAccumulator num, den, wsum, w2sum;
    std::vector<double> lw(lambda.k());
    for (std::int64_t i = 1; i <= static_cast<std::int64_t>(xs.size()); ++i) {
        const int xi = xs[i - 1];
        if (xi != x && xi != x1) continue;
        lambda.log_term_at(i, lw);
        const double lg = std::min(lw[x], lw[x1]) - lw[xi];
        den.add_log(lg);
        if (xi == x) num.add_log(lg);
        wsum.add_log(lg);
        w2sum.add_log(2.0 * lg);
        ++e.support_count;
    }
    if (e.support_count == 0) return e;  // undefined
    e.defined = true;
    e.log_num = num.log_value();
    e.log_den = den.log_value();
    e.ratio = num.is_zero() ? 0.0 : std::exp(e.log_num - e.log_den);
    e.effective_sample_size = std::exp(2.0 * wsum.log_value() - w2sum.log_value());
    return e;
}

ReconstructedComponent tree_reconstruct(const Alphabet& alphabet, std::span<const int> support,
                                        std::span<const EdgeEstimate> edges,
                                        const WeightFn& lambda_star) {
    if (support.empty()) throw empty_subset_error("tree_reconstruct: empty support");
    if (!(alphabet == lambda_star.alphabet()))
        throw alphabet_mismatch_error("tree_reconstruct: alphabets differ");
    std::vector<int> sorted_support(support.begin(), support.end());
    std::sort(sorted_support.begin(), sorted_support.end());
    const std::set<int> sset(sorted_support.begin(), sorted_support.end());
    if (sset.size() != sorted_support.size())
        throw invalid_argument_error("tree_reconstruct: duplicate support symbols");

    if (edges.size() + 1 != sorted_support.size())
        throw not_a_tree_error("tree_reconstruct: need exactly |S| - 1 edges");
    std::set<int> children;
    for (const EdgeEstimate& e : edges) {
        if (!sset.count(e.x0) || !sset.count(e.x1))
            throw not_a_tree_error("tree_reconstruct: edge endpoint outside the support");
        if (!e.defined) throw undefined_edge_error("tree_reconstruct: undefined edge ratio");
        if (!(e.ratio > 0.0 && e.ratio < 1.0))
            throw degenerate_ratio_error("tree_reconstruct: ratio estimate at 0 or 1");
        if (!children.insert(e.x1).second)
            throw not_a_tree_error("tree_reconstruct: a vertex has two parents");
    }
    int root = -1;
    for (int x : sorted_support)
        if (!children.count(x)) {
            if (root != -1) throw not_a_tree_error("tree_reconstruct: more than one root");
            root = x;
        }
    if (root == -1) throw not_a_tree_error("tree_reconstruct: no root (cycle)");

    // Propagate P'(child) = P'(parent) * (1 - r) / r down from the root.
    std::vector<double> log_unnorm(alphabet.size(), kNegInf);
    log_unnorm[root] = 0.0;
    std::deque<int> frontier{root};
    std::size_t placed = 1;
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        for (const EdgeEstimate& e : edges) {
            if (e.x0 != u) continue;
            if (log_unnorm[e.x1] != kNegInf)
                throw not_a_tree_error("tree_reconstruct: revisited vertex");
            log_unnorm[e.x1] = log_unnorm[u] + std::log1p(-e.ratio) - std::log(e.ratio);
            frontier.push_back(e.x1);
            ++placed;
        }
    }
    if (placed != sorted_support.size())
        throw not_a_tree_error("tree_reconstruct: edges do not reach the whole support");

    std::vector<LogReal> mass(alphabet.size());
    for (int x : sorted_support) mass[x] = LogReal::from_log(log_unnorm[x]);
    Dist tilde_p = Dist::normalized(alphabet, std::move(mass));

    std::vector<LogReal> star(alphabet.size());
    for (int x : sorted_support)
        star[x] = LogReal::from_log(tilde_p.at(x).lg - lambda_star.log_at(x));
    Dist tilde_p_star = Dist::normalized(alphabet, std::move(star));

    return ReconstructedComponent{std::move(sorted_support),
                                  root,
                                  {edges.begin(), edges.end()},
                                  std::move(log_unnorm),
                                  std::move(tilde_p),
                                  std::move(tilde_p_star),
                                  false};
}

ReconstructedComponent recover_component(std::span<const int> xs, const WeightSeq& lambda,
                                         const WeightFn& lambda_star) {
    if (xs.empty()) throw invalid_argument_error("recover_component: empty stream");
    check_stream(xs, lambda, lambda_star, "recover_component");
    std::set<int> seen(xs.begin(), xs.end());
    std::vector<int> support(seen.begin(), seen.end());

    // Candidate edges: the proven-divergent G_S edges when the family is
    // recognized, otherwise the complete graph on S (flagged).
    const bool recognized = lambda.recognized();
    std::vector<std::vector<int>> adj(lambda.k());
    if (recognized && support.size() > 1) {
        const GraphGS g = build_graph_GS(lambda, support);
        for (const GraphGS::Pair* e : g.proven_edges()) {
            adj[e->x0].push_back(e->x1);
            adj[e->x1].push_back(e->x0);
        }
    } else {
        for (int a : support)
            for (int b : support)
                if (a != b) adj[a].push_back(b);
    }
    for (std::vector<int>& nb : adj) std::sort(nb.begin(), nb.end());

    // BFS spanning tree from the smallest support symbol, edges in
    // lexicographic order; deterministic by construction.
    const int root = support.front();
    std::vector<std::pair<int, int>> tree_edges;  // parent -> child
    std::set<int> visited{root};
    std::deque<int> frontier{root};
    while (!frontier.empty()) {
        const int u = frontier.front();
        frontier.pop_front();
        for (int v : adj[u]) {
            if (visited.count(v)) continue;
            visited.insert(v);
            tree_edges.emplace_back(u, v);
            frontier.push_back(v);
        }
    }
    if (visited.size() != support.size())
        throw graph_disconnected_error(
            "recover_component: G_S is disconnected; no spanning tree exists");

    std::vector<EdgeEstimate> edges;
    edges.reserve(tree_edges.size());
    for (const auto& [u, v] : tree_edges) {
        EdgeEstimate e = pairwise_ratio(xs, lambda, u, v);
        if (!e.defined)
            throw undefined_edge_error("recover_component: edge ratio has empty denominator");
        edges.push_back(std::move(e));
    }
    ReconstructedComponent rc = tree_reconstruct(lambda.alphabet(), support, edges, lambda_star);
    rc.used_complete_graph = !recognized;
    return rc;
}

Dist predicted_marginal(const ReconstructedComponent& rc, const WeightSeq& lambda,
                        std::int64_t i) {
    std::vector<double> lw(lambda.k());
    lambda.log_term_at(i, lw);
    return reweight_log(rc.tilde_p_star.as_measure(), lw);
}

}  // namespace wexch
