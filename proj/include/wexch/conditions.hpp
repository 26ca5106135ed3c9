#pragma once

#include <optional>
#include <string>
#include <vector>

#include "wexch/weights.hpp"

namespace wexch {

struct empty_subset_error : error {
    using error::error;
};
struct too_many_subsets_error : error {
    using error::error;
};

// Undirected graph on a symbol subset S; an edge is present exactly when
// the min/max weight series for the pair has a proven-divergent tail.
// Unknown pairs are tracked separately and taint connectivity verdicts.
struct GraphGS {
    struct Pair {
        int x0;
        int x1;
        TailClass evidence;
    };

    std::vector<int> subset;   // sorted symbols
    std::vector<Pair> pairs;   // every unordered pair in S with its evidence
    bool connected_proven = true;      // via DivergesProven edges only
    bool disconnected_proven = false;  // even counting Unknown pairs as edges
    bool has_unknown = false;

    std::vector<const Pair*> proven_edges() const;
};

GraphGS build_graph_GS(const WeightSeq& lambda, std::span<const int> subset);

enum class Membership { In, NotIn, Unknown };
std::string to_string(Membership m);

struct SufficientEntry {
    std::string candidate;  // display name
    TailClass tail;
};

// Tail class of the sufficient-condition series per lambda* candidate.
std::vector<SufficientEntry> sufficient_report(const WeightSeq& lambda,
                                               std::span<const WeightFn> candidates,
                                               std::span<const std::string> names);

// Default lambda* candidates: the constant-1 function and lambda_1.
std::vector<WeightFn> default_lambda_star_candidates(const WeightSeq& lambda);
std::vector<std::string> default_lambda_star_names();

// K = 2 criterion: sum_i min{l_i(0), l_i(1)} / max{l_i(0), l_i(1)}.
TailClass binary_criterion(const WeightSeq& lambda);

struct NecessaryReport {
    enum class Verdict { Holds, Fails, Unknown };
    struct Subset {
        GraphGS graph;
        Verdict verdict;
    };
    std::vector<Subset> subsets;  // by cardinality, then lexicographic
    Verdict verdict = Verdict::Unknown;
    std::optional<std::vector<int>> witness_subset;  // minimal disconnected S
};

std::string to_string(NecessaryReport::Verdict v);

// Graph-connectivity form of the necessary condition: it holds iff G_S is
// connected for every nonempty S. K <= 12 (2^K - 1 subsets).
NecessaryReport necessary_report(const WeightSeq& lambda);

// Full classifier output. The conclusion never asserts sufficient-holds
// together with necessary-fails; that would contradict the condition chain.
struct ConditionReport {
    std::string family;
    std::vector<SufficientEntry> sufficient;
    std::optional<TailClass> binary;  // K = 2 only
    NecessaryReport necessary;
    Membership in_de_finetti = Membership::Unknown;
    Membership in_zero_one = Membership::Unknown;
    Membership in_lln = Membership::Unknown;
    std::string basis;  // which result decided the conclusion
    bool definitive() const {
        return in_de_finetti != Membership::Unknown && in_zero_one != Membership::Unknown &&
               in_lln != Membership::Unknown;
    }
};

ConditionReport classify_conditions(const WeightSeq& lambda,
                                    std::span<const WeightFn> extra_candidates = {},
                                    std::span<const std::string> extra_names = {});

}  // namespace wexch
