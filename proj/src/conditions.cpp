#include "wexch/conditions.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace wexch {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int a) {
        while (parent[a] != a) a = parent[a] = parent[parent[a]];
        return a;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
    bool all_connected() {
        const int root = find(0);
        for (int a = 1; a < static_cast<int>(parent.size()); ++a)
            if (find(a) != root) return false;
        return true;
    }
};

}  // namespace

std::vector<const GraphGS::Pair*> GraphGS::proven_edges() const {
    std::vector<const Pair*> out;
    for (const Pair& p : pairs)
        if (p.evidence.verdict == TailVerdict::DivergesProven) out.push_back(&p);
    return out;
}

GraphGS build_graph_GS(const WeightSeq& lambda, std::span<const int> subset) {
    if (subset.empty()) throw empty_subset_error("build_graph_GS: empty subset");
    GraphGS g;
    g.subset.assign(subset.begin(), subset.end());
    std::sort(g.subset.begin(), g.subset.end());
    for (int x : g.subset)
        if (x < 0 || x >= lambda.k()) throw bad_index_error("build_graph_GS: symbol out of range");
    const int s = static_cast<int>(g.subset.size());
    UnionFind proven(s), generous(s);
    for (int a = 0; a < s; ++a) {
        for (int b = a + 1; b < s; ++b) {
            GraphGS::Pair pair;
            pair.x0 = g.subset[a];
            pair.x1 = g.subset[b];
            pair.evidence =
                tail_classify(lambda, graph_edge_rule(lambda, pair.x0, pair.x1, g.subset));
            if (pair.evidence.verdict == TailVerdict::DivergesProven) {
                proven.unite(a, b);
                generous.unite(a, b);
            } else if (pair.evidence.verdict == TailVerdict::Unknown) {
                generous.unite(a, b);
                g.has_unknown = true;
            }
            g.pairs.push_back(std::move(pair));
        }
    }
    g.connected_proven = proven.all_connected();
    g.disconnected_proven = !generous.all_connected();
    return g;
}

std::string to_string(Membership m) {
    switch (m) {
        case Membership::In:
            return "in";
        case Membership::NotIn:
            return "not_in";
        case Membership::Unknown:
            return "unknown";
    }
    return "unknown";
}

std::string to_string(NecessaryReport::Verdict v) {
    switch (v) {
        case NecessaryReport::Verdict::Holds:
            return "holds";
        case NecessaryReport::Verdict::Fails:
            return "fails";
        case NecessaryReport::Verdict::Unknown:
            return "unknown";
    }
    return "unknown";
}

std::vector<SufficientEntry> sufficient_report(const WeightSeq& lambda,
                                               std::span<const WeightFn> candidates,
                                               std::span<const std::string> names) {
    if (candidates.size() != names.size())
        throw invalid_argument_error("sufficient_report: one name per candidate");
    std::vector<SufficientEntry> out;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        SufficientEntry e;
        e.candidate = names[c];
        e.tail = tail_classify(lambda, sufficient_rule(lambda, candidates[c]));
        out.push_back(std::move(e));
    }
    return out;
}

std::vector<WeightFn> default_lambda_star_candidates(const WeightSeq& lambda) {
    return {WeightFn::constant_one(lambda.alphabet()), lambda.term_at(1)};
}

std::vector<std::string> default_lambda_star_names() { return {"one", "lambda_1"}; }

TailClass binary_criterion(const WeightSeq& lambda) {
    if (lambda.k() != 2) throw wrong_alphabet_error("binary_criterion: requires K = 2");
    return tail_classify(lambda, binary_rule(lambda));
}

NecessaryReport necessary_report(const WeightSeq& lambda) {
    const int k = lambda.k();
    if (k > 12) throw too_many_subsets_error("necessary_report: K > 12 means too many subsets");
    NecessaryReport rep;

    std::vector<unsigned> masks;
    for (unsigned mask = 1; mask < (1u << k); ++mask) masks.push_back(mask);
    std::sort(masks.begin(), masks.end(), [](unsigned a, unsigned b) {
        const int pa = std::popcount(a), pb = std::popcount(b);
        if (pa != pb) return pa < pb;
        return a < b;  // ascending mask order is lexicographic on sorted subsets
    });

    bool any_unknown = false;
    bool any_disconnected = false;
    for (unsigned mask : masks) {
        std::vector<int> subset;
        for (int x = 0; x < k; ++x)
            if (mask & (1u << x)) subset.push_back(x);
        NecessaryReport::Subset entry{build_graph_GS(lambda, subset),
                                      NecessaryReport::Verdict::Holds};
        if (entry.graph.disconnected_proven) {
            entry.verdict = NecessaryReport::Verdict::Fails;
            if (!any_disconnected) rep.witness_subset = subset;
            any_disconnected = true;
        } else if (!entry.graph.connected_proven) {
            entry.verdict = NecessaryReport::Verdict::Unknown;
            any_unknown = true;
        } else if (entry.graph.has_unknown) {
            any_unknown = true;  // connected regardless, but taint the overall verdict
        }
        rep.subsets.push_back(std::move(entry));
    }
    if (any_disconnected)
        rep.verdict = NecessaryReport::Verdict::Fails;
    else if (any_unknown)
        rep.verdict = NecessaryReport::Verdict::Unknown;
    else
        rep.verdict = NecessaryReport::Verdict::Holds;
    return rep;
}

ConditionReport classify_conditions(const WeightSeq& lambda,
                                    std::span<const WeightFn> extra_candidates,
                                    std::span<const std::string> extra_names) {
    if (extra_candidates.size() != extra_names.size())
        throw invalid_argument_error("classify_conditions: one name per extra candidate");
    ConditionReport rep;
    rep.family = lambda.family_name();

    std::vector<WeightFn> candidates = default_lambda_star_candidates(lambda);
    std::vector<std::string> names = default_lambda_star_names();
    for (std::size_t c = 0; c < extra_candidates.size(); ++c) {
        candidates.push_back(extra_candidates[c]);
        names.push_back(extra_names[c]);
    }
    rep.sufficient = sufficient_report(lambda, candidates, names);
    if (lambda.k() == 2) rep.binary = binary_criterion(lambda);
    rep.necessary = necessary_report(lambda);

    const bool sufficient_holds =
        std::any_of(rep.sufficient.begin(), rep.sufficient.end(), [](const SufficientEntry& e) {
            return e.tail.verdict == TailVerdict::DivergesProven;
        });

    auto set_all = [&rep](Membership m, std::string basis) {
        rep.in_de_finetti = m;
        rep.in_zero_one = m;
        rep.in_lln = m;
        rep.basis = std::move(basis);
    };

    // On a finite alphabet the graph form of the necessary condition decides
    // all three sets; the sufficient condition and the binary criterion can
    // still certify membership when the graph verdict is unknown.
    switch (rep.necessary.verdict) {
        case NecessaryReport::Verdict::Holds:
            set_all(Membership::In, "necessary-condition graphs all connected (finite case)");
            break;
        case NecessaryReport::Verdict::Fails:
            set_all(Membership::NotIn, "disconnected subset graph (necessary condition fails)");
            break;
        case NecessaryReport::Verdict::Unknown:
            if (sufficient_holds) {
                set_all(Membership::In, "sufficient condition diverges for a candidate");
            } else if (rep.binary && rep.binary->verdict == TailVerdict::DivergesProven) {
                set_all(Membership::In, "binary criterion diverges");
            } else if (rep.binary && rep.binary->verdict == TailVerdict::ConvergesProven) {
                set_all(Membership::NotIn, "binary criterion converges");
            } else {
                set_all(Membership::Unknown, "no decisive tail verdict");
            }
            break;
    }

    if (sufficient_holds && rep.necessary.verdict == NecessaryReport::Verdict::Fails)
        throw error("classify_conditions: sufficient holds but necessary fails");
    return rep;
}

}  // namespace wexch
