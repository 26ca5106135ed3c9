#include <doctest.h>

#include <cmath>

#include "wexch/conditions.hpp"

using namespace wexch;

namespace {

std::vector<WeightSeq> builtin_families() {
    const Alphabet a2(2), a3(3);
    std::vector<WeightSeq> out;
    out.push_back(WeightSeq::constant(WeightFn(a2, {1.0, 4.0})));
    out.push_back(WeightSeq::constant(WeightFn(a3, {1.0, 2.0, 3.0})));
    out.push_back(WeightSeq::binary_example());
    out.push_back(WeightSeq::cyclic_partition(a3, {{0}, {1}, {2}}, std::exp(1.0)));
    out.push_back(WeightSeq::geometric_tilt(WeightFn::constant_one(a2), {1.0, 0.5}));
    out.push_back(WeightSeq::geometric_tilt(WeightFn(a3, {1.0, 2.0, 1.0}), {1.0, 1.0, 1.0}));
    out.push_back(WeightSeq::bounded_ratio({WeightFn(a2, {1.0, 0.5}), WeightFn(a2, {1.0, 2.0})}));
    return out;
}

}  // namespace

TEST_SUITE("conditions") {
    TEST_CASE("binary example belongs to none of the sets") {
        const WeightSeq bin = WeightSeq::binary_example();
        CHECK(binary_criterion(bin).verdict == TailVerdict::ConvergesProven);
        const NecessaryReport nec = necessary_report(bin);
        CHECK(nec.verdict == NecessaryReport::Verdict::Fails);
        REQUIRE(nec.witness_subset.has_value());
        CHECK(*nec.witness_subset == std::vector<int>{0, 1});
        const ConditionReport rep = classify_conditions(bin);
        CHECK(rep.in_de_finetti == Membership::NotIn);
        CHECK(rep.in_zero_one == Membership::NotIn);
        CHECK(rep.in_lln == Membership::NotIn);
    }

    TEST_CASE("the cyclic partition exhibits the sufficient/necessary gap") {
        const Alphabet a(3);
        const WeightSeq cyc = WeightSeq::cyclic_partition(a, {{0}, {1}, {2}}, std::exp(1.0));
        const ConditionReport rep = classify_conditions(cyc);
        // Necessary condition holds: all 7 subset graphs connected.
        CHECK(rep.necessary.verdict == NecessaryReport::Verdict::Holds);
        CHECK(rep.necessary.subsets.size() == 7);
        for (const NecessaryReport::Subset& s : rep.necessary.subsets)
            CHECK(s.verdict == NecessaryReport::Verdict::Holds);
        // ... while the sufficient condition fails for the default candidates.
        for (const SufficientEntry& e : rep.sufficient)
            CHECK(e.tail.verdict == TailVerdict::ConvergesProven);
        CHECK(rep.in_de_finetti == Membership::In);
        CHECK(rep.in_zero_one == Membership::In);
        CHECK(rep.in_lln == Membership::In);
    }

    TEST_CASE("constant weights are in every set") {
        const ConditionReport rep =
            classify_conditions(WeightSeq::constant(WeightFn(Alphabet(3), {1.0, 2.0, 3.0})));
        CHECK(rep.necessary.verdict == NecessaryReport::Verdict::Holds);
        for (const SufficientEntry& e : rep.sufficient)
            CHECK(e.tail.verdict == TailVerdict::DivergesProven);
        CHECK(rep.in_de_finetti == Membership::In);
    }

    TEST_CASE("alternating ratios keep the binary criterion divergent") {
        const Alphabet a(2);
        const WeightSeq alt =
            WeightSeq::bounded_ratio({WeightFn(a, {1.0, 0.5}), WeightFn(a, {1.0, 2.0})});
        CHECK(binary_criterion(alt).verdict == TailVerdict::DivergesProven);
        CHECK(classify_conditions(alt).in_lln == Membership::In);
    }

    TEST_CASE("graph edges for the named families") {
        const Alphabet a3(3);
        const WeightSeq cyc = WeightSeq::cyclic_partition(a3, {{0}, {1}, {2}}, std::exp(1.0));
        const std::vector<int> full = {0, 1, 2};
        const GraphGS g = build_graph_GS(cyc, full);
        CHECK(g.connected_proven);
        for (const GraphGS::Pair& p : g.pairs)
            CHECK(p.evidence.verdict == TailVerdict::DivergesProven);

        const WeightSeq bin = WeightSeq::binary_example();
        const std::vector<int> both = {0, 1};
        const GraphGS gb = build_graph_GS(bin, both);
        CHECK_FALSE(gb.connected_proven);
        CHECK(gb.disconnected_proven);
        CHECK(gb.pairs.front().evidence.verdict == TailVerdict::ConvergesProven);

        const WeightSeq con = WeightSeq::constant(WeightFn(a3, {1.0, 5.0, 2.0}));
        const GraphGS gc = build_graph_GS(con, full);
        CHECK(gc.connected_proven);
        for (const GraphGS::Pair& p : gc.pairs)  // complete graph
            CHECK(p.evidence.verdict == TailVerdict::DivergesProven);
        CHECK_THROWS_AS(build_graph_GS(con, std::vector<int>{}), empty_subset_error);
    }

    TEST_CASE("binary criterion coincides with the graph verdict when K = 2") {
        for (const WeightSeq& seq : builtin_families()) {
            if (seq.k() != 2) continue;
            const TailVerdict b = binary_criterion(seq).verdict;
            const NecessaryReport::Verdict n = necessary_report(seq).verdict;
            if (b == TailVerdict::DivergesProven) CHECK(n == NecessaryReport::Verdict::Holds);
            if (b == TailVerdict::ConvergesProven) CHECK(n == NecessaryReport::Verdict::Fails);
        }
    }

    TEST_CASE("chain consistency on every built-in family") {
        for (const WeightSeq& seq : builtin_families()) {
            const ConditionReport rep = classify_conditions(seq);  // throws on inconsistency
            const bool suff = std::any_of(
                rep.sufficient.begin(), rep.sufficient.end(),
                [](const SufficientEntry& e) { return e.tail.verdict == TailVerdict::DivergesProven; });
            if (suff) CHECK(rep.necessary.verdict == NecessaryReport::Verdict::Holds);
            if (rep.necessary.verdict == NecessaryReport::Verdict::Fails) CHECK_FALSE(suff);
        }
    }

    TEST_CASE("singleton subsets are trivially connected and never the witness") {
        for (const WeightSeq& seq : builtin_families()) {
            const NecessaryReport rep = necessary_report(seq);
            for (const NecessaryReport::Subset& s : rep.subsets)
                if (s.graph.subset.size() == 1) CHECK(s.verdict == NecessaryReport::Verdict::Holds);
            if (rep.witness_subset) CHECK(rep.witness_subset->size() >= 2);
        }
    }

    TEST_CASE("enlarging the subset can only shrink edge summands") {
        const Alphabet a3(3);
        for (const WeightSeq& seq :
             {WeightSeq::cyclic_partition(a3, {{0}, {1}, {2}}, 2.0),
              WeightSeq::geometric_tilt(WeightFn(a3, {1.0, 2.0, 0.5}), {0.9, 1.0, 1.2})}) {
            const std::vector<int> small = {0, 1};
            const std::vector<int> big = {0, 1, 2};
            const SeriesRule rs = graph_edge_rule(seq, 0, 1, small);
            const SeriesRule rb = graph_edge_rule(seq, 0, 1, big);
            for (std::int64_t i : {1, 2, 3, 10, 101, 1002})
                CHECK(rule_log_term(seq, rb, i) <= rule_log_term(seq, rs, i) + 1e-12);
        }
    }

    TEST_CASE("custom families without a tail rule stay unknown") {
        const Alphabet a(2);
        const WeightSeq cust = WeightSeq::custom({WeightFn(a, {1.0, 2.0})},
                                                 WeightSeq::CustomTail::Unspecified);
        const ConditionReport rep = classify_conditions(cust);
        CHECK(rep.necessary.verdict == NecessaryReport::Verdict::Unknown);
        CHECK(rep.in_de_finetti == Membership::Unknown);
        CHECK(rep.in_zero_one == Membership::Unknown);
        CHECK(rep.in_lln == Membership::Unknown);
        CHECK_FALSE(rep.definitive());

        // With a declared tail rule the same table becomes decidable.
        const WeightSeq fixed = WeightSeq::custom({WeightFn(a, {1.0, 2.0})},
                                                  WeightSeq::CustomTail::RepeatLast);
        CHECK(classify_conditions(fixed).in_lln == Membership::In);
    }

    TEST_CASE("error paths") {
        CHECK_THROWS_AS(binary_criterion(WeightSeq::constant(WeightFn(Alphabet(3), {1, 1, 1}))),
                        wrong_alphabet_error);
        CHECK_THROWS_AS(necessary_report(WeightSeq::constant(
                            WeightFn(Alphabet(13), std::vector<double>(13, 1.0)))),
                        too_many_subsets_error);
    }

    TEST_CASE("subset report ordering is by cardinality then lexicographic") {
        const NecessaryReport rep =
            necessary_report(WeightSeq::constant(WeightFn(Alphabet(3), {1, 1, 1})));
        REQUIRE(rep.subsets.size() == 7);
        CHECK(rep.subsets[0].graph.subset == std::vector<int>{0});
        CHECK(rep.subsets[1].graph.subset == std::vector<int>{1});
        CHECK(rep.subsets[2].graph.subset == std::vector<int>{2});
        CHECK(rep.subsets[3].graph.subset == std::vector<int>{0, 1});
        CHECK(rep.subsets[4].graph.subset == std::vector<int>{0, 2});
        CHECK(rep.subsets[5].graph.subset == std::vector<int>{1, 2});
        CHECK(rep.subsets[6].graph.subset == std::vector<int>{0, 1, 2});
    }
}
