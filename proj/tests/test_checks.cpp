#include <doctest.h>

#include <cmath>

#include "wexch/checks.hpp"
#include "wexch/sampler.hpp"

using namespace wexch;

namespace {

JointDist equal_mass_pair() {
    const Alphabet a(2);
    std::vector<LogReal> table(4);
    table[1] = LogReal::from_linear(0.5);
    table[2] = LogReal::from_linear(0.5);
    return JointDist(a, 2, std::move(table));
}

JointDist point_mass_01() {
    const Alphabet a(2);
    std::vector<LogReal> table(4);
    table[1] = LogReal::one();
    return JointDist(a, 2, std::move(table));
}

// Convex combination of two weighted products under the same lambda: a
// weighted exchangeable joint that is not itself a product.
JointDist random_weighted_mixture(const WeightSeq& lambda, int n, RandomSource& rng) {
    const Alphabet a = lambda.alphabet();
    std::vector<double> m1(a.size()), m2(a.size());
    for (double& v : m1) v = 0.1 + rng.uniform();
    for (double& v : m2) v = 0.1 + rng.uniform();
    const double w = 0.2 + 0.6 * rng.uniform();
    MixtureSpec mu({{Measure(a, m1), w}, {Measure(a, m2), 1.0 - w}});
    return exact_joint_mixture(mu, lambda, n);
}

JointDist perturb(const JointDist& q, std::uint64_t idx, double factor) {
    std::vector<LogReal> table(q.table_size());
    for (std::uint64_t i = 0; i < q.table_size(); ++i) table[i] = q.at(i);
    if (!table[idx].zero) table[idx].lg += std::log(factor);
    const LogReal total = sum(std::span<const LogReal>(table));
    for (LogReal& v : table)
        if (!v.zero) v.lg -= total.lg;
    return JointDist(q.alphabet(), q.n(), std::move(table));
}

}  // namespace

TEST_SUITE("checks") {
    TEST_CASE("plain exchangeability") {
        CHECK(is_exchangeable(equal_mass_pair(), 1e-9).pass);

        const Alphabet a(2);
        const Measure p(a, {0.3, 0.7});
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        CHECK(is_exchangeable(exact_joint_weighted_iid(p, ones, 4), 1e-9).pass);

        const CheckReport bad = is_exchangeable(point_mass_01(), 1e-9);
        CHECK_FALSE(bad.pass);
        REQUIRE(bad.witness_swap.has_value());
        CHECK(bad.witness_swap->first == 1);
        CHECK(bad.witness_swap->second == 2);
    }

    TEST_CASE("the binary counterexample is weighted exchangeable") {
        const WeightSeq bin = WeightSeq::binary_example();
        for (int n = 2; n <= 10; ++n)
            CHECK(is_weighted_exchangeable(example1_joint(n), bin, 1e-12).pass);
        // Hand check of bar Q at n = 2: both single-one tuples normalize to 1.
        const JointDist q2 = example1_joint(2);
        const double bar10 = q2.at_tuple(std::vector<int>{1, 0}).linear() / (0.5 * 1.0);
        const double bar01 = q2.at_tuple(std::vector<int>{0, 1}).linear() / (1.0 * 0.25);
        CHECK(bar10 == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(bar01 == doctest::Approx(1.0).epsilon(1e-13));
    }

    TEST_CASE("weighted products pass for every tested family") {
        RandomSource rng(41, 0);
        for (int k = 2; k <= 3; ++k) {
            const Alphabet a(k);
            std::vector<double> mass(k);
            for (double& v : mass) v = 0.1 + rng.uniform();
            const Measure p(a, mass);
            std::vector<double> rates(k);
            for (int x = 0; x < k; ++x) rates[x] = 0.8 + 0.1 * x;
            for (const WeightSeq& lambda :
                 {WeightSeq::constant(WeightFn::constant_one(a)),
                  WeightSeq::geometric_tilt(WeightFn::constant_one(a), rates)}) {
                const JointDist q = exact_joint_weighted_iid(p, lambda, 4);
                CHECK(is_weighted_exchangeable(q, lambda, 1e-9).pass);
            }
        }
    }

    TEST_CASE("exchangeable joints are weighted exchangeable under constant weights") {
        const WeightSeq ones = WeightSeq::constant(WeightFn(Alphabet(2), {3.0, 3.0}));
        CHECK(is_weighted_exchangeable(equal_mass_pair(), ones, 1e-9).pass);
    }

    TEST_CASE("swap characterization agrees with the definition on random joints") {
        RandomSource rng(42, 0);
        const Alphabet a(2);
        const WeightSeq tilt = WeightSeq::geometric_tilt(WeightFn::constant_one(a), {0.9, 1.15});
        int checked = 0;
        for (int rep = 0; rep < 100; ++rep) {
            JointDist q = random_weighted_mixture(tilt, 3, rng);
            if (rep % 2 == 1) q = perturb(q, 1 + rep % 6, 1.05);
            const bool def = is_weighted_exchangeable(q, tilt, 1e-9).pass;
            const bool swp = weighted_swap_check_all_pairs(q, tilt, 1e-9).pass;
            CHECK(def == swp);
            ++checked;
        }
        CHECK(checked == 100);
    }

    TEST_CASE("swap check named cases") {
        const WeightSeq ones = WeightSeq::constant(WeightFn(Alphabet(2), {1.0, 1.0}));
        CHECK(weighted_swap_check(equal_mass_pair(), ones, 1, 2, 1e-9).pass);

        const WeightSeq skew = WeightSeq::custom(
            {WeightFn(Alphabet(2), {1.0, 2.0}), WeightFn(Alphabet(2), {1.0, 1.0})},
            WeightSeq::CustomTail::RepeatLast);
        CHECK_FALSE(weighted_swap_check(point_mass_01(), skew, 1, 2, 1e-9).pass);
        CHECK_THROWS_AS(weighted_swap_check(point_mass_01(), skew, 2, 2, 1e-9), bad_index_error);
    }

    TEST_CASE("mixture closure holds exactly") {
        RandomSource rng(43, 0);
        const Alphabet a(3);
        const WeightSeq tilt =
            WeightSeq::geometric_tilt(WeightFn(a, {1.0, 0.5, 2.0}), {1.0, 0.9, 1.1});
        for (int rep = 0; rep < 10; ++rep) {
            const JointDist q = random_weighted_mixture(tilt, 3, rng);
            CHECK(is_weighted_exchangeable(q, tilt, 1e-9).pass);
        }
    }

    TEST_CASE("conditional law: constant weights give the plain empirical distribution") {
        const Alphabet a(2);
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        RandomSource rng(44, 0);
        const JointDist q = random_weighted_mixture(ones, 4, rng);
        for (int m = 1; m <= 4; ++m)
            for (int i = 1; i <= m; ++i) CHECK(conditional_law_check(q, ones, i, m, 1e-9).pass);
    }

    TEST_CASE("conditional law holds on mixture joints too") {
        // Mixtures are weighted exchangeable without being products, so the
        // conditional law must still be the permanent-weighted empirical
        // distribution of the unordered prefix.
        RandomSource rng(45, 0);
        for (int k = 2; k <= 3; ++k) {
            const Alphabet a(k);
            std::vector<double> rates(k);
            for (int x = 0; x < k; ++x) rates[x] = 0.8 + 0.3 * x;
            const WeightSeq tilt = WeightSeq::geometric_tilt(WeightFn::constant_one(a), rates);
            for (int n = 2; n <= 5; ++n) {
                const JointDist q = random_weighted_mixture(tilt, n, rng);
                for (int m = 1; m <= n; ++m)
                    for (int i = 1; i <= m; ++i)
                        CHECK(conditional_law_check(q, tilt, i, m, 1e-9).pass);
            }
        }
    }

    TEST_CASE("conditional law on weighted products and the counterexample") {
        const Alphabet a2(2);
        const Measure p(a2, {0.4, 0.6});
        const WeightSeq tilt = WeightSeq::geometric_tilt(WeightFn::constant_one(a2), {1.0, 0.7});
        for (int n = 2; n <= 5; ++n) {
            const JointDist q = exact_joint_weighted_iid(p, tilt, n);
            for (int m = 1; m <= n; ++m)
                for (int i = 1; i <= m; ++i) CHECK(conditional_law_check(q, tilt, i, m, 1e-9).pass);
        }
        const WeightSeq bin = WeightSeq::binary_example();
        for (int n = 2; n <= 5; ++n) {
            const JointDist q = example1_joint(n);
            for (int m = 1; m <= n; ++m)
                for (int i = 1; i <= m; ++i) CHECK(conditional_law_check(q, bin, i, m, 1e-9).pass);
        }
    }

    TEST_CASE("a perturbed joint fails the conditional-law identity") {
        const Alphabet a(2);
        const Measure p(a, {0.4, 0.6});
        const WeightSeq tilt = WeightSeq::geometric_tilt(WeightFn::constant_one(a), {1.0, 0.7});
        const JointDist bad = perturb(exact_joint_weighted_iid(p, tilt, 3), 2, 1.2);
        bool any_fail = false;
        for (int m = 2; m <= 3; ++m)
            for (int i = 1; i <= m; ++i)
                any_fail = any_fail || !conditional_law_check(bad, tilt, i, m, 1e-9).pass;
        CHECK(any_fail);
    }

    TEST_CASE("factorization round trip recovers the base measure") {
        const Alphabet a(3);
        const Measure p(a, {0.2, 0.5, 0.8});
        const WeightSeq tilt =
            WeightSeq::geometric_tilt(WeightFn(a, {2.0, 1.0, 0.5}), {0.9, 1.0, 1.2});
        const JointDist q = exact_joint_weighted_iid(p, tilt, 4);
        const FactorResult res = factor_as_weighted_iid(q, tilt, 1e-9);
        REQUIRE(res.base.has_value());
        std::vector<LogReal> pm(3), rm(3);
        for (int x = 0; x < 3; ++x) {
            pm[x] = p.at(x);
            rm[x] = res.base->at(x);
        }
        const Dist expect = Dist::normalized(a, std::move(pm));
        const Dist got = Dist::normalized(a, std::move(rm));
        CHECK(total_variation(expect, got) <= 1e-10);
    }

    TEST_CASE("factorization is absent for the counterexample") {
        const WeightSeq bin = WeightSeq::binary_example();
        const FactorResult res = factor_as_weighted_iid(example1_joint(2), bin, 1e-9);
        CHECK_FALSE(res.base.has_value());
        CHECK(res.max_violation > 0.1);  // the (1,1) mass gap is 1/8
    }

    TEST_CASE("constant weights on an iid product return the base") {
        const Alphabet a(2);
        const Measure p(a, {0.25, 0.75});
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        const FactorResult res = factor_as_weighted_iid(exact_joint_weighted_iid(p, ones, 3), ones, 1e-9);
        REQUIRE(res.base.has_value());
        CHECK(std::abs(res.base->at(1).linear() / res.base->at(0).linear() - 3.0) < 1e-9);
    }
}
