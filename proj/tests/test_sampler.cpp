#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "wexch/sampler.hpp"

using namespace wexch;

TEST_SUITE("sampler") {
    TEST_CASE("constant weights reduce to iid draws") {
        const Alphabet a(2);
        const Measure p(a, {0.7, 0.3});
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        const int n = 100000;
        const SampleRun run = sample_weighted_iid(p, ones, n, 2024);
        double mean = 0.0;
        for (int x : run.symbols) mean += x;
        mean /= n;
        const double sigma = std::sqrt(0.3 * 0.7 / n);
        CHECK(std::abs(mean - 0.3) < 3.0 * sigma);
    }

    TEST_CASE("a point mass emits a constant sequence") {
        const Alphabet a(3);
        const Measure p = Dist::point_mass(a, 1).as_measure();
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0, 1.0}));
        const SampleRun run = sample_weighted_iid(p, ones, 50, 5);
        for (int x : run.symbols) CHECK(x == 1);
    }

    TEST_CASE("runs reproduce from their seed") {
        const Alphabet a(2);
        const Measure p(a, {0.4, 0.6});
        const WeightSeq bin = WeightSeq::binary_example();
        const SampleRun r1 = sample_weighted_iid(p, bin, 64, 99);
        const SampleRun r2 = sample_weighted_iid(p, bin, 64, 99);
        CHECK(r1.symbols == r2.symbols);
        const SampleRun r3 = sample_weighted_iid(p, bin, 64, 100);
        CHECK(r1.symbols != r3.symbols);
    }

    TEST_CASE("binary-example coordinate marginals follow the reweighting") {
        const Alphabet a(2);
        const Measure p(a, {0.5, 0.5});
        const WeightSeq bin = WeightSeq::binary_example();
        const int reps = 40000, n = 3;
        std::vector<double> ones(n, 0.0);
        for (int r = 0; r < reps; ++r) {
            const SampleRun run = sample_weighted_iid(p, bin, n, 10000 + r);
            for (int i = 0; i < n; ++i) ones[i] += run.symbols[i];
        }
        for (int i = 1; i <= n; ++i) {
            const Dist exact = reweight(p, bin.term_at(i).linear());
            const double freq = ones[i - 1] / reps;
            const double sigma = std::sqrt(exact.prob(1) * exact.prob(0) / reps);
            CHECK(std::abs(freq - exact.prob(1)) < 3.0 * sigma);
        }
    }

    TEST_CASE("exact joint marginals equal the per-coordinate reweighting") {
        const Alphabet a(3);
        const Measure p(a, {0.2, 0.3, 1.0});
        const WeightSeq tilt =
            WeightSeq::geometric_tilt(WeightFn(a, {1.0, 2.0, 0.5}), {0.9, 1.0, 1.1});
        const JointDist q = exact_joint_weighted_iid(p, tilt, 4);
        for (int i = 1; i <= 4; ++i) {
            const Dist got = marginal_of_coordinate(q, i);
            const Dist expect = reweight(p, tilt.term_at(i).linear());
            CHECK(total_variation(got, expect) <= 1e-12);
        }
    }

    TEST_CASE("uniform products are uniform") {
        const Alphabet a(2);
        const Measure p(a, {0.5, 0.5});
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        const JointDist q = exact_joint_weighted_iid(p, ones, 3);
        for (std::uint64_t idx = 0; idx < 8; ++idx)
            CHECK(q.at(idx).linear() == doctest::Approx(0.125).epsilon(1e-13));
    }

    TEST_CASE("binary-example joint at n = 2 is the outer product of reweightings") {
        const Alphabet a(2);
        const Measure p(a, {0.5, 0.5});
        const WeightSeq bin = WeightSeq::binary_example();
        const JointDist q = exact_joint_weighted_iid(p, bin, 2);
        const double p1 = 0.5 / (1.0 + 0.5);    // coordinate 1 prob of symbol 1
        const double p2 = 0.25 / (1.0 + 0.25);  // coordinate 2 prob of symbol 1
        CHECK(q.at_tuple(std::vector<int>{0, 0}).linear() ==
              doctest::Approx((1 - p1) * (1 - p2)).epsilon(1e-13));
        CHECK(q.at_tuple(std::vector<int>{1, 0}).linear() ==
              doctest::Approx(p1 * (1 - p2)).epsilon(1e-13));
        CHECK(q.at_tuple(std::vector<int>{1, 1}).linear() ==
              doctest::Approx(p1 * p2).epsilon(1e-13));
        CHECK(exact_joint_weighted_iid(p, bin, 1).at(1).linear() ==
              doctest::Approx(reweight(p, bin.term_at(1).linear()).prob(1)).epsilon(1e-13));
    }

    TEST_CASE("sampled frequencies fit the exact joint (chi-square, seeded)") {
        for (int k = 2; k <= 3; ++k) {
            const Alphabet a(k);
            std::vector<double> mass(k);
            for (int x = 0; x < k; ++x) mass[x] = 1.0 + x;
            const Measure p(a, mass);
            std::vector<double> rates(k);
            for (int x = 0; x < k; ++x)
                rates[x] = 0.85 + 0.3 * static_cast<double>(x) / std::max(1, k - 1);
            const WeightSeq tilt = WeightSeq::geometric_tilt(WeightFn::constant_one(a), rates);
            for (int n = 1; n <= 3; ++n) {
                const JointDist joint = exact_joint_weighted_iid(p, tilt, n);
                const int draws = 100000;
                std::vector<int> counts(joint.table_size(), 0);
                std::vector<int> tuple(n);
                for (int r = 0; r < draws; ++r) {
                    const SampleRun run =
                        sample_weighted_iid(p, tilt, n, 777000 + 17 * k + 5 * n + r);
                    for (int t = 0; t < n; ++t) tuple[t] = run.symbols[t];
                    ++counts[joint.index_of(tuple)];
                }
                double chi2 = 0.0;
                for (std::uint64_t idx = 0; idx < joint.table_size(); ++idx) {
                    const double expect = joint.at(idx).linear() * draws;
                    const double diff = counts[idx] - expect;
                    chi2 += diff * diff / expect;
                }
                const boost::math::chi_squared dist(static_cast<double>(joint.table_size() - 1));
                CHECK(chi2 < boost::math::quantile(dist, 0.999));
            }
        }
    }

    TEST_CASE("mixture with one component matches the plain sampler seed for seed") {
        const Alphabet a(2);
        const Measure p(a, {0.25, 0.75});
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        MixtureSpec mu({{p, 1.0}});
        const SampleRun direct = sample_weighted_iid(p, ones, 32, 4242);
        const SampleRun mixed = sample_mixture(mu, ones, 32, 4242);
        CHECK(direct.symbols == mixed.symbols);
        CHECK(mixed.drawn_component == 0);
    }

    TEST_CASE("component draw frequency matches the mixing probabilities") {
        const Alphabet a(2);
        MixtureSpec mu({{Measure(a, {0.9, 0.1}), 0.5}, {Measure(a, {0.1, 0.9}), 0.5}});
        const WeightSeq ones = WeightSeq::constant(WeightFn(a, {1.0, 1.0}));
        const int reps = 10000;
        int first = 0;
        for (int r = 0; r < reps; ++r)
            if (*sample_mixture(mu, ones, 1, 31000 + r).drawn_component == 0) ++first;
        const double freq = static_cast<double>(first) / reps;
        CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / reps));
    }

    TEST_CASE("exact mixture joints are probability-weighted sums") {
        const Alphabet a(2);
        MixtureSpec mu({{Measure(a, {0.9, 0.1}), 0.3}, {Measure(a, {0.2, 0.8}), 0.7}});
        const WeightSeq bin = WeightSeq::binary_example();
        const JointDist mix = exact_joint_mixture(mu, bin, 2);
        const JointDist qa = exact_joint_weighted_iid(mu.components()[0].base, bin, 2);
        const JointDist qb = exact_joint_weighted_iid(mu.components()[1].base, bin, 2);
        for (std::uint64_t idx = 0; idx < 4; ++idx)
            CHECK(mix.at(idx).linear() ==
                  doctest::Approx(0.3 * qa.at(idx).linear() + 0.7 * qb.at(idx).linear())
                      .epsilon(1e-12));
    }

    TEST_CASE("the binary counterexample joint") {
        const JointDist q2 = example1_joint(2);
        CHECK(q2.at_tuple(std::vector<int>{1, 0}).linear() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(q2.at_tuple(std::vector<int>{0, 1}).linear() == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(q2.at_tuple(std::vector<int>{0, 0}).linear() == doctest::Approx(0.25).epsilon(1e-14));
        CHECK(q2.at_tuple(std::vector<int>{1, 1}).zero);

        const JointDist q1 = example1_joint(1);
        CHECK(q1.at(0).linear() == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(q1.at(1).linear() == doctest::Approx(0.5).epsilon(1e-14));

        for (int n = 1; n <= 10; ++n) {
            const JointDist q = example1_joint(n);
            CHECK(std::abs(q.total().linear() - 1.0) <= 1e-13);
            // Everything with two or more ones carries exactly zero mass.
            std::vector<int> tuple(n);
            for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
                q.decode(idx, tuple);
                int ones = 0;
                for (int x : tuple) ones += x;
                if (ones >= 2) CHECK(q.at(idx).zero);
            }
        }
    }

    TEST_CASE("counterexample sampler emits at most one 1 and a geometric position") {
        std::vector<int> pos_counts(5, 0);
        const int reps = 20000;
        for (int r = 0; r < reps; ++r) {
            const SampleRun run = example1_sample(16, 52000 + r);
            int ones = 0, where = -1;
            for (int i = 0; i < 16; ++i)
                if (run.symbols[i] == 1) {
                    ++ones;
                    where = i;
                }
            REQUIRE(ones <= 1);
            if (where >= 0 && where < 5) ++pos_counts[where];
        }
        for (int i = 1; i <= 5; ++i) {
            const double expect = std::pow(2.0, -i);
            const double freq = static_cast<double>(pos_counts[i - 1]) / reps;
            CHECK(std::abs(freq - expect) < 3.0 * std::sqrt(expect * (1 - expect) / reps));
        }
    }
}
