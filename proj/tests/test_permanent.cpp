#include <doctest.h>

#include <cmath>
#include <numeric>

#include "wexch/permanent.hpp"
#include "wexch/sampler.hpp"

using namespace wexch;

namespace {

LogMatrix random_log_matrix(int n, RandomSource& rng) {
    std::vector<double> e(static_cast<std::size_t>(n) * n);
    for (double& v : e) v = -30.0 * rng.uniform();
    return LogMatrix(n, std::move(e));
}

struct Instance {
    std::vector<WeightFn> lambdas;
    std::vector<int> xs;
};

Instance random_instance(int n, int k, RandomSource& rng) {
    const Alphabet a(k);
    Instance inst;
    for (int i = 0; i < n; ++i) {
        std::vector<double> lv(k);
        for (double& v : lv) v = -30.0 * rng.uniform();
        inst.lambdas.push_back(WeightFn::from_log(a, std::move(lv)));
        inst.xs.push_back(static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k)));
    }
    return inst;
}

}  // namespace

TEST_SUITE("permanent") {
    TEST_CASE("all-ones matrices have permanent n!") {
        for (int n = 1; n <= 12; ++n) {
            const LogMatrix m(n, std::vector<double>(static_cast<std::size_t>(n) * n, 0.0));
            const double expect = std::lgamma(static_cast<double>(n) + 1.0);
            CHECK(std::abs(log_permanent(m) - expect) <= 1e-10 * std::max(1.0, std::abs(expect)));
            CHECK(std::abs(log_permanent_serial(m) - expect) <=
                  1e-10 * std::max(1.0, std::abs(expect)));
        }
    }

    TEST_CASE("two-by-two closed form") {
        RandomSource rng(31, 0);
        for (int rep = 0; rep < 25; ++rep) {
            const double a = rng.uniform() + 0.1, b = rng.uniform() + 0.1;
            const double c = rng.uniform() + 0.1, d = rng.uniform() + 0.1;
            const LogMatrix m(2, {std::log(a), std::log(b), std::log(c), std::log(d)});
            CHECK(log_permanent(m) == doctest::Approx(std::log(a * d + b * c)).epsilon(1e-12));
        }
    }

    TEST_CASE("binary-example matrix agrees with the factorial oracle") {
        const WeightSeq bin = WeightSeq::binary_example();
        std::vector<WeightFn> lambdas = {bin.term_at(1), bin.term_at(2), bin.term_at(3)};
        const std::vector<int> xs = {0, 1, 0};
        const LogMatrix m = LogMatrix::from_weights(lambdas, xs);
        CHECK(log_permanent(m) == doctest::Approx(oracle_log_permanent(m)).epsilon(1e-12));
    }

    TEST_CASE("ryser equals the factorial oracle on random matrices") {
        RandomSource rng(32, 0);
        for (int rep = 0; rep < 200; ++rep) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 6);  // up to 7
            const LogMatrix m = random_log_matrix(n, rng);
            const double ry = log_permanent(m);
            const double orc = oracle_log_permanent(m);
            CHECK(std::abs(ry - orc) <= 1e-10 * std::max(1.0, std::abs(orc)));
        }
    }

    TEST_CASE("serial and chunked kernels agree") {
        RandomSource rng(33, 0);
        for (int n : {12, 14, 15}) {
            const LogMatrix m = random_log_matrix(n, rng);
            CHECK(std::abs(log_permanent(m) - log_permanent_serial(m)) <= 1e-12 *
                  std::max(1.0, std::abs(log_permanent_serial(m))));
        }
    }

    TEST_CASE("size caps raise hard errors") {
        const LogMatrix big(21, std::vector<double>(21 * 21, 0.0));
        CHECK_THROWS_AS(log_permanent(big), too_large_error);
        const LogMatrix nine(9, std::vector<double>(81, 0.0));
        CHECK_THROWS_AS(oracle_log_permanent(nine), too_large_error);
    }

    TEST_CASE("multiset dynamic program matches ryser on repeated columns") {
        RandomSource rng(34, 0);
        for (int rep = 0; rep < 20; ++rep) {
            const Instance inst = random_instance(10, 3, rng);
            const LogMatrix m = LogMatrix::from_weights(inst.lambdas, inst.xs);
            const double dp = log_permanent_multiset(m);
            const double ry = log_permanent(m);
            CHECK(std::abs(dp - ry) <= 1e-10 * std::max(1.0, std::abs(ry)));
        }
        // Beyond the Ryser cap but with few symbol types.
        const Instance big = random_instance(26, 2, rng);
        const LogMatrix m = LogMatrix::from_weights(big.lambdas, big.xs);
        CHECK(std::isfinite(log_permanent_multiset(m)));
    }

    TEST_CASE("monte carlo estimator lands near the exact value") {
        const LogMatrix m(5, std::vector<double>(25, 0.0));
        const double est = log_permanent_mc(m, 20000, RandomSource(35, 0));
        CHECK(std::abs(est - std::log(120.0)) < 0.05);
    }

    TEST_CASE("constant weights give uniform conditional weights") {
        const Alphabet a(3);
        std::vector<WeightFn> lambdas(4, WeightFn(a, {2.0, 2.0, 2.0}));
        const std::vector<int> xs = {0, 2, 2, 1};
        for (int i = 1; i <= 4; ++i) {
            const CondWeights w = conditional_weights(lambdas, xs, i);
            for (double v : w.w) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
            const CondWeights o = oracle_conditional_weights(lambdas, xs, i);
            for (double v : o.w) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
        }
    }

    TEST_CASE("hand-worked two-point case") {
        const Alphabet a(2);
        std::vector<WeightFn> lambdas = {WeightFn(a, {1.0, 1.0}), WeightFn(a, {1.0, 0.5})};
        const std::vector<int> xs = {0, 1};
        const CondWeights w = conditional_weights(lambdas, xs, 1);
        CHECK(w.w[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
        CHECK(w.w[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    }

    TEST_CASE("single observation is trivially certain") {
        const Alphabet a(2);
        std::vector<WeightFn> lambdas = {WeightFn(a, {1.0, 7.0})};
        const std::vector<int> xs = {1};
        const CondWeights w = oracle_conditional_weights(lambdas, xs, 1);
        CHECK(w.w.size() == 1);
        CHECK(w.w[0] == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("ryser path equals the factorial oracle on 200 random weight instances") {
        RandomSource rng(36, 0);
        for (int rep = 0; rep < 200; ++rep) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 6);
            const int k = 2 + static_cast<int>(rng.next_u64() % 2);
            const Instance inst = random_instance(n, k, rng);
            const int i = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
            const CondWeights fast = conditional_weights(inst.lambdas, inst.xs, i);
            const CondWeights slow = oracle_conditional_weights(inst.lambdas, inst.xs, i);
            for (int j = 0; j < n; ++j) CHECK(std::abs(fast.w[j] - slow.w[j]) <= 1e-9);
        }
    }

    TEST_CASE("weights computed from ryser permanents also match the oracle") {
        RandomSource rng(36, 0);
        for (int rep = 0; rep < 200; ++rep) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 6);
            const int k = 2 + static_cast<int>(rng.next_u64() % 2);
            const Instance inst = random_instance(n, k, rng);
            const int i = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
            const LogMatrix m = LogMatrix::from_weights(inst.lambdas, inst.xs);
            const double full = log_permanent(m);
            const CondWeights slow = oracle_conditional_weights(inst.lambdas, inst.xs, i);
            for (int j = 0; j < n; ++j) {
                const double minor = n == 1 ? 0.0 : log_permanent(m.minor(i - 1, j));
                const double w = std::exp(inst.lambdas[i - 1].log_at(inst.xs[j]) + minor - full);
                CHECK(std::abs(w - slow.w[j]) <= 1e-9);
            }
        }
    }

    TEST_CASE("permuting observations permutes the weights") {
        RandomSource rng(37, 0);
        for (int rep = 0; rep < 30; ++rep) {
            const int n = 3 + static_cast<int>(rng.next_u64() % 4);
            const Instance inst = random_instance(n, 3, rng);
            std::vector<int> tau(n);
            std::iota(tau.begin(), tau.end(), 0);
            for (int k2 = n - 1; k2 > 0; --k2)
                std::swap(tau[k2], tau[rng.next_u64() % static_cast<std::uint64_t>(k2 + 1)]);
            std::vector<int> permuted(n);
            for (int j = 0; j < n; ++j) permuted[j] = inst.xs[tau[j]];
            const int i = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
            const CondWeights base = oracle_conditional_weights(inst.lambdas, inst.xs, i);
            const CondWeights perm = oracle_conditional_weights(inst.lambdas, permuted, i);
            for (int j = 0; j < n; ++j)
                CHECK(perm.w[j] == doctest::Approx(base.w[tau[j]]).epsilon(1e-9));
        }
    }

    TEST_CASE("weight tables are doubly stochastic up to n = 12") {
        RandomSource rng(38, 0);
        for (int n : {5, 9, 12}) {
            const Instance inst = random_instance(n, 3, rng);
            std::vector<std::vector<double>> table;
            for (int i = 1; i <= n; ++i) table.push_back(conditional_weights(inst.lambdas, inst.xs, i).w);
            for (int i = 0; i < n; ++i) {
                const double row = std::accumulate(table[i].begin(), table[i].end(), 0.0);
                CHECK(std::abs(row - 1.0) <= 1e-10);
            }
            for (int j = 0; j < n; ++j) {
                double col = 0.0;
                for (int i = 0; i < n; ++i) col += table[i][j];
                CHECK(std::abs(col - 1.0) <= 1e-10);
            }
        }
    }

    TEST_CASE("weighted empirical aggregation") {
        const Alphabet a(3);
        std::vector<WeightFn> lambdas(5, WeightFn(a, {1.0, 1.0, 1.0}));
        const std::vector<int> xs = {2, 0, 2, 1, 2};
        const Dist d = weighted_empirical_perm(lambdas, xs, 2, a);
        CHECK(d.prob(0) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(d.prob(1) == doctest::Approx(0.2).epsilon(1e-12));
        CHECK(d.prob(2) == doctest::Approx(0.6).epsilon(1e-12));

        const std::vector<int> same = {1, 1, 1, 1, 1};
        const Dist pt = weighted_empirical_perm(lambdas, same, 1, a);
        CHECK(pt.prob(1) == doctest::Approx(1.0).epsilon(1e-14));
    }

    TEST_CASE("weighted empirical matches the oracle aggregation") {
        RandomSource rng(39, 0);
        for (int rep = 0; rep < 40; ++rep) {
            const int n = 2 + static_cast<int>(rng.next_u64() % 6);
            const Instance inst = random_instance(n, 3, rng);
            const int i = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(n));
            const Dist fast = weighted_empirical_perm(inst.lambdas, inst.xs, i, Alphabet(3));
            const CondWeights slow = oracle_conditional_weights(inst.lambdas, inst.xs, i);
            std::vector<double> agg(3, 0.0);
            for (int j = 0; j < n; ++j) agg[inst.xs[j]] += slow.w[j];
            for (int x = 0; x < 3; ++x) CHECK(std::abs(fast.prob(x) - agg[x]) <= 1e-9);
        }
    }

    TEST_CASE("conditional weight caps") {
        const Alphabet a(2);
        std::vector<WeightFn> lambdas(15, WeightFn(a, {1.0, 2.0}));
        const std::vector<int> xs(15, 0);
        CHECK_THROWS_AS(conditional_weights(lambdas, xs, 1), too_large_error);
        CHECK_THROWS_AS(
            oracle_conditional_weights(std::span<const WeightFn>(lambdas.data(), 9),
                                       std::span<const int>(xs.data(), 9), 1),
            too_large_error);
        CHECK_THROWS_AS(conditional_weights(std::span<const WeightFn>(lambdas.data(), 4),
                                            std::span<const int>(xs.data(), 4), 5),
                        bad_index_error);
    }
}
