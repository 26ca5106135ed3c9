// Compares the chunked OpenMP Ryser kernel against the serial Gray-code
// walk, and both against the repeated-column dynamic program on matrices
// with few distinct symbols (the typical shape here: K << n).

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "wexch/experiments.hpp"
#include "wexch/permanent.hpp"
#include "wexch/random.hpp"

using namespace wexch;

namespace {

LogMatrix random_matrix(int n, std::uint64_t seed) {
    RandomSource rng(seed, 1);
    std::vector<double> e(static_cast<std::size_t>(n) * n);
    for (double& v : e) v = -30.0 * rng.uniform();
    return LogMatrix(n, std::move(e));
}

LogMatrix low_symbol_matrix(int n, int k, std::uint64_t seed) {
    RandomSource rng(seed, 2);
    const Alphabet a(k);
    std::vector<WeightFn> lambdas;
    std::vector<int> xs;
    for (int i = 0; i < n; ++i) {
        std::vector<double> lv(k);
        for (double& v : lv) v = -10.0 * rng.uniform();
        lambdas.push_back(WeightFn::from_log(a, std::move(lv)));
        xs.push_back(static_cast<int>(rng.next_u64() % k));
    }
    return LogMatrix::from_weights(lambdas, xs);
}

template <typename F>
double time_ms(F&& f, double* result) {
    const auto t0 = std::chrono::steady_clock::now();
    *result = f();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count();
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: disabled\n");
#endif
    std::printf("%-26s %6s %14s %12s %12s\n", "kernel", "n", "log_perm", "ms", "speedup");

    for (int n : {16, 18, 20}) {
        const LogMatrix m = random_matrix(n, 42);
        double serial = 0.0, parallel = 0.0;
        const double ms_serial = time_ms([&] { return log_permanent_serial(m); }, &serial);
        const double ms_parallel = time_ms([&] { return log_permanent(m); }, &parallel);
        std::printf("%-26s %6d %14.8f %12.2f %12s\n", "ryser serial", n, serial, ms_serial, "1.00x");
        std::printf("%-26s %6d %14.8f %12.2f %11.2fx\n", "ryser omp-chunked", n, parallel,
                    ms_parallel, ms_serial / ms_parallel);
        std::printf("%-26s %6d abs diff %.3e\n", "  agreement", n, std::abs(serial - parallel));
    }

    for (int n : {18, 24, 30}) {
        const LogMatrix m = low_symbol_matrix(n, 3, 7);
        double dp = 0.0;
        const double ms_dp = time_ms([&] { return log_permanent_multiset(m); }, &dp);
        std::printf("%-26s %6d %14.8f %12.2f\n", "multiset dp (k=3)", n, dp, ms_dp);
        if (n <= LogMatrix::kMaxExact) {
            double ry = 0.0;
            const double ms_ry = time_ms([&] { return log_permanent(m); }, &ry);
            std::printf("%-26s %6d %14.8f %12.2f  (abs diff %.3e)\n", "  ryser cross-check", n, ry,
                        ms_ry, std::abs(dp - ry));
        }
    }

    // Replicate pool: the experiment runners parallelize over seeded
    // replicates with a deterministic merge, so the pool scales without
    // changing a single output byte.
    {
        wexch::ordered_json j;
        j["experiment"] = "lln";
        j["alphabet"] = {{"size", 3}};
        j["family"] = {{"name", "bounded_ratio"},
                       {"table", {{1.0, 2.0, 1.0}, {2.0, 1.0, 1.0}, {1.0, 1.0, 2.0}}}};
        j["base_measure"] = {0.5, 0.3, 0.2};
        j["n_grid"] = {100000};
        j["replicates"] = 16;
        const wexch::ExperimentConfig cfg = wexch::ExperimentConfig::from_json(j);
#ifdef _OPENMP
        const int full = omp_get_max_threads();
        omp_set_num_threads(1);
#endif
        double ignored = 0.0;
        std::string serial_bytes, parallel_bytes;
        const double ms1 = time_ms(
            [&] {
                wexch::ExperimentResult r = wexch::run_lln(cfg);
                serial_bytes = r.json.dump();
                return 0.0;
            },
            &ignored);
#ifdef _OPENMP
        omp_set_num_threads(full);
#endif
        const double msn = time_ms(
            [&] {
                wexch::ExperimentResult r = wexch::run_lln(cfg);
                parallel_bytes = r.json.dump();
                return 0.0;
            },
            &ignored);
        std::printf("%-26s %6d %14s %12.2f %12s\n", "replicate pool x1", 16, "-", ms1, "1.00x");
        std::printf("%-26s %6d %14s %12.2f %11.2fx  (%s)\n", "replicate pool omp", 16, "-", msn,
                    ms1 / msn, serial_bytes == parallel_bytes ? "bytes identical" : "BYTES DIFFER");
    }
    return 0;
}
