#include "wexch/permanent.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace wexch {

LogMatrix::LogMatrix(int n, std::vector<double> log_entries) : n_(n), e_(std::move(log_entries)) {
    if (n < 0) throw invalid_argument_error("LogMatrix: negative size");
    if (e_.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(n))
        throw invalid_argument_error("LogMatrix: entry count mismatch");
    for (double v : e_)
        if (!std::isfinite(v)) throw invalid_argument_error("LogMatrix: entries must be finite");
}

LogMatrix LogMatrix::from_weights(std::span<const WeightFn> lambdas, std::span<const int> xs) {
    const int n = static_cast<int>(xs.size());
    if (static_cast<int>(lambdas.size()) != n)
        throw invalid_argument_error("LogMatrix: need n weight functions for n observations");
    std::vector<double> e(static_cast<std::size_t>(n) * n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(k) * n + j] = lambdas[k].log_at(xs[j]);
    return LogMatrix(n, std::move(e));
}

LogMatrix LogMatrix::minor(int row, int col) const {
    std::vector<double> e;
    e.reserve(static_cast<std::size_t>(n_ - 1) * (n_ - 1));
    for (int k = 0; k < n_; ++k) {
        if (k == row) continue;
        for (int j = 0; j < n_; ++j) {
            if (j == col) continue;
            e.push_back(at(k, j));
        }
    }
    return LogMatrix(n_ - 1, std::move(e));
}

namespace {

// Scaled linear copy: log entries are balanced by exact row and column
// offsets (max per row, then max per column), so every row and column
// peaks near 1. Balancing multiplies the permanent by a known factor and
// shrinks the spread that feeds Ryser's cancellation.
struct ScaledMatrix {
    int n;
    std::vector<double> a;  // row-major, in (0, 1]
    double offset = 0.0;    // log of the factored-out scale

    explicit ScaledMatrix(const LogMatrix& m) : n(m.n()), a(m.entries().size()) {
        std::vector<double> e(m.entries());
        for (int round = 0; round < 2; ++round) {
            for (int k = 0; k < n; ++k) {
                double mx = -std::numeric_limits<double>::infinity();
                for (int j = 0; j < n; ++j) mx = std::max(mx, e[static_cast<std::size_t>(k) * n + j]);
                for (int j = 0; j < n; ++j) e[static_cast<std::size_t>(k) * n + j] -= mx;
                offset += mx;
            }
            for (int j = 0; j < n; ++j) {
                double mx = -std::numeric_limits<double>::infinity();
                for (int k = 0; k < n; ++k) mx = std::max(mx, e[static_cast<std::size_t>(k) * n + j]);
                for (int k = 0; k < n; ++k) e[static_cast<std::size_t>(k) * n + j] -= mx;
                offset += mx;
            }
        }
        for (std::size_t i = 0; i < e.size(); ++i) a[i] = std::exp(e[i]);
    }

    double log_offset() const { return offset; }
};

// Double-double compensated arithmetic. Ryser's alternating sum cancels
// the positive and negative groups down by many orders of magnitude when
// matrix entries span a wide range (the e^-i weights do exactly that), and
// the cancellation multiplies any rounding in the terms. Roughly 32
// digits in the row sums, the term products, and the two group
// accumulators keep the resolved difference at full double accuracy.
struct DD {
    double hi = 0.0;
    double lo = 0.0;
};

inline DD two_sum(double a, double b) {
    const double s = a + b;
    const double bb = s - a;
    return {s, (a - (s - bb)) + (b - bb)};
}

inline DD dd_renorm(double hi, double lo) {
    const double s = hi + lo;
    return {s, lo - (s - hi)};
}

inline DD dd_add(DD a, DD b) {
    const DD s = two_sum(a.hi, b.hi);
    return dd_renorm(s.hi, s.lo + a.lo + b.lo);
}

inline DD dd_add(DD a, double b) {
    const DD s = two_sum(a.hi, b);
    return dd_renorm(s.hi, s.lo + a.lo);
}

inline DD two_prod(double a, double b) {
    const double p = a * b;
    return {p, std::fma(a, b, -p)};
}

inline DD dd_mul(DD a, DD b) {
    const DD p = two_prod(a.hi, b.hi);
    return dd_renorm(p.hi, p.lo + a.hi * b.lo + a.lo * b.hi);
}

// Signed accumulator pair for Ryser's alternating sum over row-scaled
// terms: the positive and negative groups are summed separately in
// double-double and resolved once at the end.
struct SignedSum {
    DD pos, neg;

    void add(DD term, bool positive) {
        if (positive)
            pos = dd_add(pos, term);
        else
            neg = dd_add(neg, term);
    }

    void merge(const SignedSum& other) {
        pos = dd_add(pos, other.pos);
        neg = dd_add(neg, other.neg);
    }

    double resolve_log() const {
        const DD diff = dd_add(pos, DD{-neg.hi, -neg.lo});
        if (!(diff.hi > 0.0)) throw error("permanent: alternating sum resolved nonpositive");
        // log(hi + lo) = log(hi) + log1p(lo/hi).
        return std::log(diff.hi) + std::log1p(diff.lo / diff.hi);
    }
};

// Quad-precision variant used when the first pass reports cancellation
// beyond what double-double resolves; triggered rarely, on matrices whose
// entries span many hundreds of orders of magnitude.
struct SignedSumQ {
    __float128 pos = 0, neg = 0;

    void merge(const SignedSumQ& other) {
        pos += other.pos;
        neg += other.neg;
    }

    double resolve_log() const {
        __float128 diff = pos - neg;
        if (!(diff > 0)) throw error("permanent: alternating sum resolved nonpositive");
        // log without libquadmath: pull the value into double range first.
        double shift = 0.0;
        while (diff < (__float128)1e-280) {
            diff *= (__float128)0x1p512;
            shift -= 512.0 * 0.6931471805599453094;
        }
        while (diff > (__float128)1e280) {
            diff *= (__float128)0x1p-512;
            shift += 512.0 * 0.6931471805599453094;
        }
        const double hi = static_cast<double>(diff);
        const double rest = static_cast<double>((diff - (__float128)hi) / diff);
        return std::log(hi) + std::log1p(rest) + shift;
    }
};

void ryser_walk_quad(const ScaledMatrix& sm, std::uint64_t t_lo, std::uint64_t t_hi,
                     SignedSumQ& acc) {
    const int n = sm.n;
    std::uint64_t gray = t_lo ^ (t_lo >> 1);
    std::vector<__float128> rowsum(n, 0);
    auto rebuild = [&] {
        for (int k = 0; k < n; ++k) {
            __float128 s = 0;
            const double* row = sm.a.data() + static_cast<std::size_t>(k) * n;
            for (int j = 0; j < n; ++j)
                if (gray & (std::uint64_t{1} << j)) s += (__float128)row[j];
            rowsum[k] = s;
        }
    };
    rebuild();
    for (std::uint64_t t = t_lo;; ++t) {
        __float128 term = 1;
        for (int k = 0; k < n; ++k) term *= rowsum[k];
        if (term > 0) {
            if (((n - std::popcount(gray)) & 1) == 0)
                acc.pos += term;
            else
                acc.neg += term;
        }
        if (t + 1 >= t_hi) break;
        const int b = std::countr_zero(t + 1);
        const std::uint64_t bit = std::uint64_t{1} << b;
        const bool added = !(gray & bit);
        gray ^= bit;
        for (int k = 0; k < n; ++k) {
            const __float128 v = sm.a[static_cast<std::size_t>(k) * n + b];
            rowsum[k] += added ? v : -v;
            if (rowsum[k] < 0) rowsum[k] = 0;
        }
    }
}

// Walks Gray codes for t in [t_lo, t_hi) and accumulates Ryser terms. Row
// subset sums are (re)built from scratch at the walk start and refreshed
// periodically to flush additive drift.
void ryser_walk(const ScaledMatrix& sm, std::uint64_t t_lo, std::uint64_t t_hi, SignedSum& acc) {
    const int n = sm.n;
    std::uint64_t gray = t_lo ^ (t_lo >> 1);
    std::vector<DD> rowsum(n);
    auto rebuild = [&] {
        for (int k = 0; k < n; ++k) {
            DD s;
            const double* row = sm.a.data() + static_cast<std::size_t>(k) * n;
            for (int j = 0; j < n; ++j)
                if (gray & (std::uint64_t{1} << j)) s = dd_add(s, row[j]);
            rowsum[k] = s;
        }
    };
    rebuild();
    constexpr std::uint64_t kRefresh = std::uint64_t{1} << 16;
    std::uint64_t since_refresh = 0;
    for (std::uint64_t t = t_lo;; ++t) {
        const int popcnt = std::popcount(gray);
        DD term{1.0, 0.0};
        for (int k = 0; k < n; ++k) term = dd_mul(term, rowsum[k]);
        if (term.hi > 0.0) acc.add(term, ((n - popcnt) & 1) == 0);
        if (t + 1 >= t_hi) break;
        const int b = std::countr_zero(t + 1);
        const std::uint64_t bit = std::uint64_t{1} << b;
        const bool added = !(gray & bit);
        gray ^= bit;
        for (int k = 0; k < n; ++k) {
            const double v = sm.a[static_cast<std::size_t>(k) * n + b];
            rowsum[k] = dd_add(rowsum[k], added ? v : -v);
            if (rowsum[k].hi < 0.0) rowsum[k] = DD{};  // cancellation guard
        }
        if (++since_refresh == kRefresh) {
            rebuild();
            since_refresh = 0;
        }
    }
}

double ryser(const LogMatrix& m, bool chunked) {
    const int n = m.n();
    if (n > LogMatrix::kMaxExact)
        throw too_large_error("log_permanent: n exceeds the exact cap of 20");
    if (n == 0) return 0.0;  // empty product convention: perm of 0x0 is 1
    const ScaledMatrix sm(m);
    const std::uint64_t t_end = std::uint64_t{1} << n;
    SignedSum total;
    if (!chunked || n < 12) {
        ryser_walk(sm, 1, t_end, total);
    } else {
        // Fixed chunk grid: the split does not depend on the thread count,
        // and chunk results merge in index order, so the value is stable
        // under any OMP_NUM_THREADS.
        constexpr int kChunks = 256;
        const std::uint64_t span = t_end - 1;
        std::vector<SignedSum> parts(kChunks);
#pragma omp parallel for schedule(static)
        for (int c = 0; c < kChunks; ++c) {
            const std::uint64_t lo = 1 + span * static_cast<std::uint64_t>(c) / kChunks;
            const std::uint64_t hi = 1 + span * (static_cast<std::uint64_t>(c) + 1) / kChunks;
            if (lo < hi) ryser_walk(sm, lo, hi, parts[c]);
        }
        for (const SignedSum& p : parts) total.merge(p);
    }
    // Second pass in quad precision when the groups cancel so deeply that
    // double-double would surface in the tenth digit.
    const DD diff = dd_add(total.pos, DD{-total.neg.hi, -total.neg.lo});
    const double amplification =
        diff.hi > 0.0 ? (total.pos.hi + total.neg.hi) / diff.hi
                      : std::numeric_limits<double>::infinity();
    if (amplification > 1e16) {
        SignedSumQ refined;
        if (!chunked || n < 12) {
            ryser_walk_quad(sm, 1, t_end, refined);
        } else {
            constexpr int kChunks = 256;
            const std::uint64_t span = t_end - 1;
            std::vector<SignedSumQ> parts(kChunks);
#pragma omp parallel for schedule(static)
            for (int c = 0; c < kChunks; ++c) {
                const std::uint64_t lo = 1 + span * static_cast<std::uint64_t>(c) / kChunks;
                const std::uint64_t hi = 1 + span * (static_cast<std::uint64_t>(c) + 1) / kChunks;
                if (lo < hi) ryser_walk_quad(sm, lo, hi, parts[c]);
            }
            for (const SignedSumQ& p : parts) refined.merge(p);
        }
        return refined.resolve_log() + sm.log_offset();
    }
    return total.resolve_log() + sm.log_offset();
}

}  // namespace

double log_permanent(const LogMatrix& m) { return ryser(m, true); }

double log_permanent_serial(const LogMatrix& m) { return ryser(m, false); }

double oracle_log_permanent(const LogMatrix& m) {
    const int n = m.n();
    if (n > 8) throw too_large_error("oracle_log_permanent: n exceeds the factorial cap of 8");
    if (n == 0) return 0.0;
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    LogAccumulator acc;
    do {
        double lg = 0.0;
        for (int k = 0; k < n; ++k) lg += m.at(k, sigma[k]);
        acc.add_log(lg);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return acc.log_value();
}

double log_permanent_multiset(const LogMatrix& m) {
    const int n = m.n();
    if (n == 0) return 0.0;
    // Group identical columns (bit-equal entries).
    std::map<std::vector<double>, int> type_of;
    std::vector<int> col_type(n);
    std::vector<std::vector<double>> types;
    for (int j = 0; j < n; ++j) {
        std::vector<double> col(n);
        for (int k = 0; k < n; ++k) col[k] = m.at(k, j);
        auto [it, fresh] = type_of.try_emplace(std::move(col), static_cast<int>(types.size()));
        if (fresh) types.push_back(it->first);
        col_type[j] = it->second;
    }
    const int c = static_cast<int>(types.size());
    std::vector<int> mult(c, 0);
    for (int j = 0; j < n; ++j) ++mult[col_type[j]];

    std::uint64_t states = 1;
    for (int t = 0; t < c; ++t) {
        states *= static_cast<std::uint64_t>(mult[t] + 1);
        if (states > (std::uint64_t{1} << 22))
            throw too_large_error("log_permanent_multiset: state space exceeds 2^22");
    }
    std::vector<std::uint64_t> stride(c);
    std::uint64_t acc_stride = 1;
    for (int t = 0; t < c; ++t) {
        stride[t] = acc_stride;
        acc_stride *= static_cast<std::uint64_t>(mult[t] + 1);
    }

    const double neg_inf = -std::numeric_limits<double>::infinity();
    std::vector<double> cur(states, neg_inf), next(states, neg_inf);
    cur[0] = 0.0;
    std::vector<int> used(c);
    for (int row = 0; row < n; ++row) {
        std::fill(next.begin(), next.end(), neg_inf);
        for (std::uint64_t s = 0; s < states; ++s) {
            if (cur[s] == neg_inf) continue;
            std::uint64_t rem = s;
            for (int t = 0; t < c; ++t) {
                used[t] = static_cast<int>(rem % static_cast<std::uint64_t>(mult[t] + 1));
                rem /= static_cast<std::uint64_t>(mult[t] + 1);
            }
            for (int t = 0; t < c; ++t) {
                const int avail = mult[t] - used[t];
                if (avail == 0) continue;
                const std::uint64_t s2 = s + stride[t];
                const double lg = cur[s] + types[t][row] + std::log(static_cast<double>(avail));
                next[s2] = log_add(next[s2], lg);
            }
        }
        cur.swap(next);
    }
    return cur[states - 1];
}

double log_permanent_mc(const LogMatrix& m, int samples, RandomSource rng) {
    const int n = m.n();
    if (n == 0) return 0.0;
    if (samples < 1) throw invalid_argument_error("log_permanent_mc: need samples >= 1");
    std::vector<int> sigma(n);
    LogAccumulator acc;
    for (int s = 0; s < samples; ++s) {
        std::iota(sigma.begin(), sigma.end(), 0);
        for (int k = n - 1; k > 0; --k) {
            const int j = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(k + 1));
            std::swap(sigma[k], sigma[j]);
        }
        double lg = 0.0;
        for (int k = 0; k < n; ++k) lg += m.at(k, sigma[k]);
        acc.add_log(lg);
    }
    return acc.log_value() - std::log(static_cast<double>(samples)) +
           std::lgamma(static_cast<double>(n) + 1.0);
}

CondWeights conditional_weights(std::span<const WeightFn> lambdas, std::span<const int> xs,
                                int i) {
    const int n = static_cast<int>(xs.size());
    if (n < 1) throw invalid_argument_error("conditional_weights: empty input");
    if (n > LogMatrix::kMaxCondTable)
        throw too_large_error("conditional_weights: n exceeds the table cap of 14");
    if (i < 1 || i > n) throw bad_index_error("conditional_weights: i out of range");
    const LogMatrix m = LogMatrix::from_weights(lambdas, xs);
    // The repeated-column dynamic program sums positive terms only, so the
    // permanent ratios stay accurate even when the weights span hundreds of
    // orders of magnitude (Ryser's alternating sum is its oracle in tests).
    const double log_full = log_permanent_multiset(m);

    // Minors depend on the deleted column only through its symbol, so one
    // permanent per distinct symbol suffices.
    std::map<int, double> minor_by_symbol;
    CondWeights out;
    out.n = n;
    out.i = i;
    out.w.resize(n);
    for (int j = 0; j < n; ++j) {
        auto it = minor_by_symbol.find(xs[j]);
        if (it == minor_by_symbol.end()) {
            const double lp = n == 1 ? 0.0 : log_permanent_multiset(m.minor(i - 1, j));
            it = minor_by_symbol.emplace(xs[j], lp).first;
        }
        out.w[j] = std::exp(lambdas[i - 1].log_at(xs[j]) + it->second - log_full);
    }
    return out;
}

CondWeights oracle_conditional_weights(std::span<const WeightFn> lambdas,
                                       std::span<const int> xs, int i) {
    const int n = static_cast<int>(xs.size());
    if (n < 1) throw invalid_argument_error("oracle_conditional_weights: empty input");
    if (n > 8) throw too_large_error("oracle_conditional_weights: n exceeds the factorial cap of 8");
    if (i < 1 || i > n) throw bad_index_error("oracle_conditional_weights: i out of range");
    std::vector<int> sigma(n);
    std::iota(sigma.begin(), sigma.end(), 0);
    std::vector<LogAccumulator> num(n);
    LogAccumulator den;
    do {
        double lg = 0.0;
        for (int k = 0; k < n; ++k) lg += lambdas[k].log_at(xs[sigma[k]]);
        num[sigma[i - 1]].add_log(lg);
        den.add_log(lg);
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    CondWeights out;
    out.n = n;
    out.i = i;
    out.w.resize(n);
    for (int j = 0; j < n; ++j) out.w[j] = std::exp(num[j].log_value() - den.log_value());
    return out;
}

Dist weighted_empirical_perm(std::span<const WeightFn> lambdas, std::span<const int> xs, int i,
                             const Alphabet& alphabet) {
    const CondWeights cw = conditional_weights(lambdas, xs, i);
    std::vector<LogAccumulator> acc(alphabet.size());
    std::vector<bool> any(alphabet.size(), false);
    for (int j = 0; j < cw.n; ++j) {
        if (cw.w[j] <= 0.0) continue;
        acc[xs[j]].add_log(std::log(cw.w[j]));
        any[xs[j]] = true;
    }
    std::vector<LogReal> mass(alphabet.size());
    for (int x = 0; x < alphabet.size(); ++x)
        if (any[x]) mass[x] = LogReal::from_log(acc[x].log_value());
    return Dist::normalized(alphabet, std::move(mass));
}

}  // namespace wexch
