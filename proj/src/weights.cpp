#include "wexch/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace wexch {

namespace {
constexpr double kLog2 = 0.6931471805599453094;
}

WeightFn::WeightFn(Alphabet alphabet, std::vector<double> values) : alphabet_(std::move(alphabet)) {
    if (static_cast<int>(values.size()) != alphabet_.size())
        throw alphabet_mismatch_error("WeightFn: size mismatch");
    log_values_.reserve(values.size());
    for (double v : values) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw non_positive_weight_error("WeightFn: values must be in (0, inf)");
        log_values_.push_back(std::log(v));
    }
}

WeightFn WeightFn::from_log(Alphabet alphabet, std::vector<double> log_values) {
    WeightFn w(std::move(alphabet));
    if (static_cast<int>(log_values.size()) != w.alphabet_.size())
        throw alphabet_mismatch_error("WeightFn: size mismatch");
    for (double lv : log_values)
        if (!std::isfinite(lv))
            throw non_positive_weight_error("WeightFn: log values must be finite");
    w.log_values_ = std::move(log_values);
    return w;
}

WeightFn WeightFn::constant_one(Alphabet alphabet) {
    const int k = alphabet.size();
    return from_log(std::move(alphabet), std::vector<double>(k, 0.0));
}

std::vector<double> WeightFn::linear() const {
    std::vector<double> out;
    out.reserve(log_values_.size());
    for (double lv : log_values_) out.push_back(std::exp(lv));
    return out;
}

WeightFn WeightFn::times(const WeightFn& other) const {
    if (!(alphabet_ == other.alphabet_))
        throw alphabet_mismatch_error("WeightFn::times: alphabets differ");
    std::vector<double> lv(log_values_);
    for (int x = 0; x < size(); ++x) lv[x] += other.log_values_[x];
    return from_log(alphabet_, std::move(lv));
}

WeightSeq::WeightSeq(Alphabet alphabet, Family family)
    : alphabet_(std::move(alphabet)), family_(std::move(family)) {
    const int k = alphabet_.size();
    // Validate and derive the affine closed form, family by family.
    if (auto* c = std::get_if<Constant>(&family_)) {
        if (c->w.size() != k) throw alphabet_mismatch_error("Constant: size mismatch");
        AffineTail t;
        t.period = 1;
        t.intercept = {c->w.log_values()};
        t.slope = {std::vector<double>(k, 0.0)};
        affine_ = std::move(t);
    } else if (std::get_if<BinaryExample>(&family_)) {
        if (k != 2) throw wrong_alphabet_error("BinaryExample: requires K = 2");
        AffineTail t;
        t.period = 1;
        t.intercept = {{0.0, 0.0}};
        t.slope = {{0.0, -kLog2}};
        affine_ = std::move(t);
    } else if (auto* cp = std::get_if<CyclicPartition>(&family_)) {
        if (cp->blocks.empty()) throw invalid_argument_error("CyclicPartition: no blocks");
        if (!(cp->rate > 1.0)) throw invalid_argument_error("CyclicPartition: rate must be > 1");
        std::vector<int> owner(k, -1);
        for (std::size_t b = 0; b < cp->blocks.size(); ++b) {
            if (cp->blocks[b].empty())
                throw invalid_argument_error("CyclicPartition: blocks must be nonempty");
            for (int x : cp->blocks[b]) {
                if (x < 0 || x >= k || owner[x] != -1)
                    throw invalid_argument_error("CyclicPartition: blocks must partition the alphabet");
                owner[x] = static_cast<int>(b);
            }
        }
        for (int x = 0; x < k; ++x)
            if (owner[x] == -1)
                throw invalid_argument_error("CyclicPartition: blocks must cover the alphabet");
        const int p = static_cast<int>(cp->blocks.size());
        AffineTail t;
        t.period = p;
        t.intercept.assign(p, std::vector<double>(k, 0.0));
        t.slope.assign(p, std::vector<double>(k, 0.0));
        for (int c2 = 0; c2 < p; ++c2) {
            const int penalized = ((c2 - 1) % p + p) % p;  // i == c2 (mod p) penalizes block (i-1) mod p
            for (int x : cp->blocks[penalized]) t.slope[c2][x] = -std::log(cp->rate);
        }
        affine_ = std::move(t);
    } else if (auto* g = std::get_if<GeometricTilt>(&family_)) {
        if (g->base.size() != k || static_cast<int>(g->rates.size()) != k)
            throw alphabet_mismatch_error("GeometricTilt: size mismatch");
        for (double r : g->rates)
            if (!(r > 0.0) || !std::isfinite(r))
                throw invalid_argument_error("GeometricTilt: rates must be in (0, inf)");
        AffineTail t;
        t.period = 1;
        t.intercept = {g->base.log_values()};
        std::vector<double> sl(k);
        for (int x = 0; x < k; ++x) sl[x] = std::log(g->rates[x]);
        t.slope = {std::move(sl)};
        affine_ = std::move(t);
    } else if (auto* br = std::get_if<BoundedRatio>(&family_)) {
        if (br->table.empty()) throw invalid_argument_error("BoundedRatio: empty table");
        for (const WeightFn& w : br->table)
            if (w.size() != k) throw alphabet_mismatch_error("BoundedRatio: size mismatch");
        const int p = static_cast<int>(br->table.size());
        AffineTail t;
        t.period = p;
        t.intercept.assign(p, {});
        t.slope.assign(p, std::vector<double>(k, 0.0));
        for (int c2 = 0; c2 < p; ++c2) t.intercept[c2] = br->table[((c2 - 1) % p + p) % p].log_values();
        affine_ = std::move(t);
    } else if (auto* cu = std::get_if<Custom>(&family_)) {
        if (cu->table.empty()) throw invalid_argument_error("Custom: empty table");
        for (const WeightFn& w : cu->table)
            if (w.size() != k) throw alphabet_mismatch_error("Custom: size mismatch");
        const int tn = static_cast<int>(cu->table.size());
        if (cu->tail == CustomTail::RepeatLast) {
            AffineTail t;
            t.period = 1;
            t.start = tn;  // the repeated entry already holds from index tn
            t.intercept = {cu->table.back().log_values()};
            t.slope = {std::vector<double>(k, 0.0)};
            affine_ = std::move(t);
        } else if (cu->tail == CustomTail::Cycle) {
            AffineTail t;
            t.period = tn;
            t.intercept.assign(tn, {});
            t.slope.assign(tn, std::vector<double>(k, 0.0));
            for (int c2 = 0; c2 < tn; ++c2)
                t.intercept[c2] = cu->table[((c2 - 1) % tn + tn) % tn].log_values();
            affine_ = std::move(t);
        }
        // Unspecified: no affine form; term_at repeats the last entry.
    }
}

WeightSeq WeightSeq::constant(WeightFn w) {
    Alphabet a = w.alphabet();
    return WeightSeq(std::move(a), Constant{std::move(w)});
}

WeightSeq WeightSeq::binary_example() { return WeightSeq(Alphabet(2), BinaryExample{}); }

WeightSeq WeightSeq::cyclic_partition(Alphabet alphabet, std::vector<std::vector<int>> blocks,
                                      double rate) {
    return WeightSeq(std::move(alphabet), CyclicPartition{std::move(blocks), rate});
}

WeightSeq WeightSeq::geometric_tilt(WeightFn base, std::vector<double> rates) {
    Alphabet a = base.alphabet();
    return WeightSeq(std::move(a), GeometricTilt{std::move(base), std::move(rates)});
}

WeightSeq WeightSeq::bounded_ratio(std::vector<WeightFn> table) {
    if (table.empty()) throw invalid_argument_error("BoundedRatio: empty table");
    Alphabet a = table.front().alphabet();
    return WeightSeq(std::move(a), BoundedRatio{std::move(table)});
}

WeightSeq WeightSeq::custom(std::vector<WeightFn> table, CustomTail tail) {
    if (table.empty()) throw invalid_argument_error("Custom: empty table");
    Alphabet a = table.front().alphabet();
    return WeightSeq(std::move(a), Custom{std::move(table), tail});
}

std::string WeightSeq::family_name() const {
    if (std::get_if<Constant>(&family_)) return "constant";
    if (std::get_if<BinaryExample>(&family_)) return "binary_example";
    if (std::get_if<CyclicPartition>(&family_)) return "cyclic_partition";
    if (std::get_if<GeometricTilt>(&family_)) return "geometric_tilt";
    if (std::get_if<BoundedRatio>(&family_)) return "bounded_ratio";
    return "custom";
}

void WeightSeq::log_term_at(std::int64_t i, std::span<double> out) const {
    if (i < 1) throw bad_index_error("WeightSeq: index is 1-based");
    const int k = alphabet_.size();
    if (auto* c = std::get_if<Constant>(&family_)) {
        for (int x = 0; x < k; ++x) out[x] = c->w.log_at(x);
    } else if (std::get_if<BinaryExample>(&family_)) {
        out[0] = 0.0;
        out[1] = -static_cast<double>(i) * kLog2;
    } else if (auto* cp = std::get_if<CyclicPartition>(&family_)) {
        const int p = static_cast<int>(cp->blocks.size());
        const int penalized = static_cast<int>((i - 1) % p);
        for (int x = 0; x < k; ++x) out[x] = 0.0;
        for (int x : cp->blocks[penalized]) out[x] = -static_cast<double>(i) * std::log(cp->rate);
    } else if (auto* g = std::get_if<GeometricTilt>(&family_)) {
        for (int x = 0; x < k; ++x)
            out[x] = g->base.log_at(x) + static_cast<double>(i) * std::log(g->rates[x]);
    } else if (auto* br = std::get_if<BoundedRatio>(&family_)) {
        const WeightFn& w = br->table[(i - 1) % static_cast<std::int64_t>(br->table.size())];
        for (int x = 0; x < k; ++x) out[x] = w.log_at(x);
    } else if (auto* cu = std::get_if<Custom>(&family_)) {
        const std::int64_t tn = static_cast<std::int64_t>(cu->table.size());
        const WeightFn* w = nullptr;
        if (i <= tn)
            w = &cu->table[i - 1];
        else if (cu->tail == CustomTail::Cycle)
            w = &cu->table[(i - 1) % tn];
        else
            w = &cu->table.back();  // RepeatLast and Unspecified extend numerically alike
        for (int x = 0; x < k; ++x) out[x] = w->log_at(x);
    }
}

WeightFn WeightSeq::term_at(std::int64_t i) const {
    std::vector<double> lv(alphabet_.size());
    log_term_at(i, lv);
    return WeightFn::from_log(alphabet_, std::move(lv));
}

WeightFn weight_at(const WeightSeq& seq, std::int64_t i) { return seq.term_at(i); }

double log_ratio_term(const WeightSeq& seq, std::int64_t i, const WeightFn& ref) {
    if (!(seq.alphabet() == ref.alphabet()))
        throw alphabet_mismatch_error("ratio_term: alphabets differ");
    const int k = seq.k();
    std::vector<double> lv(k);
    seq.log_term_at(i, lv);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (int x = 0; x < k; ++x) {
        const double r = lv[x] - ref.log_at(x);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return lo - hi;
}

double ratio_term(const WeightSeq& seq, std::int64_t i, const WeightFn& ref) {
    return std::exp(log_ratio_term(seq, i, ref));
}

SeriesRule sufficient_rule(const WeightSeq& seq, const WeightFn& ref) {
    if (!(seq.alphabet() == ref.alphabet()))
        throw alphabet_mismatch_error("sufficient_rule: alphabets differ");
    SeriesRule r;
    r.name = "sufficient";
    for (int x = 0; x < seq.k(); ++x) {
        r.min_over.push_back(x);
        r.max_over.push_back(x);
    }
    r.log_ref = ref.log_values();
    return r;
}

SeriesRule binary_rule(const WeightSeq& seq) {
    if (seq.k() != 2) throw wrong_alphabet_error("binary_rule: requires K = 2");
    SeriesRule r;
    r.name = "binary";
    r.min_over = {0, 1};
    r.max_over = {0, 1};
    r.log_ref = {0.0, 0.0};
    return r;
}

SeriesRule graph_edge_rule(const WeightSeq& seq, int x0, int x1, std::span<const int> subset) {
    if (x0 == x1) throw invalid_argument_error("graph_edge_rule: symbols must differ");
    SeriesRule r;
    r.name = "graph_edge";
    r.min_over = {x0, x1};
    r.max_over.assign(subset.begin(), subset.end());
    r.log_ref.assign(seq.k(), 0.0);
    return r;
}

double rule_log_term(const WeightSeq& seq, const SeriesRule& rule, std::int64_t i) {
    std::vector<double> lv(seq.k());
    seq.log_term_at(i, lv);
    double lo = std::numeric_limits<double>::infinity();
    for (int x : rule.min_over) lo = std::min(lo, lv[x] - rule.log_ref[x]);
    double hi = -std::numeric_limits<double>::infinity();
    for (int x : rule.max_over) hi = std::max(hi, lv[x] - rule.log_ref[x]);
    return lo - hi;
}

namespace {

// Eventual (slope, intercept) of min/max over affine-in-i functions. For
// large i the extremum is decided by slope, ties by intercept.
struct AffinePick {
    double slope;
    double intercept;
};

AffinePick eventual_min(const AffineTail& t, int cls, std::span<const int> over,
                        std::span<const double> log_ref) {
    AffinePick best{std::numeric_limits<double>::infinity(),
                    std::numeric_limits<double>::infinity()};
    for (int x : over) {
        const double s = t.slope[cls][x];
        const double a = t.intercept[cls][x] - log_ref[x];
        if (s < best.slope || (s == best.slope && a < best.intercept)) best = {s, a};
    }
    return best;
}

AffinePick eventual_max(const AffineTail& t, int cls, std::span<const int> over,
                        std::span<const double> log_ref) {
    AffinePick best{-std::numeric_limits<double>::infinity(),
                    -std::numeric_limits<double>::infinity()};
    for (int x : over) {
        const double s = t.slope[cls][x];
        const double a = t.intercept[cls][x] - log_ref[x];
        if (s > best.slope || (s == best.slope && a > best.intercept)) best = {s, a};
    }
    return best;
}

// Last index at which any pair of the involved affine functions can swap
// order; beyond it the eventual picks are exact.
std::int64_t crossover_bound(const AffineTail& t, const SeriesRule& rule) {
    double bound = 1.0;
    std::vector<int> all = rule.min_over;
    all.insert(all.end(), rule.max_over.begin(), rule.max_over.end());
    for (int cls = 0; cls < t.period; ++cls) {
        for (std::size_t a = 0; a < all.size(); ++a) {
            for (std::size_t b = a + 1; b < all.size(); ++b) {
                const int x = all[a], y = all[b];
                const double ds = t.slope[cls][x] - t.slope[cls][y];
                if (ds == 0.0) continue;
                const double da = (t.intercept[cls][y] - rule.log_ref[y]) -
                                  (t.intercept[cls][x] - rule.log_ref[x]);
                bound = std::max(bound, da / ds);
            }
        }
    }
    if (!std::isfinite(bound)) return std::numeric_limits<std::int64_t>::max() / 4;
    return static_cast<std::int64_t>(std::ceil(bound)) + 1;
}

// sum_{j=0}^{m-1} exp(alpha + gamma * (i0 + j*p)), linear result (terms <= 1).
double geometric_block_sum(double alpha, double gamma, std::int64_t i0, std::int64_t p,
                           std::int64_t m) {
    if (m <= 0) return 0.0;
    const double first = alpha + gamma * static_cast<double>(i0);
    if (gamma == 0.0) return static_cast<double>(m) * std::exp(first);
    const double step = gamma * static_cast<double>(p);
    // log of (1 - r^m) / (1 - r) with r = e^step < 1.
    const double num = std::log(-std::expm1(step * static_cast<double>(m)));
    const double den = std::log(-std::expm1(step));
    return std::exp(first + num - den);
}

double partial_sum(const WeightSeq& seq, const SeriesRule& rule, std::int64_t n_terms,
                   std::int64_t settled) {
    double s = 0.0;
    const std::int64_t direct = std::min(n_terms, settled);
    for (std::int64_t i = 1; i <= direct; ++i) s += std::exp(rule_log_term(seq, rule, i));
    if (n_terms <= settled) return s;
    const AffineTail& t = *seq.affine_tail();
    for (int cls = 0; cls < t.period; ++cls) {
        // First index > settled congruent to cls (taking cls as i mod period).
        std::int64_t i0 = settled + 1;
        while (static_cast<int>(i0 % t.period) != cls) ++i0;
        if (i0 > n_terms) continue;
        const std::int64_t m = (n_terms - i0) / t.period + 1;
        const AffinePick lo = eventual_min(t, cls, rule.min_over, rule.log_ref);
        const AffinePick hi = eventual_max(t, cls, rule.max_over, rule.log_ref);
        s += geometric_block_sum(lo.intercept - hi.intercept, lo.slope - hi.slope, i0, t.period, m);
    }
    return s;
}

}  // namespace

std::string to_string(TailVerdict v) {
    switch (v) {
        case TailVerdict::DivergesProven:
            return "diverges";
        case TailVerdict::ConvergesProven:
            return "converges";
        case TailVerdict::Unknown:
            return "unknown";
    }
    return "unknown";
}

double series_tail_bound(const WeightSeq& seq, const SeriesRule& rule, std::int64_t n) {
    const std::optional<AffineTail>& affine = seq.affine_tail();
    if (!affine) return std::numeric_limits<double>::infinity();
    const AffineTail& t = *affine;
    std::int64_t settled = std::max<std::int64_t>(t.start, crossover_bound(t, rule));
    settled += t.period - (settled % t.period);
    // Refuse to certify a bound when the closed form only settles after an
    // impractically long prefix; callers treat infinity as "no bound".
    if (settled - n > 10000000) return std::numeric_limits<double>::infinity();
    double bound = 0.0;
    for (std::int64_t i = n + 1; i <= settled; ++i) bound += std::exp(rule_log_term(seq, rule, i));
    const std::int64_t from = std::max(n, settled);
    for (int cls = 0; cls < t.period; ++cls) {
        const AffinePick lo = eventual_min(t, cls, rule.min_over, rule.log_ref);
        const AffinePick hi = eventual_max(t, cls, rule.max_over, rule.log_ref);
        const double gamma = lo.slope - hi.slope;
        if (gamma >= 0.0) return std::numeric_limits<double>::infinity();
        std::int64_t i0 = from + 1;
        while (static_cast<int>(i0 % t.period) != cls) ++i0;
        const double alpha = lo.intercept - hi.intercept;
        const double step = gamma * static_cast<double>(t.period);
        bound += std::exp(alpha + gamma * static_cast<double>(i0) - std::log(-std::expm1(step)));
    }
    return bound;
}

TailClass tail_classify(const WeightSeq& seq, const SeriesRule& rule) {
    if (rule.min_over.empty() || rule.max_over.empty())
        throw unknown_rule_error("tail_classify: rule has empty index sets");
    TailClass out;
    const std::optional<AffineTail>& affine = seq.affine_tail();
    std::int64_t settled = 0;
    if (affine) {
        const AffineTail& t = *affine;
        settled = std::max<std::int64_t>(t.start, crossover_bound(t, rule));
        // Align to a whole number of periods past the crossover.
        settled += t.period - (settled % t.period);
        double worst_gamma = -std::numeric_limits<double>::infinity();
        bool diverges = false;
        for (int cls = 0; cls < t.period; ++cls) {
            const AffinePick lo = eventual_min(t, cls, rule.min_over, rule.log_ref);
            const AffinePick hi = eventual_max(t, cls, rule.max_over, rule.log_ref);
            const double gamma = lo.slope - hi.slope;
            worst_gamma = std::max(worst_gamma, gamma);
            if (gamma >= 0.0) diverges = true;
        }
        if (diverges) {
            out.verdict = TailVerdict::DivergesProven;
            out.evidence = "eventually-constant-positive";
        } else {
            out.verdict = TailVerdict::ConvergesProven;
            std::ostringstream ss;
            ss << "geometric-ratio " << std::exp(worst_gamma);
            out.evidence = ss.str();
        }
    } else {
        out.verdict = TailVerdict::Unknown;
        out.evidence = "no-closed-form";
    }
    if (!affine || settled > 1000000) settled = 1000000;  // partial sums stop at 1e6 anyway
    out.partial_sum_1e2 = partial_sum(seq, rule, 100, settled);
    out.partial_sum_1e4 = partial_sum(seq, rule, 10000, settled);
    out.partial_sum_1e6 = partial_sum(seq, rule, 1000000, settled);
    return out;
}

}  // namespace wexch
