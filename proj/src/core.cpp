#include "wexch/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace wexch {

Alphabet::Alphabet(int k) : k_(k) {
    if (k < 1) throw invalid_argument_error("Alphabet: size must be >= 1");
    labels_.reserve(k);
    for (int x = 0; x < k; ++x) labels_.push_back(std::to_string(x));
}

Alphabet::Alphabet(int k, std::vector<std::string> labels) : k_(k), labels_(std::move(labels)) {
    if (k < 1) throw invalid_argument_error("Alphabet: size must be >= 1");
    if (static_cast<int>(labels_.size()) != k)
        throw invalid_argument_error("Alphabet: need exactly K labels");
    std::set<std::string> uniq(labels_.begin(), labels_.end());
    if (static_cast<int>(uniq.size()) != k)
        throw invalid_argument_error("Alphabet: labels must be distinct");
}

Measure::Measure(Alphabet alphabet, std::vector<double> mass) : alphabet_(std::move(alphabet)) {
    if (static_cast<int>(mass.size()) != alphabet_.size())
        throw alphabet_mismatch_error("Measure: size mismatch");
    mass_.reserve(mass.size());
    for (double v : mass) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw invalid_argument_error("Measure: entries must be finite and >= 0");
        mass_.push_back(LogReal::from_linear(v));
    }
}

Measure Measure::from_log(Alphabet alphabet, std::vector<LogReal> mass) {
    Measure m(std::move(alphabet));
    if (static_cast<int>(mass.size()) != m.alphabet_.size())
        throw alphabet_mismatch_error("Measure: size mismatch");
    for (const LogReal& v : mass)
        if (!v.zero && !std::isfinite(v.lg))
            throw invalid_argument_error("Measure: log mass must be finite");
    m.mass_ = std::move(mass);
    return m;
}

LogReal Measure::total() const { return sum(std::span<const LogReal>(mass_)); }

std::vector<double> Measure::linear() const {
    std::vector<double> out;
    out.reserve(mass_.size());
    for (const LogReal& v : mass_) out.push_back(v.linear());
    return out;
}

Dist::Dist(Alphabet alphabet, std::vector<double> probs) : alphabet_(std::move(alphabet)) {
    if (static_cast<int>(probs.size()) != alphabet_.size())
        throw alphabet_mismatch_error("Dist: size mismatch");
    double total = 0.0;
    probs_.reserve(probs.size());
    for (double v : probs) {
        if (!(v >= 0.0) || !std::isfinite(v))
            throw invalid_argument_error("Dist: entries must be finite and >= 0");
        total += v;
        probs_.push_back(LogReal::from_linear(v));
    }
    if (std::abs(total - 1.0) > kNormTol)
        throw invalid_argument_error("Dist: probabilities must sum to 1 within 1e-12");
}

Dist Dist::from_log(Alphabet alphabet, std::vector<LogReal> probs) {
    Dist d(std::move(alphabet));
    if (static_cast<int>(probs.size()) != d.alphabet_.size())
        throw alphabet_mismatch_error("Dist: size mismatch");
    LogReal total = sum(std::span<const LogReal>(probs));
    if (total.zero || std::abs(std::expm1(total.lg)) > kNormTol)
        throw invalid_argument_error("Dist: probabilities must sum to 1 within 1e-12");
    d.probs_ = std::move(probs);
    return d;
}

Dist Dist::normalized(Alphabet alphabet, std::vector<LogReal> mass) {
    LogReal total = sum(std::span<const LogReal>(mass));
    if (total.zero) throw zero_mass_error("Dist::normalized: total mass is zero");
    for (LogReal& v : mass)
        if (!v.zero) v.lg -= total.lg;
    Dist d(std::move(alphabet));
    d.probs_ = std::move(mass);
    return d;
}

Dist Dist::point_mass(Alphabet alphabet, int x) {
    if (x < 0 || x >= alphabet.size()) throw bad_index_error("point_mass: symbol out of range");
    std::vector<LogReal> p(alphabet.size());
    p[x] = LogReal::one();
    Dist d(std::move(alphabet));
    d.probs_ = std::move(p);
    return d;
}

std::vector<double> Dist::linear() const {
    std::vector<double> out;
    out.reserve(probs_.size());
    for (const LogReal& v : probs_) out.push_back(v.linear());
    return out;
}

Measure Dist::as_measure() const {
    std::vector<LogReal> m = probs_;
    return Measure::from_log(alphabet_, std::move(m));
}

std::uint64_t JointDist::table_entries_or_throw(int k, int n) {
    if (n < 1) throw invalid_argument_error("JointDist: n must be >= 1");
    std::uint64_t size = 1;
    for (int t = 0; t < n; ++t) {
        size *= static_cast<std::uint64_t>(k);
        if (size > kMaxTable)
            throw too_large_error("JointDist: K^n exceeds the 2^24 enumeration cap");
    }
    return size;
}

JointDist::JointDist(Alphabet alphabet, int n, std::vector<LogReal> table, bool validate)
    : alphabet_(std::move(alphabet)), n_(n), table_(std::move(table)) {
    const std::uint64_t expect = table_entries_or_throw(alphabet_.size(), n);
    if (table_.size() != expect) throw invalid_argument_error("JointDist: table size mismatch");
    if (validate) {
        LogReal t = total();
        if (t.zero || std::abs(std::expm1(t.lg)) > kNormTol)
            throw invalid_argument_error("JointDist: table must sum to 1 within 1e-10");
    }
}

std::uint64_t JointDist::index_of(std::span<const int> tuple) const {
    if (static_cast<int>(tuple.size()) != n_) throw bad_index_error("JointDist: tuple length");
    std::uint64_t idx = 0;
    for (int t = 0; t < n_; ++t) {
        const int x = tuple[t];
        if (x < 0 || x >= k()) throw bad_index_error("JointDist: symbol out of range");
        idx = idx * static_cast<std::uint64_t>(k()) + static_cast<std::uint64_t>(x);
    }
    return idx;
}

std::vector<int> JointDist::tuple_of(std::uint64_t idx) const {
    std::vector<int> out(n_);
    decode(idx, out);
    return out;
}

void JointDist::decode(std::uint64_t idx, std::span<int> out) const {
    for (int t = n_ - 1; t >= 0; --t) {
        out[t] = static_cast<int>(idx % static_cast<std::uint64_t>(k()));
        idx /= static_cast<std::uint64_t>(k());
    }
}

LogReal JointDist::total() const { return sum(std::span<const LogReal>(table_)); }

bool EventSpec::evaluate(std::span<const int> prefix) const {
    std::int64_t c = 0;
    for (int x : prefix)
        if (x == symbol) ++c;
    switch (kind) {
        case Kind::CountOfSymbolEquals:
            return c == count;
        case Kind::CountOfSymbolAtLeast:
            return c >= count;
    }
    return false;
}

Dist reweight(const Measure& p, std::span<const double> w_linear) {
    std::vector<double> wl(w_linear.size());
    for (std::size_t i = 0; i < w_linear.size(); ++i) {
        if (!(w_linear[i] > 0.0))
            throw non_positive_weight_error("reweight: weights must be strictly positive");
        wl[i] = std::log(w_linear[i]);
    }
    return reweight_log(p, wl);
}

Dist reweight_log(const Measure& p, std::span<const double> w_log) {
    if (static_cast<int>(w_log.size()) != p.size())
        throw alphabet_mismatch_error("reweight: weight size mismatch");
    for (double lw : w_log)
        if (!std::isfinite(lw))
            throw non_positive_weight_error("reweight: weights must be strictly positive");
    // Normalize relative to the max log mass; a uniform shift of the input
    // logs then cancels before any transcendental call.
    std::vector<LogReal> mass(p.size());
    double m = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int x = 0; x < p.size(); ++x) {
        if (p.at(x).zero) continue;
        mass[x] = LogReal::from_log(p.at(x).lg + w_log[x]);
        m = std::max(m, mass[x].lg);
        any = true;
    }
    if (!any) throw zero_mass_error("reweight: sum of w(x) P(x) is zero");
    double rel_sum = 0.0;
    for (const LogReal& v : mass)
        if (!v.zero) rel_sum += std::exp(v.lg - m);
    const double rel_denom = std::log(rel_sum);
    for (LogReal& v : mass)
        if (!v.zero) v.lg = (v.lg - m) - rel_denom;
    return Dist::from_log(p.alphabet(), std::move(mass));
}

JointDist marginalize(const JointDist& q, int m) {
    if (m < 1 || m > q.n()) throw bad_index_error("marginalize: m out of range");
    if (m == q.n()) return q;
    std::uint64_t suffix = 1;
    for (int t = m; t < q.n(); ++t) suffix *= static_cast<std::uint64_t>(q.k());
    const std::uint64_t out_size = q.table_size() / suffix;
    std::vector<LogAccumulator> acc(out_size);
    std::vector<bool> any(out_size, false);
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
        const LogReal& v = q.at(idx);
        if (v.zero) continue;
        acc[idx / suffix].add_log(v.lg);
        any[idx / suffix] = true;
    }
    std::vector<LogReal> table(out_size);
    for (std::uint64_t i = 0; i < out_size; ++i)
        if (any[i]) table[i] = LogReal::from_log(acc[i].log_value());
    return JointDist(q.alphabet(), m, std::move(table));
}

Dist marginal_of_coordinate(const JointDist& q, int i) {
    if (i < 1 || i > q.n()) throw bad_index_error("marginal_of_coordinate: index out of range");
    std::vector<LogAccumulator> acc(q.k());
    std::vector<bool> any(q.k(), false);
    std::vector<int> tuple(q.n());
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
        const LogReal& v = q.at(idx);
        if (v.zero) continue;
        q.decode(idx, tuple);
        acc[tuple[i - 1]].add_log(v.lg);
        any[tuple[i - 1]] = true;
    }
    std::vector<LogReal> probs(q.k());
    for (int x = 0; x < q.k(); ++x)
        if (any[x]) probs[x] = LogReal::from_log(acc[x].log_value());
    return Dist::normalized(q.alphabet(), std::move(probs));
}

double total_variation(const Dist& p, const Dist& r) {
    if (!(p.alphabet() == r.alphabet()))
        throw alphabet_mismatch_error("total_variation: alphabets differ");
    double s = 0.0;
    for (int x = 0; x < p.size(); ++x) s += std::abs(p.prob(x) - r.prob(x));
    return 0.5 * s;
}

}  // namespace wexch
