#include "wexch/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace wexch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Log of bar Q(x) = Q(x) / prod_t lambda_t(x_t); nullopt encodes exact zero.
std::vector<std::optional<double>> bar_table(const JointDist& q, const WeightSeq& lambda) {
    const int n = q.n();
    std::vector<std::vector<double>> lw(n, std::vector<double>(q.k()));
    for (int t = 0; t < n; ++t) lambda.log_term_at(t + 1, lw[t]);
    std::vector<std::optional<double>> bar(q.table_size());
    std::vector<int> tuple(n);
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
        const LogReal& v = q.at(idx);
        if (v.zero) continue;
        q.decode(idx, tuple);
        double lg = v.lg;
        for (int t = 0; t < n; ++t) lg -= lw[t][tuple[t]];
        bar[idx] = lg;
    }
    return bar;
}

std::uint64_t swap_index(const JointDist& q, std::uint64_t idx, int a, int b,
                         std::vector<int>& scratch) {
    q.decode(idx, scratch);
    std::swap(scratch[a], scratch[b]);
    return q.index_of(scratch);
}

void record_violation(CheckReport& rep, double viol, const JointDist& q, std::uint64_t idx,
                      int a, int b) {
    if (viol > rep.max_violation) {
        rep.max_violation = viol;
        rep.witness_tuple = q.tuple_of(idx);
        rep.witness_swap = {a + 1, b + 1};
    }
}

}  // namespace

CheckReport is_exchangeable(const JointDist& q, double tol) {
    CheckReport rep;
    rep.tolerance = tol;
    std::vector<int> scratch(q.n());
    for (int t = 0; t + 1 < q.n(); ++t) {
        for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
            const std::uint64_t jdx = swap_index(q, idx, t, t + 1, scratch);
            if (jdx < idx) continue;
            const double diff = std::abs(q.at(idx).linear() - q.at(jdx).linear());
            record_violation(rep, diff, q, idx, t, t + 1);
        }
    }
    rep.pass = rep.max_violation <= tol;
    rep.detail = "adjacent-transposition invariance of Q";
    return rep;
}

CheckReport is_weighted_exchangeable(const JointDist& q, const WeightSeq& lambda, double tol) {
    if (!(q.alphabet() == lambda.alphabet()))
        throw alphabet_mismatch_error("is_weighted_exchangeable: alphabets differ");
    CheckReport rep;
    rep.tolerance = tol;
    const auto bar = bar_table(q, lambda);
    std::vector<int> scratch(q.n());
    for (int t = 0; t + 1 < q.n(); ++t) {
        for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
            const std::uint64_t jdx = swap_index(q, idx, t, t + 1, scratch);
            if (jdx < idx) continue;
            const bool za = !bar[idx].has_value();
            const bool zb = !bar[jdx].has_value();
            double viol = 0.0;
            if (za != zb)
                viol = kInf;
            else if (!za)
                viol = std::abs(*bar[idx] - *bar[jdx]);
            record_violation(rep, viol, q, idx, t, t + 1);
        }
    }
    rep.pass = rep.max_violation <= tol;
    rep.detail = "adjacent-transposition symmetry of bar Q (log-space)";
    return rep;
}

CheckReport weighted_swap_check(const JointDist& q, const WeightSeq& lambda, int i, int j,
                                double tol) {
    if (!(q.alphabet() == lambda.alphabet()))
        throw alphabet_mismatch_error("weighted_swap_check: alphabets differ");
    if (i < 1 || j < 1 || i >= j || j > q.n())
        throw bad_index_error("weighted_swap_check: need 1 <= i < j <= n");
    CheckReport rep;
    rep.tolerance = tol;
    const int a = i - 1, b = j - 1;
    std::vector<double> lwi(q.k()), lwj(q.k());
    lambda.log_term_at(i, lwi);
    lambda.log_term_at(j, lwj);
    std::vector<int> tuple(q.n());
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
        q.decode(idx, tuple);
        const int xa = tuple[a], xb = tuple[b];
        std::swap(tuple[a], tuple[b]);
        const std::uint64_t jdx = q.index_of(tuple);
        std::swap(tuple[a], tuple[b]);
        if (jdx < idx) continue;
        // E[1{X = t} / (l_i l_j)] vs E[1{X^{ij} = t} / (l_i l_j)], in logs.
        const bool za = q.at(idx).zero;
        const bool zb = q.at(jdx).zero;
        double viol = 0.0;
        if (za != zb) {
            viol = kInf;
        } else if (!za) {
            const double lhs = q.at(idx).lg - lwi[xa] - lwj[xb];
            const double rhs = q.at(jdx).lg - lwi[xb] - lwj[xa];
            viol = std::abs(lhs - rhs);
        }
        record_violation(rep, viol, q, idx, a, b);
    }
    rep.pass = rep.max_violation <= tol;
    rep.detail = "weighted swap identity for one coordinate pair";
    return rep;
}

CheckReport weighted_swap_check_all_pairs(const JointDist& q, const WeightSeq& lambda,
                                          double tol) {
    CheckReport rep;
    rep.tolerance = tol;
    for (int i = 1; i <= q.n(); ++i) {
        for (int j = i + 1; j <= q.n(); ++j) {
            CheckReport one = weighted_swap_check(q, lambda, i, j, tol);
            if (one.max_violation > rep.max_violation) {
                rep.max_violation = one.max_violation;
                rep.witness_tuple = one.witness_tuple;
                rep.witness_swap = one.witness_swap;
            }
        }
    }
    rep.pass = rep.max_violation <= tol;
    rep.detail = "weighted swap identity over all pairs";
    return rep;
}

CheckReport conditional_law_check(const JointDist& q, const WeightSeq& lambda, int i, int m,
                                  double tol) {
    if (!(q.alphabet() == lambda.alphabet()))
        throw alphabet_mismatch_error("conditional_law_check: alphabets differ");
    if (i < 1 || m < i || m > q.n())
        throw bad_index_error("conditional_law_check: need 1 <= i <= m <= n");
    if (m > LogMatrix::kMaxCondTable)
        throw too_large_error("conditional_law_check: m exceeds the permanent cap");
    CheckReport rep;
    rep.tolerance = tol;

    // Atom key: sorted first-m symbols plus the exact tail.
    struct Atom {
        LogAccumulator total;
        std::vector<LogAccumulator> by_symbol;
        std::vector<bool> any;
        std::uint64_t sample_idx = 0;
    };
    std::map<std::vector<int>, Atom> atoms;
    std::vector<int> tuple(q.n());
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
        const LogReal& v = q.at(idx);
        if (v.zero) continue;
        q.decode(idx, tuple);
        std::vector<int> key(tuple.begin(), tuple.end());
        std::sort(key.begin(), key.begin() + m);
        auto [it, fresh] = atoms.try_emplace(std::move(key));
        Atom& atom = it->second;
        if (fresh) {
            atom.by_symbol.resize(q.k());
            atom.any.assign(q.k(), false);
            atom.sample_idx = idx;
        }
        atom.total.add_log(v.lg);
        atom.by_symbol[tuple[i - 1]].add_log(v.lg);
        atom.any[tuple[i - 1]] = true;
    }

    std::vector<WeightFn> lambdas;
    lambdas.reserve(m);
    for (int t = 1; t <= m; ++t) lambdas.push_back(lambda.term_at(t));

    for (const auto& [key, atom] : atoms) {
        const std::vector<int> rep_sorted(key.begin(), key.begin() + m);
        const Dist predicted =
            weighted_empirical_perm(lambdas, rep_sorted, i, q.alphabet());
        // Representative choice must not matter; check a second ordering.
        std::vector<int> rep_rev(rep_sorted.rbegin(), rep_sorted.rend());
        const Dist predicted_rev = weighted_empirical_perm(lambdas, rep_rev, i, q.alphabet());
        for (int x = 0; x < q.k(); ++x) {
            if (std::abs(predicted.prob(x) - predicted_rev.prob(x)) > 1e-10)
                throw error("conditional_law_check: representative ordering changed the result");
            const double exact =
                atom.any[x] ? std::exp(atom.by_symbol[x].log_value() - atom.total.log_value())
                            : 0.0;
            const double viol = std::abs(exact - predicted.prob(x));
            if (viol > rep.max_violation) {
                rep.max_violation = viol;
                rep.witness_tuple = q.tuple_of(atom.sample_idx);
                rep.witness_swap = {i, m};
            }
        }
    }
    rep.pass = rep.max_violation <= tol;
    rep.detail = "conditional law of X_i given E_m vs permanent weights";
    return rep;
}

FactorResult factor_as_weighted_iid(const JointDist& q, const WeightSeq& lambda, double tol) {
    if (!(q.alphabet() == lambda.alphabet()))
        throw alphabet_mismatch_error("factor_as_weighted_iid: alphabets differ");
    FactorResult res;
    const int n = q.n();
    std::vector<Dist> marginals;
    marginals.reserve(n);
    for (int t = 1; t <= n; ++t) marginals.push_back(marginal_of_coordinate(q, t));

    // Product test.
    std::vector<int> tuple(n);
    for (std::uint64_t idx = 0; idx < q.table_size(); ++idx) {
        q.decode(idx, tuple);
        double prod = 1.0;
        for (int t = 0; t < n; ++t) prod *= marginals[t].prob(tuple[t]);
        res.max_violation = std::max(res.max_violation, std::abs(prod - q.at(idx).linear()));
    }
    if (res.max_violation > tol) {
        res.detail = "not a product distribution";
        return res;
    }

    // Common base candidate P ~ q_1 / lambda_1.
    std::vector<double> lw1(q.k());
    lambda.log_term_at(1, lw1);
    std::vector<LogReal> cand(q.k());
    for (int x = 0; x < q.k(); ++x) {
        const LogReal& v = marginals[0].at(x);
        if (!v.zero) cand[x] = LogReal::from_log(v.lg - lw1[x]);
    }
    Dist p = Dist::normalized(q.alphabet(), std::move(cand));
    const Measure pm = p.as_measure();

    std::vector<double> lwt(q.k());
    for (int t = 1; t <= n; ++t) {
        lambda.log_term_at(t, lwt);
        const Dist expected = reweight_log(pm, lwt);
        const double tv = total_variation(expected, marginals[t - 1]);
        res.max_violation = std::max(res.max_violation, tv);
    }
    if (res.max_violation > tol) {
        res.detail = "marginals are not reweightings of a common base";
        return res;
    }
    res.base = pm;
    res.detail = "factors as a weighted product";
    return res;
}

}  // namespace wexch
