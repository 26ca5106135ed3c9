#include "wexch/sampler.hpp"

#include <cmath>

namespace wexch {

MixtureSpec::MixtureSpec(std::vector<Component> components) : components_(std::move(components)) {
    if (components_.empty()) throw invalid_argument_error("MixtureSpec: no components");
    double total = 0.0;
    for (const Component& c : components_) {
        if (!(c.base.alphabet() == components_.front().base.alphabet()))
            throw alphabet_mismatch_error("MixtureSpec: alphabets differ");
        if (c.base.total().zero)
            throw zero_mass_error("MixtureSpec: base measure has zero mass");
        if (!(c.prob >= 0.0)) throw invalid_argument_error("MixtureSpec: negative probability");
        total += c.prob;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw invalid_argument_error("MixtureSpec: component probabilities must sum to 1");
}

namespace {

int draw_from(const Dist& d, RandomSource& rng) {
    const std::vector<double> p = d.linear();
    double cum = 0.0;
    const double u = rng.uniform();
    for (int x = 0; x + 1 < d.size(); ++x) {
        cum += p[x];
        if (u < cum) return x;
    }
    return d.size() - 1;
}

}  // namespace

SampleRun sample_weighted_iid(const Measure& p, const WeightSeq& lambda, int n,
                              std::uint64_t seed) {
    if (n < 1) throw invalid_argument_error("sample_weighted_iid: n must be >= 1");
    if (!(p.alphabet() == lambda.alphabet()))
        throw alphabet_mismatch_error("sample_weighted_iid: alphabets differ");
    SampleRun run;
    run.seed = seed;
    run.symbols.resize(n);
    std::vector<double> lw(p.size());
    for (int i = 1; i <= n; ++i) {
        lambda.log_term_at(i, lw);
        const Dist d = reweight_log(p, lw);
        RandomSource rng(seed, static_cast<std::uint64_t>(i));
        run.symbols[i - 1] = draw_from(d, rng);
    }
    return run;
}

SampleRun sample_mixture(const MixtureSpec& mu, const WeightSeq& lambda, int n,
                         std::uint64_t seed) {
    RandomSource rng(seed, 0);
    const double u = rng.uniform();
    double cum = 0.0;
    int pick = mu.size() - 1;
    for (int c = 0; c + 1 < mu.size(); ++c) {
        cum += mu.components()[c].prob;
        if (u < cum) {
            pick = c;
            break;
        }
    }
    SampleRun run = sample_weighted_iid(mu.components()[pick].base, lambda, n, seed);
    run.drawn_component = pick;
    return run;
}

JointDist exact_joint_weighted_iid(const Measure& p, const WeightSeq& lambda, int n) {
    if (!(p.alphabet() == lambda.alphabet()))
        throw alphabet_mismatch_error("exact_joint_weighted_iid: alphabets differ");
    const int k = p.size();
    const std::uint64_t size = JointDist::table_entries_or_throw(k, n);
    std::vector<Dist> marginals;
    marginals.reserve(n);
    std::vector<double> lw(k);
    for (int i = 1; i <= n; ++i) {
        lambda.log_term_at(i, lw);
        marginals.push_back(reweight_log(p, lw));
    }
    std::vector<LogReal> table(size);
    std::vector<int> tuple(n, 0);
    for (std::uint64_t idx = 0; idx < size; ++idx) {
        LogReal v = LogReal::one();
        for (int t = 0; t < n; ++t) v = v * marginals[t].at(tuple[t]);
        table[idx] = v;
        for (int t = n - 1; t >= 0; --t) {
            if (++tuple[t] < k) break;
            tuple[t] = 0;
        }
    }
    return JointDist(p.alphabet(), n, std::move(table));
}

JointDist exact_joint_mixture(const MixtureSpec& mu, const WeightSeq& lambda, int n) {
    const std::uint64_t size = JointDist::table_entries_or_throw(mu.alphabet().size(), n);
    std::vector<LogAccumulator> acc(size);
    std::vector<bool> any(size, false);
    for (const MixtureSpec::Component& c : mu.components()) {
        if (c.prob == 0.0) continue;
        const JointDist j = exact_joint_weighted_iid(c.base, lambda, n);
        const double lp = std::log(c.prob);
        for (std::uint64_t idx = 0; idx < size; ++idx) {
            if (j.at(idx).zero) continue;
            acc[idx].add_log(lp + j.at(idx).lg);
            any[idx] = true;
        }
    }
    std::vector<LogReal> table(size);
    for (std::uint64_t idx = 0; idx < size; ++idx)
        if (any[idx]) table[idx] = LogReal::from_log(acc[idx].log_value());
    return JointDist(mu.alphabet(), n, std::move(table));
}

JointDist example1_joint(int n) {
    const Alphabet binary(2);
    const std::uint64_t size = JointDist::table_entries_or_throw(2, n);
    std::vector<LogReal> table(size);
    constexpr double kLog2 = 0.6931471805599453094;
    // e_i (single 1 at position i) has flat index 2^(n-i).
    for (int i = 1; i <= n; ++i) {
        const std::uint64_t idx = std::uint64_t{1} << (n - i);
        table[idx] = LogReal::from_log(-static_cast<double>(i) * kLog2);
    }
    // All tails with zeros in the first n positions collapse onto the
    // all-zeros prefix: sum_{i > n} 2^-i = 2^-n.
    table[0] = LogReal::from_log(-static_cast<double>(n) * kLog2);
    return JointDist(binary, n, std::move(table));
}

SampleRun example1_sample(int n, std::uint64_t seed) {
    if (n < 1) throw invalid_argument_error("example1_sample: n must be >= 1");
    RandomSource rng(seed, 0);
    const int latent = rng.geometric_half();
    SampleRun run;
    run.seed = seed;
    run.symbols.assign(n, 0);
    if (latent <= n) run.symbols[latent - 1] = 1;
    return run;
}

}  // namespace wexch
