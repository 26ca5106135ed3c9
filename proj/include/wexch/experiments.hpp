#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wexch/sampler.hpp"
#include "wexch/serialize.hpp"

namespace wexch {

inline constexpr const char* kArtifactVersion = "wexch 1.0.0";
inline constexpr int kResultSchemaVersion = 1;

struct config_error : error {
    using error::error;
};

// Experiment configuration: one flat JSON document, schema-validated before
// any computation. Defaults are filled in at parse time so the echoed
// config carries the effective values.
class ExperimentConfig {
  public:
    static ExperimentConfig parse(const std::string& text);
    static ExperimentConfig from_json(ordered_json j);

    const std::string& experiment() const { return experiment_; }
    const ordered_json& echo() const { return json_; }
    std::string hash() const { return fnv1a_hex(json_.dump()); }

    Alphabet alphabet() const;
    WeightSeq weight_seq() const;
    Measure base_measure() const;
    MixtureSpec mixture() const;
    WeightFn lambda_star() const;
    std::vector<std::int64_t> n_grid() const;
    int replicates() const;
    std::vector<std::uint64_t> seeds(std::uint64_t offset) const;
    double tolerance(const std::string& key) const;
    EventSpec event() const;
    std::int64_t truncation() const;
    std::int64_t mc_sequences() const;
    int perm_check_n() const;
    int verify_max_n() const;
    int verify_max_k() const;

  private:
    ordered_json json_;
    std::string experiment_;
};

struct ExperimentResult {
    ordered_json json;
    bool pass = true;
    int exit_code = 0;
    // Extra machine-readable outputs (CSV traces), name -> contents.
    std::vector<std::pair<std::string, std::string>> artifacts;
};

ExperimentResult run_check_conditions(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);
ExperimentResult run_verify(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);
ExperimentResult run_lln(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);
ExperimentResult run_zero_one(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);
ExperimentResult run_recover(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);

// Dispatch on cfg.experiment().
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed_offset = 0);

// Truncated upper bound on sum_{i > n} P(X_i = symbol) under P o lambda;
// infinity when the family admits no convergent envelope.
double marginal_tail_bound(const WeightSeq& lambda, const Measure& p, int symbol,
                           std::int64_t n);

}  // namespace wexch
