#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "wexch/checks.hpp"
#include "wexch/conditions.hpp"
#include "wexch/core.hpp"
#include "wexch/recovery.hpp"
#include "wexch/sampler.hpp"
#include "wexch/weights.hpp"

namespace wexch {

using ordered_json = nlohmann::ordered_json;

// Shortest round-trip decimal form; identical bytes for identical doubles.
std::string fmt_double(double v);

// FNV-1a over a string, hex-encoded; used as a config fingerprint.
std::string fnv1a_hex(const std::string& payload);

// Probabilities serialize as decimal arrays, never log-space.
ordered_json to_json(const Dist& d);
ordered_json to_json(const Measure& m);
ordered_json to_json(const JointDist& q);
ordered_json to_json(const CheckReport& r);
ordered_json to_json(const TailClass& t);
ordered_json to_json(const GraphGS& g, const Alphabet& alphabet);
ordered_json to_json(const ConditionReport& r, const Alphabet& alphabet);
ordered_json to_json(const EdgeEstimate& e, const Alphabet& alphabet);
ordered_json to_json(const ReconstructedComponent& rc, const Alphabet& alphabet);

// SampleRun text format: a one-line JSON header, then one symbol label per
// line.
std::string write_sample_run(const SampleRun& run, const Alphabet& alphabet,
                             const std::string& spec_hash);
SampleRun read_sample_run(const std::string& text, const Alphabet& alphabet);

}  // namespace wexch
