#pragma once

#include <worksim/json_io.hpp>
#include <worksim/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace worksim {

struct SweepConfig {
  std::string protocol;
  long long n = 0;
  int t = 0;
  std::uint64_t seed_begin = 0;
  std::uint64_t seed_end = 0;  // exclusive
  std::uint64_t p_num = 1;     // per-live-round crash probability, exact
  std::uint64_t p_den = 20;
  int max_crashes = -1;   // -1: the protocol's default budget
  bool deep_check = false;  // record the trace and run the full checkers
};

// Every run is checked against its closed-form bounds and the completion
// rule (and agreement validity for the consensus family); deep_check adds
// the state observers and the structural trace pass.
struct SweepOutcome {
  std::uint64_t seed = 0;
  Metrics metrics;
  bool pass = true;
  std::string violation;  // first failed invariant, empty when pass
};

struct SweepSummary {
  long long runs = 0;
  long long violations = 0;
  bool any_bad = false;
  std::uint64_t first_bad_seed = 0;
  std::string first_violation;
  long long max_work = 0;
  long long max_messages = 0;
  Round max_rounds = 0;
  std::vector<SweepOutcome> outcomes;  // seed order
};

SweepOutcome sweep_one(const SweepConfig& cfg, std::uint64_t seed);

// Serial and parallel walkers return identical summaries; the parallel one
// fans out across threads when built with OpenMP and falls back to the
// serial path otherwise.
SweepSummary sweep_serial(const SweepConfig& cfg);
SweepSummary sweep_parallel(const SweepConfig& cfg);

Json sweep_summary_to_json(const SweepSummary& s, bool include_outcomes);

}  // namespace worksim
