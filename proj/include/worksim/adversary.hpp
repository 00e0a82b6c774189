#pragma once

#include <worksim/types.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace worksim {

struct SplitMix64 {
  std::uint64_t state = 0;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
};

// What an adversary may inspect when deciding the current round's crashes.
struct AdversaryContext {
  virtual ~AdversaryContext() = default;
  virtual std::size_t batch_size(ProcessId p) const = 0;  // outgoing envelopes
  virtual Mode mode(ProcessId p) const = 0;
};

class Adversary {
 public:
  virtual ~Adversary() = default;
  // Directives whose round equals r, sorted by process id.
  virtual std::vector<CrashDirective> crashes_for_round(
      const Round& r, const AdversaryContext& ctx) = 0;
  // Smallest round > r at which this adversary could still act. Keeps
  // fast-forward sound: the engine never skips past a scheduled crash.
  virtual std::optional<Round> next_crash_after(const Round& r) const = 0;
};

class NullAdversary final : public Adversary {
 public:
  std::vector<CrashDirective> crashes_for_round(const Round&,
                                                const AdversaryContext&) override {
    return {};
  }
  std::optional<Round> next_crash_after(const Round&) const override {
    return std::nullopt;
  }
};

class ScheduledAdversary final : public Adversary {
 public:
  ScheduledAdversary(CrashSchedule schedule, int num_processes);
  std::vector<CrashDirective> crashes_for_round(
      const Round& r, const AdversaryContext& ctx) override;
  std::optional<Round> next_crash_after(const Round& r) const override;

 private:
  std::vector<CrashDirective> sorted_;  // by (round, process)
};

// Crash rounds are drawn up front, one geometric draw per process, so the
// realized schedule is identical whether the engine steps every round or
// skips idle stretches. Distribution matches per-round coin flips with the
// same success probability. Crashes are post-action; the delivered subset is
// a uniformly drawn prefix of the victim's outgoing batch.
class RandomAdversary final : public Adversary {
 public:
  struct Params {
    std::uint64_t seed = 0;
    std::uint64_t p_num = 0;  // crash probability per live round, exact rational
    std::uint64_t p_den = 1;
    int max_crashes = 0;
  };
  RandomAdversary(Params params, int num_processes);

  std::vector<CrashDirective> crashes_for_round(
      const Round& r, const AdversaryContext& ctx) override;
  std::optional<Round> next_crash_after(const Round& r) const override;

  // Exposed for distribution tests.
  static Round draw_crash_round(SplitMix64& rng, std::uint64_t thr);
  static std::uint64_t threshold(std::uint64_t num, std::uint64_t den);

 private:
  struct Planned {
    Round round;
    ProcessId process;
  };
  std::vector<Planned> planned_;  // sorted by (round, process)
  SplitMix64 subset_rng_;
};

}  // namespace worksim
