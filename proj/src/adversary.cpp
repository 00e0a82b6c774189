#include <worksim/adversary.hpp>

#include <algorithm>
#include <set>

namespace worksim {

ScheduledAdversary::ScheduledAdversary(CrashSchedule schedule,
                                       int num_processes) {
  std::set<ProcessId> seen;
  for (const auto& d : schedule.crashes) {
    if (d.process < 0 || d.process >= num_processes)
      throw ConfigError("crash directive targets process " +
                        std::to_string(d.process) + " outside 0.." +
                        std::to_string(num_processes - 1));
    if (d.round < 1) throw ConfigError("crash round must be >= 1");
    if (!seen.insert(d.process).second)
      throw ConfigError("process " + std::to_string(d.process) +
                        " crashes twice");
    sorted_.push_back(d);
  }
  std::sort(sorted_.begin(), sorted_.end(), [](const auto& a, const auto& b) {
    return a.round != b.round ? a.round < b.round : a.process < b.process;
  });
}

std::vector<CrashDirective> ScheduledAdversary::crashes_for_round(
    const Round& r, const AdversaryContext&) {
  std::vector<CrashDirective> out;
  for (const auto& d : sorted_)
    if (d.round == r) out.push_back(d);
  return out;
}

std::optional<Round> ScheduledAdversary::next_crash_after(const Round& r) const {
  for (const auto& d : sorted_)
    if (d.round > r) return d.round;
  return std::nullopt;
}

std::uint64_t RandomAdversary::threshold(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw ConfigError("probability denominator is zero");
  if (num > den) throw ConfigError("probability above 1");
  if (num == den) return ~0ULL;  // certain crash, first trial succeeds
  unsigned __int128 wide = (static_cast<unsigned __int128>(num) << 64) / den;
  return static_cast<std::uint64_t>(wide);
}

Round RandomAdversary::draw_crash_round(SplitMix64& rng, std::uint64_t thr) {
  if (thr == 0) return Round(-1);  // never crashes
  // Trial r succeeds iff draw < thr; the crash lands on the first success.
  constexpr long long kDrawCap = 10'000'000;
  for (long long r = 1; r <= kDrawCap; ++r)
    if (rng.next() < thr) return Round(r);
  return Round(-1);  // beyond the horizon, treated as no crash
}

RandomAdversary::RandomAdversary(Params params, int num_processes) {
  if (params.max_crashes < 0) throw ConfigError("max_crashes must be >= 0");
  const std::uint64_t thr = threshold(params.p_num, params.p_den);
  SplitMix64 round_rng{params.seed};
  std::vector<Planned> all;
  for (ProcessId p = 0; p < num_processes; ++p) {
    Round r = draw_crash_round(round_rng, thr);
    if (r > 0) all.push_back({r, p});
  }
  std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
    return a.round != b.round ? a.round < b.round : a.process < b.process;
  });
  if (static_cast<long long>(all.size()) > params.max_crashes)
    all.resize(params.max_crashes);
  planned_ = std::move(all);
  subset_rng_.state = params.seed ^ 0xa5a5a5a5a5a5a5a5ULL;
}

std::vector<CrashDirective> RandomAdversary::crashes_for_round(
    const Round& r, const AdversaryContext& ctx) {
  std::vector<CrashDirective> out;
  for (const auto& plan : planned_) {
    if (plan.round != r) continue;
    CrashDirective d;
    d.process = plan.process;
    d.round = r;
    d.pre_action = false;
    const std::size_t batch = ctx.batch_size(plan.process);
    d.subset.kind = SubsetSelector::Kind::Prefix;
    d.subset.prefix_len =
        static_cast<long long>(subset_rng_.next() % (batch + 1));
    out.push_back(std::move(d));
  }
  return out;
}

std::optional<Round> RandomAdversary::next_crash_after(const Round& r) const {
  for (const auto& plan : planned_)
    if (plan.round > r) return plan.round;
  return std::nullopt;
}

}  // namespace worksim
