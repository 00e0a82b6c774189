#include <worksim/enumerate.hpp>

#include <worksim/adversary.hpp>
#include <worksim/bounds.hpp>
#include <worksim/checker.hpp>
#include <worksim/engine.hpp>
#include <worksim/protocols.hpp>

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>
#include <sstream>
#include <vector>

namespace worksim {
namespace {

// Counting saturates here; the walkers refuse anything over their cap long
// before exact values matter.
constexpr unsigned long long kCountCeil = 1'000'000'000'000'000'000ULL;

unsigned long long sat_add(unsigned long long a, unsigned long long b) {
  return (b > kCountCeil - a) ? kCountCeil : a + b;
}

unsigned long long sat_mul(unsigned long long a, unsigned long long b) {
  if (a == 0 || b == 0) return 0;
  return (a > kCountCeil / b) ? kCountCeil : a * b;
}

unsigned long long sat_pow(unsigned long long x, int k) {
  unsigned long long r = 1;
  for (int i = 0; i < k; ++i) r = sat_mul(r, x);
  return r;
}

unsigned long long choose_sat(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  unsigned long long r = 1;
  for (int i = 1; i <= k; ++i) {
    if (r >= kCountCeil) return kCountCeil;
    // exact at every step: r * (n-k+i) is divisible by i
    r = r * static_cast<unsigned long long>(n - k + i) /
        static_cast<unsigned long long>(i);
  }
  return std::min(r, kCountCeil);
}

int isqrt_int(int v) {
  int r = static_cast<int>(std::llround(std::sqrt(static_cast<double>(v))));
  while (r > 0 && r * r > v) --r;
  while ((r + 1) * (r + 1) <= v) ++r;
  return r;
}

// Deepest prefix cut worth probing: the largest batch the protocol sends in
// one shot. Polling protocols only ever unicast, so 0/1 plus full covers
// their entire subset space exactly.
int batch_depth(const std::string& name, int t) {
  if (name == "a" || name == "b") return isqrt_int(t);
  if (name == "c" || name == "c-batched") return 1;
  if (name == "naive-all") return 0;
  return std::max(t - 1, 0);
}

SubsetSelector selector_at(const EnumerationSpace& space, int j) {
  SubsetSelector s;
  if (j < space.batch_depth) {
    s.kind = SubsetSelector::Kind::Prefix;
    s.prefix_len = j;
  } else if (j == space.batch_depth) {
    s.kind = SubsetSelector::Kind::Full;
  } else {
    // second envelope alone; prefixes already cover the other subsets of a
    // two-envelope batch
    s.kind = SubsetSelector::Kind::Mask;
    s.mask_bits = 2;
  }
  return s;
}

// Lexicographically c-th k-subset of {0..n-1}.
std::vector<int> unrank_combo(int n, int k, unsigned long long c) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(k));
  int v = 0;
  for (int slot = k; slot >= 1; --slot) {
    for (;; ++v) {
      unsigned long long block = choose_sat(n - 1 - v, slot - 1);
      if (c < block) {
        out.push_back(v++);
        break;
      }
      c -= block;
    }
  }
  return out;
}

bool run_one(const EnumerationSpace& space, unsigned long long index,
             std::string* violation, bool* redundant) {
  try {
    auto proto = make_protocol(space.protocol, space.n, space.t);
    ScheduledAdversary adv(schedule_at(space, index),
                           proto->num_processes());
    RunParams params;
    params.record_trace = true;
    Engine eng(*proto, adv, params);
    auto observers = invariant_observers(*proto);
    for (auto& o : observers) eng.add_observer(o.get());
    RunResult rr = eng.run();
    *redundant = rr.metrics.work_redundant > 0;
    if (!rr.verdict.pass) {
      *violation = rr.verdict.violations.front().invariant + ": " +
                   rr.verdict.violations.front().detail;
      return false;
    }
    Verdict sv = check_structure(rr.trace);
    if (!sv.pass) {
      *violation = sv.violations.front().invariant + ": " +
                   sv.violations.front().detail;
      return false;
    }
    return true;
  } catch (const std::exception& e) {
    *violation = std::string("exception: ") + e.what();
    return false;
  }
}

EnumerationReport walk(const std::string& protocol, long long n, int t,
                       const Granularity& g, unsigned long long cap,
                       bool parallel) {
  EnumerationReport report;
  report.space = enumeration_space(protocol, n, t, g);
  if (report.space.size > cap) {
    std::ostringstream os;
    os << "enumeration space has ";
    if (report.space.size >= kCountCeil)
      os << "at least " << kCountCeil;
    else
      os << report.space.size;
    os << " schedules, over the cap of " << cap;
    throw ConfigError(os.str());
  }
  const unsigned long long count = report.space.size;
  std::vector<unsigned char> bad(count, 0);
  std::vector<unsigned char> red(count, 0);
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < static_cast<long long>(count); ++i) {
      std::string msg;
      bool r = false;
      bad[static_cast<std::size_t>(i)] =
          run_one(report.space, static_cast<unsigned long long>(i), &msg, &r)
              ? 0
              : 1;
      red[static_cast<std::size_t>(i)] = r ? 1 : 0;
    }
#else
    parallel = false;
#endif
  }
  if (!parallel) {
    for (unsigned long long i = 0; i < count; ++i) {
      std::string msg;
      bool r = false;
      bad[i] = run_one(report.space, i, &msg, &r) ? 0 : 1;
      red[i] = r ? 1 : 0;
    }
  }
  report.checked = count;
  for (unsigned long long i = 0; i < count; ++i) {
    if (red[i]) report.redundant_work_seen = true;
    if (bad[i]) {
      if (report.failures == 0) report.first_bad_index = i;
      ++report.failures;
    }
  }
  if (report.failures > 0) {
    bool r = false;
    run_one(report.space, report.first_bad_index, &report.first_violation,
            &r);
  }
  return report;
}

}  // namespace

EnumerationSpace enumeration_space(const std::string& protocol, long long n,
                                   int t, const Granularity& g) {
  auto proto = make_protocol(protocol, n, t);
  EnumerationSpace s;
  s.protocol = protocol;
  s.n = n;
  s.t = t;
  s.processes = proto->num_processes();
  if (g.stride < 1) throw ConfigError("stride must be positive");
  s.stride = g.stride;
  s.max_crashes = g.max_crashes >= 0
                      ? g.max_crashes
                      : std::min(default_crash_budget(protocol, t), 2);
  if (s.max_crashes > s.processes)
    throw ConfigError("more crashes than processes");
  s.round_limit =
      g.round_limit > 0
          ? g.round_limit
          : bound_for(protocol, n, t, s.max_crashes, false).rounds;
  if (s.round_limit < 1) throw ConfigError("round limit must be positive");
  Round cand = (s.round_limit - 1) / s.stride + 1;
  s.candidates = cand > Round(kCountCeil)
                     ? kCountCeil
                     : static_cast<unsigned long long>(cand);
  s.batch_depth = batch_depth(protocol, t);
  if (g.subset_policy == "prefix")
    s.selectors = s.batch_depth + 1;
  else if (g.subset_policy == "small-all")
    s.selectors = s.batch_depth + 2;
  else
    throw ConfigError("unknown subset policy: " + g.subset_policy);
  unsigned long long x =
      sat_mul(s.candidates, static_cast<unsigned long long>(s.selectors));
  s.size = 0;
  for (int k = 0; k <= s.max_crashes; ++k)
    s.size = sat_add(s.size, sat_mul(choose_sat(s.processes, k), sat_pow(x, k)));
  return s;
}

CrashSchedule schedule_at(const EnumerationSpace& space,
                          unsigned long long index) {
  if (index >= space.size) throw ConfigError("enumeration index out of range");
  unsigned long long x =
      space.candidates * static_cast<unsigned long long>(space.selectors);
  int k = 0;
  unsigned long long xk = 1;  // x^k
  for (;; ++k) {
    unsigned long long block = choose_sat(space.processes, k) * xk;
    if (index < block) break;
    index -= block;
    xk *= x;
  }
  CrashSchedule schedule;
  if (k == 0) return schedule;
  std::vector<int> procs = unrank_combo(space.processes, k, index / xk);
  unsigned long long rem = index % xk;
  unsigned long long place = xk / x;  // x^(k-1), digit weight of procs[0]
  for (int i = 0; i < k; ++i) {
    unsigned long long digit = rem / place;
    rem %= place;
    if (i + 1 < k) place /= x;
    CrashDirective d;
    d.process = procs[static_cast<std::size_t>(i)];
    d.round = Round(1) + Round(space.stride) *
                             Round(digit / static_cast<unsigned long long>(
                                               space.selectors));
    d.pre_action = false;
    d.subset = selector_at(
        space, static_cast<int>(digit % static_cast<unsigned long long>(
                                            space.selectors)));
    schedule.crashes.push_back(std::move(d));
  }
  return schedule;
}

EnumerationReport enumerate_serial(const std::string& protocol, long long n,
                                   int t, const Granularity& g,
                                   unsigned long long cap) {
  return walk(protocol, n, t, g, cap, false);
}

EnumerationReport enumerate_parallel(const std::string& protocol, long long n,
                                     int t, const Granularity& g,
                                     unsigned long long cap) {
  return walk(protocol, n, t, g, cap, true);
}

Json enumeration_report_to_json(const EnumerationReport& r) {
  Json j;
  j["protocol"] = r.space.protocol;
  j["n"] = r.space.n;
  j["t"] = r.space.t;
  j["schedules"] = r.space.size;
  j["candidate_rounds"] = r.space.candidates;
  j["selectors"] = r.space.selectors;
  j["max_crashes"] = r.space.max_crashes;
  j["checked"] = r.checked;
  j["failures"] = r.failures;
  if (r.failures > 0) {
    j["first_failure"] = Json{{"index", r.first_bad_index},
                              {"violation", r.first_violation}};
  }
  j["redundant_work_seen"] = r.redundant_work_seen;
  return j;
}

}  // namespace worksim
