#pragma once

#include <worksim/adversary.hpp>
#include <worksim/checker.hpp>
#include <worksim/engine.hpp>
#include <worksim/protocols.hpp>

#include <string>
#include <utility>

namespace worksim::testutil {

inline RunResult run_free(const std::string& name, long long n, int t,
                          bool record = false) {
  auto proto = make_protocol(name, n, t);
  NullAdversary adv;
  RunParams params;
  params.record_trace = record;
  return simulate(*proto, adv, params);
}

inline RunResult run_scheduled(const std::string& name, long long n, int t,
                               CrashSchedule sched, bool record = true) {
  auto proto = make_protocol(name, n, t);
  ScheduledAdversary adv(std::move(sched), proto->num_processes());
  RunParams params;
  params.record_trace = record;
  return simulate(*proto, adv, params);
}

// Full verification pass: state observers during the run, then the
// structural and replay checks on the recorded trace, all folded into the
// returned verdict.
inline RunResult run_checked(const std::string& name, long long n, int t,
                             CrashSchedule sched) {
  auto proto = make_protocol(name, n, t);
  ScheduledAdversary adv(std::move(sched), proto->num_processes());
  RunParams params;
  params.record_trace = true;
  Engine eng(*proto, adv, params);
  auto observers = invariant_observers(*proto);
  for (auto& o : observers) eng.add_observer(o.get());
  RunResult rr = eng.run();
  Verdict full = check_execution(rr.trace);
  for (const auto& v : full.violations) rr.verdict.violations.push_back(v);
  rr.verdict.pass = rr.verdict.pass && full.pass;
  return rr;
}

// Post-action crash delivering nothing.
inline CrashDirective crash_silent(ProcessId p, long long round) {
  return CrashDirective{p, Round(round), false, SubsetSelector{}};
}

// Post-action crash delivering only to the listed recipients.
inline CrashDirective crash_partial(ProcessId p, long long round,
                                    std::vector<ProcessId> to) {
  SubsetSelector sel;
  sel.kind = SubsetSelector::Kind::Pids;
  sel.pids = std::move(to);
  return CrashDirective{p, Round(round), false, sel};
}

// Crash before the round's action: the process contributes nothing that round.
inline CrashDirective crash_pre(ProcessId p, long long round) {
  return CrashDirective{p, Round(round), true, SubsetSelector{}};
}

}  // namespace worksim::testutil
