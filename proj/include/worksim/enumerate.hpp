#pragma once

#include <worksim/json_io.hpp>
#include <worksim/types.hpp>

#include <string>

namespace worksim {

// Which slice of the adversary space to walk. Each process either never
// crashes or crashes once, post-action, at a round from the candidate grid
// {1, 1+stride, 1+2*stride, ...} capped by round_limit, delivering a subset
// of its final batch drawn from the policy's selector family.
struct Granularity {
  Round round_limit = 0;  // 0: the protocol's closed-form round bound
  long long stride = 1;
  std::string subset_policy = "prefix";  // "prefix" or "small-all"
  int max_crashes = -1;                  // -1: min(crash budget, 2)
};

// Fully resolved shape of the space. size saturates; the walkers refuse
// anything over their cap, so saturation only ever feeds an error message.
struct EnumerationSpace {
  std::string protocol;
  long long n = 0;
  int t = 0;
  int processes = 0;
  Round round_limit = 0;
  long long stride = 1;
  unsigned long long candidates = 0;
  int batch_depth = 0;  // prefix selectors probe cut points 0..batch_depth-1
  int selectors = 0;
  int max_crashes = 0;
  unsigned long long size = 0;  // includes the failure-free schedule
};

EnumerationSpace enumeration_space(const std::string& protocol, long long n,
                                   int t, const Granularity& g);

// Schedule at an enumeration index. Pure and random-access, so walkers can
// fan out by index and still agree on what index i means.
CrashSchedule schedule_at(const EnumerationSpace& space,
                          unsigned long long index);

struct EnumerationReport {
  EnumerationSpace space;
  unsigned long long checked = 0;
  unsigned long long failures = 0;
  unsigned long long first_bad_index = 0;
  std::string first_violation;
  bool redundant_work_seen = false;  // proves the redundancy checks ran hot
};

// Runs every schedule in the space with the state observers attached and the
// structural checks on each recorded trace. Spaces larger than cap are
// refused with ConfigError before any work happens. Serial and parallel
// walkers return identical reports.
EnumerationReport enumerate_serial(const std::string& protocol, long long n,
                                   int t, const Granularity& g,
                                   unsigned long long cap);
EnumerationReport enumerate_parallel(const std::string& protocol, long long n,
                                     int t, const Granularity& g,
                                     unsigned long long cap);

Json enumeration_report_to_json(const EnumerationReport& r);

}  // namespace worksim
