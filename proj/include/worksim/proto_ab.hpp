#pragma once

#include <worksim/protocol.hpp>

#include <cstddef>
#include <variant>
#include <vector>

namespace worksim {

// Process ids 0..t-1 are split into sqrt(t) groups of sqrt(t) consecutive
// ids; groups are numbered from 1. Work is cut into t chunks of n/t units.
int isqrt_exact(int t);               // throws ConfigError unless t is square
int group_of(ProcessId i, int t);     // 1-based group index
std::vector<ProcessId> group_members(int g, int t);

// Takeover deadline of process j in the eager variant: absolute round.
Round dd_a(ProcessId j, long long n, int t);

// Timeouts of the message-lean variant. bar_i is a process's index within
// its group (0-based). dd_b is the takeover delay of j measured from the
// last sign of life heard from i; it is additive along takeover chains.
long long pto(long long n, int t);
long long gto(int bar_i, long long n, int t);
Round dd_b(ProcessId j, ProcessId i, long long n, int t);

// What a process knows from folded checkpoints: the best (c,g) seen, where
// g == 0 marks a plain chunk checkpoint and g > 0 a group-directed one.
// Ranked lexicographically by (c, g); the sender decides how to resume.
struct CheckpointKnowledge {
  long long c = 0;
  int g = 0;
  ProcessId sender = -1;
};

struct PlanWork {
  WorkUnitId unit = 0;
};
struct PlanBroadcast {
  Payload payload;
  std::vector<ProcessId> to;
};
using PlanStep = std::variant<PlanWork, PlanBroadcast>;

// The active-phase schedule resumed from the given knowledge: remaining
// resume rebroadcasts, then chunks c+1..t with their checkpoints. Empty when
// nothing remains to do or announce.
std::vector<PlanStep> checkpoint_plan(ProcessId self, long long n, int t,
                                      const CheckpointKnowledge& resume);

// Eager takeover: process j activates unconditionally at round dd_a(j).
class ProtoA final : public Protocol {
 public:
  ProtoA(long long n, int t);

  std::string name() const override { return "a"; }
  int num_processes() const override { return t_; }
  long long num_units() const override { return n_; }
  int fault_budget() const override { return t_; }
  Mode mode(ProcessId p) const override;
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;

 private:
  struct PState {
    Mode mode = Mode::Inactive;
    CheckpointKnowledge know;
    std::vector<PlanStep> plan;
    std::size_t pos = 0;
  };
  Action activate(PState& st, ProcessId p);

  long long n_;
  int t_;
  std::vector<PState> procs_;
};

// Message-lean takeover: deadlines restart on every checkpoint heard, and an
// expiring process first offers the takeover to earlier group members via
// go-ahead probes before activating itself.
class ProtoB final : public Protocol {
 public:
  ProtoB(long long n, int t);

  std::string name() const override { return "b"; }
  int num_processes() const override { return t_; }
  long long num_units() const override { return n_; }
  int fault_budget() const override { return t_; }
  Mode mode(ProcessId p) const override;
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;

 private:
  struct PState {
    Mode mode = Mode::Inactive;
    CheckpointKnowledge know;
    Round heard_round = 0;        // round the last checkpoint arrived
    ProcessId heard_from = 0;     // its sender (process 0 is implied at start)
    ProcessId cursor = 0;         // probe candidate while preactive
    Round window_close = 0;
    std::vector<PlanStep> plan;
    std::size_t pos = 0;
  };
  // Either the action to return this round, or nullopt meaning the process
  // is now active and should issue its first plan step immediately.
  std::optional<Action> activate(PState& st, ProcessId p);
  std::optional<Action> enter_probe_or_activate(PState& st, ProcessId p,
                                                const Round& r,
                                                bool fresh_entry);

  long long n_;
  int t_;
  std::vector<PState> procs_;
};

}  // namespace worksim
