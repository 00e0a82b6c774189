#pragma once

#include <memory>

#include <worksim/proto_ab.hpp>
#include <worksim/protocol.hpp>

namespace worksim {

// Contiguous slice of the sorted remaining units assigned to j by its rank
// among the believed-live processes; empty when j is not believed live or
// the units run out before j's slice starts.
std::set<WorkUnitId> allot(const std::set<WorkUnitId>& remaining,
                           const std::set<ProcessId>& live, ProcessId j);

// Phase protocol: everyone splits the remaining units evenly, works its own
// slice, then runs a broadcast agreement on what remains and who survives.
// When more than half the expected participants drop out of one phase the
// survivors hand the leftovers to an embedded checkpoint-chain run instead
// of iterating further.
class ProtoD final : public Protocol {
 public:
  ProtoD(long long n, int t);

  std::string name() const override { return "d"; }
  int num_processes() const override { return t_; }
  long long num_units() const override { return n_; }
  int fault_budget() const override { return t_; }
  Mode mode(ProcessId p) const override;
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;

  // Observer accessors.
  int phase_of(ProcessId p) const { return procs_[p].phase; }
  bool fallback_entered() const { return fallback_seen_; }
  const std::set<WorkUnitId>& remaining_of(ProcessId p) const {
    return procs_[p].s;
  }
  const std::set<ProcessId>& thought_correct_of(ProcessId p) const {
    return procs_[p].t;
  }

 private:
  enum class Sub { Work, Agree, Fallback };
  struct PState {
    Mode mode = Mode::Active;
    Sub sub = Sub::Work;
    int phase = 1;
    std::set<WorkUnitId> s;
    std::set<ProcessId> t;
    std::set<ProcessId> u;        // not yet known faulty, eroded by silence
    std::set<ProcessId> u_prev;   // membership when the last view went out
    std::set<ProcessId> snap0;    // roster as of phase start
    std::vector<WorkUnitId> share;
    long long work_done = 0;
    long long work_len = 0;
    int round_var = 0;
    bool sent_initial = false;
    std::vector<std::pair<ProcessId, ViewD>> buffer;
    // fallback embedding
    std::unique_ptr<ProtoA> embedded;
    Round embed_offset = 0;
    std::vector<ProcessId> participants;   // embedded id -> real id
    std::vector<WorkUnitId> unit_map;      // embedded unit -> real unit
  };

  void begin_work_phase(PState& st, ProcessId p);
  void begin_agreement(PState& st, ProcessId p);
  Action on_done(PState& st, ProcessId p, const Round& r);
  Action fallback_step(PState& st, ProcessId p, const Round& r,
                       const Inbox& inbox);
  Action broadcast(const PState& st, ProcessId p, bool done) const;

  long long n_;
  int t_;
  bool fallback_seen_ = false;
  std::vector<PState> procs_;
};

}  // namespace worksim
