#pragma once

#include <worksim/protocol.hpp>

namespace worksim {

// Process ids form a binary hierarchy of groups: level h (1-based) splits the
// t ids into groups of size 2^(log2(t)-h+1), so level 1 is everyone and level
// log2(t) is pairs. Group (h, idx) holds ids idx*size .. (idx+1)*size - 1.
int log2_exact(int t);  // throws ConfigError unless t is a power of two
int c_group_size(int level, int t);
long long c_group_index(ProcessId p, int level, int t);

// Timeout scale factors.
long long c_scale_plain(int t);                 // for the per-unit reporter
long long c_scale_batched(long long n, int t);  // for the batch reporter

// Sleep allowance of process i holding reduced view m, measured from the
// round the view was last refreshed. m == 0 staggers wakers by id; larger
// views wake exponentially sooner.
Round c_deadline(ProcessId i, long long m, long long n, int t, long long k);

long long reduced_view(const ViewC& view);
void merge_view(ViewC& dst, const ViewC& src);
ViewC initial_view(ProcessId p, long long n, int t);

// Poll-driven takeover protocol. Everyone starts asleep; the process whose
// deadline fires first walks its group hierarchy innermost-out, polling each
// group's believed coordinator, replacing the dead, then performs the
// remaining work, reporting progress round-robin to processes not known
// faulty. batched == true reports once per ceil(n/t) units instead of every
// unit and uses the larger timeout scale.
class ProtoC final : public Protocol {
 public:
  ProtoC(long long n, int t, bool batched);

  std::string name() const override { return batched_ ? "c-batched" : "c"; }
  int num_processes() const override { return t_; }
  long long num_units() const override { return n_; }
  int fault_budget() const override { return t_; }
  Mode mode(ProcessId p) const override;
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;

  // State accessors for invariant observers.
  const ViewC& view_of(ProcessId p) const;
  Round heard_round_of(ProcessId p) const;
  long long activation_view_of(ProcessId p) const;

 private:
  enum class Sub { Poll, Await, Work };
  struct PState {
    Mode mode = Mode::Inactive;
    ViewC view;
    Round heard_round = 0;
    int h = 0;  // descent level; meaningful while Sub::Poll/Await
    Sub sub = Sub::Poll;
    ProcessId poll_target = -1;
    Round eval_round = 0;
    bool report_pending = false;
    long long batch_count = 0;
    ProcessId rr = 0;  // round-robin cursor for progress reports
    long long activation_m = -1;
  };

  // First group member >= the stored pointer that is neither faulty nor p
  // itself; -1 when the group is exhausted.
  ProcessId candidate(const PState& st, ProcessId p, int level) const;
  std::optional<ProcessId> report_target(PState& st, ProcessId p);
  Action active_step(PState& st, ProcessId p, const Round& r,
                     const Inbox& inbox);

  long long n_;
  int t_;
  bool batched_;
  int levels_;
  long long scale_;
  long long batch_quota_;
  std::vector<PState> procs_;
};

}  // namespace worksim
