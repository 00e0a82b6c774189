#pragma once

#include <worksim/protocol.hpp>

namespace worksim {

// Every process performs every unit in lockstep: n rounds, no messages,
// t*n work. Any survivor has done everything.
class NaiveAll final : public Protocol {
 public:
  NaiveAll(long long n, int t);

  std::string name() const override { return "naive-all"; }
  int num_processes() const override { return t_; }
  long long num_units() const override { return n_; }
  int fault_budget() const override { return t_; }
  Mode mode(ProcessId p) const override { return modes_[p]; }
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;

 private:
  long long n_;
  int t_;
  std::vector<Mode> modes_;
};

// One worker at a time: the leader alternates a unit of work with a
// broadcast of its progress counter. Backups resume past the best counter
// heard when their fixed takeover round arrives, and retire on hearing n.
Round leader_deadline(ProcessId j, long long n);

class NaiveLeader final : public Protocol {
 public:
  NaiveLeader(long long n, int t);

  std::string name() const override { return "naive-leader"; }
  int num_processes() const override { return t_; }
  long long num_units() const override { return n_; }
  int fault_budget() const override { return t_; }
  Mode mode(ProcessId p) const override { return procs_[p].mode; }
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;

 private:
  struct PState {
    Mode mode = Mode::Inactive;
    long long know = 0;       // best progress counter heard
    long long current = 0;    // unit being worked while active
    bool announce = false;    // broadcast round of the work/announce pair
  };

  long long n_;
  int t_;
  std::vector<PState> procs_;
};

}  // namespace worksim
