#pragma once

#include <worksim/types.hpp>

#include <optional>
#include <string>
#include <vector>

namespace worksim {

// A protocol is a deterministic state machine per process. The engine owns
// crashes; protocols never observe a crash directly, only message silence.
class Protocol {
 public:
  virtual ~Protocol() = default;

  virtual std::string name() const = 0;
  virtual int num_processes() const = 0;
  virtual long long num_units() const = 0;
  virtual int fault_budget() const = 0;

  // Mode as the protocol believes it; the engine overlays Crashed.
  virtual Mode mode(ProcessId p) const = 0;

  // One round for process p. The inbox holds this round's deliveries except
  // polls, which the engine answers without consuming the action. Called only
  // while the process is neither terminated nor crashed, and exactly once per
  // executed round, in increasing process order.
  virtual Action step(ProcessId p, const Round& r, const Inbox& inbox) = 0;

  // Next round after r at which p would do something other than idle, given
  // no further deliveries. nullopt when p has nothing scheduled. Must exceed
  // r. Drives fast-forward; correctness is checked by trace equality against
  // single-stepped runs.
  virtual std::optional<Round> next_wake(ProcessId p, const Round& r) const = 0;

  // Whether p responds to a poll delivered this round.
  virtual bool answers_poll(ProcessId p) const {
    return mode(p) != Mode::Terminated;
  }

  // Hook for protocols whose completion is not "every unit performed".
  virtual void finalize_metrics(Metrics&, const std::vector<Mode>&) const {}
};

}  // namespace worksim
