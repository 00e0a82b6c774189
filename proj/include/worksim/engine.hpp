#pragma once

#include <worksim/adversary.hpp>
#include <worksim/protocol.hpp>
#include <worksim/types.hpp>

#include <map>
#include <memory>
#include <vector>

namespace worksim {

struct RunParams {
  bool record_trace = false;
  bool disable_fast_forward = false;
  bool abort_on_violation = false;
  long long max_executed_rounds = 10'000'000;
};

struct EngineSnapshot {
  const Protocol& protocol;
  const std::vector<Mode>& modes;  // engine view, Crashed overlaid
  const Round& round;
  const Metrics& metrics;
};

class Observer {
 public:
  virtual ~Observer() = default;
  // Called after each committed round that produced events.
  virtual void on_round(const RoundRecord& rec, const EngineSnapshot& snap,
                        Verdict& verdict) = 0;
  virtual void on_end(const EngineSnapshot& snap, Verdict& verdict) {
    (void)snap;
    (void)verdict;
  }
};

struct RunResult {
  Metrics metrics;
  Trace trace;     // rounds empty unless record_trace
  Verdict verdict;  // aggregated observer findings
};

// Lock-step synchronous executor. Per executed round: deliver last round's
// messages, answer polls, step live processes in id order, apply the
// adversary's crashes (filtering each victim's outgoing batch), commit
// effects. Rounds in which nothing happens are skipped, and skipping is
// observationally identical to stepping through them.
class Engine {
 public:
  Engine(Protocol& protocol, Adversary& adversary, RunParams params);
  void add_observer(Observer* obs);
  RunResult run();

 private:
  Protocol& protocol_;
  Adversary& adversary_;
  RunParams params_;
  std::vector<Observer*> observers_;
};

// Convenience wrapper: run a protocol against an adversary with no observers.
RunResult simulate(Protocol& protocol, Adversary& adversary, RunParams params);

}  // namespace worksim
