#pragma once

#include <worksim/bounds.hpp>
#include <worksim/protocol.hpp>

#include <memory>
#include <string>
#include <vector>

namespace worksim {

// Crash-fault agreement on top of a work engine. Unit j of the embedded run
// means "tell process j-1 the general's value": the inform rides on the work
// action, so redone units re-deliver the current chain value. With t+1
// workers at least one survives, every live process is informed, and all
// decide simultaneously one round past the engine's retirement bound.
//
// Workers whose engine part has retired stay alive here (they still adopt
// informs and must decide) but stop answering polls, so the engine's failure
// detection treats them as gone.
class ByzAgreement final : public Protocol {
 public:
  // engine is "a", "b" or "c". Processes 0..workers-1 run the engine, sized
  // by agreement_shape; process 0 is the general.
  ByzAgreement(int n_procs, int t, std::string engine, int general_value = 1);

  std::string name() const override { return "ba-" + engine_name_; }
  int num_processes() const override { return n_procs_; }
  long long num_units() const override { return shape_.units; }
  int fault_budget() const override { return t_; }

  Mode mode(ProcessId p) const override;
  Action step(ProcessId p, const Round& r, const Inbox& inbox) override;
  std::optional<Round> next_wake(ProcessId p, const Round& r) const override;
  bool answers_poll(ProcessId p) const override;
  void finalize_metrics(Metrics& metrics,
                        const std::vector<Mode>& final_modes) const override;

  const Round& decision_round() const { return decision_round_; }
  const AgreementShape& shape() const { return shape_; }
  int value_of(ProcessId p) const {
    return values_[static_cast<std::size_t>(p)];
  }

 private:
  void adopt(ProcessId p, const Inbox& inbox);
  Action annotate(ProcessId p, Action act) const;

  int n_procs_;
  int t_;
  std::string engine_name_;
  int general_value_;
  AgreementShape shape_;
  std::unique_ptr<Protocol> inner_;
  Round decision_round_;
  std::vector<int> values_;
  std::vector<bool> decided_;
};

}  // namespace worksim
