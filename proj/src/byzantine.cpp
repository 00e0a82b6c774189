#include "worksim/byzantine.hpp"

#include <utility>

#include "worksim/proto_ab.hpp"
#include "worksim/proto_c.hpp"

namespace worksim {

ByzAgreement::ByzAgreement(int n_procs, int t, std::string engine,
                           int general_value)
    : n_procs_(n_procs),
      t_(t),
      engine_name_(std::move(engine)),
      general_value_(general_value) {
  if (n_procs_ < 2) throw ConfigError("agreement needs at least 2 processes");
  if (t_ < 1) throw ConfigError("agreement fault budget must be positive");
  shape_ = agreement_shape(engine_name_, n_procs_, t_);
  if (engine_name_ == "a")
    inner_ = std::make_unique<ProtoA>(shape_.units, shape_.workers);
  else if (engine_name_ == "b")
    inner_ = std::make_unique<ProtoB>(shape_.units, shape_.workers);
  else
    inner_ = std::make_unique<ProtoC>(shape_.units, shape_.workers, false);
  // Round 1 disseminates, then the engine runs on a clock offset by one;
  // everyone left decides one round after the engine's retirement bound.
  decision_round_ =
      engine_round_bound(engine_name_, shape_.units, shape_.workers) + 2;
  values_.assign(static_cast<std::size_t>(n_procs_), 0);
  decided_.assign(static_cast<std::size_t>(n_procs_), false);
  values_[0] = general_value_;
}

Mode ByzAgreement::mode(ProcessId p) const {
  if (decided_[static_cast<std::size_t>(p)]) return Mode::Terminated;
  if (p < shape_.workers) {
    Mode m = inner_->mode(p);
    return m == Mode::Terminated ? Mode::Inactive : m;
  }
  return Mode::Inactive;
}

void ByzAgreement::adopt(ProcessId p, const Inbox& inbox) {
  // A report's value travels with its knowledge: whoever supplied the best
  // point count also supplied the matching value. Direct informs come from
  // the process working right now, so they win over same-round reports.
  const OrdinaryC* best = nullptr;
  for (const auto& m : inbox) {
    const auto* oc = std::get_if<OrdinaryC>(&m.payload);
    if (oc && oc->value &&
        (!best || oc->view.point_work >= best->view.point_work))
      best = oc;
  }
  if (best) values_[static_cast<std::size_t>(p)] = *best->value;
  for (const auto& m : inbox)
    if (const auto* in = std::get_if<Inform>(&m.payload))
      values_[static_cast<std::size_t>(p)] = in->value;
}

Action ByzAgreement::annotate(ProcessId p, Action act) const {
  int v = values_[static_cast<std::size_t>(p)];
  if (auto* w = std::get_if<ActWork>(&act)) {
    auto target = static_cast<ProcessId>(w->unit - 1);
    if (target < n_procs_ && target != p)
      w->sends.push_back(Send{Inform{v}, {target}});
  } else if (auto* s = std::get_if<ActSend>(&act)) {
    for (auto& snd : s->batch)
      if (auto* oc = std::get_if<OrdinaryC>(&snd.payload)) oc->value = v;
  } else if (std::holds_alternative<ActRetire>(act)) {
    // The engine part is done; the agreement process lives on to decide.
    return ActIdle{};
  }
  return act;
}

Action ByzAgreement::step(ProcessId p, const Round& r, const Inbox& inbox) {
  adopt(p, inbox);
  auto idx = static_cast<std::size_t>(p);
  if (r >= decision_round_) {
    decided_[idx] = true;
    return ActRetire{values_[idx]};
  }
  if (r == 1) {
    if (p != 0) return ActIdle{};
    // Every worker could end up driving the sweep, so every worker hears the
    // value up front; non-workers hear it through the work units.
    Send s;
    s.payload = Inform{general_value_};
    for (ProcessId q = 1; q < shape_.workers; ++q) s.to.push_back(q);
    return ActSend{{std::move(s)}};
  }
  if (p < shape_.workers && inner_->mode(p) != Mode::Terminated) {
    Inbox fwd;
    fwd.reserve(inbox.size());
    for (const auto& m : inbox)
      if (!std::holds_alternative<Inform>(m.payload)) fwd.push_back(m);
    return annotate(p, inner_->step(p, r - 1, fwd));
  }
  return ActIdle{};
}

std::optional<Round> ByzAgreement::next_wake(ProcessId p, const Round& r) const {
  if (decided_[static_cast<std::size_t>(p)]) return std::nullopt;
  if (p < shape_.workers && inner_->mode(p) != Mode::Terminated) {
    if (auto w = inner_->next_wake(p, r - 1)) {
      Round global = *w + 1;
      if (global < decision_round_) return global;
    }
  }
  return decision_round_;
}

bool ByzAgreement::answers_poll(ProcessId p) const {
  return p < shape_.workers && !decided_[static_cast<std::size_t>(p)] &&
         inner_->answers_poll(p);
}

void ByzAgreement::finalize_metrics(Metrics& metrics,
                                    const std::vector<Mode>& final_modes) const {
  bool ok = true;
  std::optional<int> agreed;
  for (ProcessId p = 0; p < n_procs_; ++p) {
    if (final_modes[static_cast<std::size_t>(p)] == Mode::Crashed) continue;
    auto it = metrics.decisions.find(p);
    if (it == metrics.decisions.end()) {
      ok = false;
      break;
    }
    if (!agreed) agreed = it->second;
    if (*agreed != it->second) {
      ok = false;
      break;
    }
  }
  metrics.completed = ok;
}

}  // namespace worksim
