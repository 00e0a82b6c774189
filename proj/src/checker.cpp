#include "worksim/checker.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <utility>

#include "worksim/adversary.hpp"
#include "worksim/bounds.hpp"
#include "worksim/proto_c.hpp"
#include "worksim/proto_d.hpp"
#include "worksim/protocols.hpp"

namespace worksim {

namespace {

bool is_agreement(const std::string& name) {
  return name.rfind("ba-", 0) == 0;
}

// Mode every process holds before round 1, by protocol family.
std::vector<Mode> initial_modes(const std::string& name, int nproc) {
  std::vector<Mode> m(static_cast<std::size_t>(nproc), Mode::Inactive);
  if (name == "d" || name == "naive-all") {
    std::fill(m.begin(), m.end(), Mode::Active);
  } else if (name == "a" || name == "b" || name == "naive-leader" ||
             name == "ba-a" || name == "ba-b") {
    m[0] = Mode::Active;
  }
  return m;
}

bool single_active_family(const std::string& name) {
  return name != "d" && name != "naive-all";
}

bool monotone_family(const std::string& name) {
  return name == "a" || name == "b" || name == "naive-leader" ||
         name == "ba-a" || name == "ba-b";
}

// Payloads only an active process issues in the single-active families.
bool active_payload(const Payload& p) {
  return std::holds_alternative<PartialCkpt>(p) ||
         std::holds_alternative<FullCkpt>(p) ||
         std::holds_alternative<OrdinaryC>(p);
}

void bucket_add(MessageCounts& mc, const Payload& p, long long k) {
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, PartialCkpt> ||
                      std::is_same_v<T, FullCkpt> ||
                      std::is_same_v<T, OrdinaryC>)
          mc.ordinary += k;
        else if constexpr (std::is_same_v<T, GoAhead>)
          mc.go_ahead += k;
        else if constexpr (std::is_same_v<T, Poll>)
          mc.poll += k;
        else if constexpr (std::is_same_v<T, PollReply>)
          mc.poll_reply += k;
        else if constexpr (std::is_same_v<T, ViewD>)
          mc.view_d += k;
        else
          mc.inform += k;
      },
      p);
}

std::string pname(ProcessId p) { return "process " + std::to_string(p); }

struct WalkResult {
  Metrics metrics;
  std::vector<bool> crashed;
  std::vector<bool> retired;
};

// One pass over the records, feeding both the metric recomputation and the
// structural verdict. verdict may be null when only metrics are wanted.
WalkResult walk(const Trace& trace, Verdict* verdict) {
  const auto& hdr = trace.header;
  int nproc = hdr.num_processes;
  auto idx = [](ProcessId p) { return static_cast<std::size_t>(p); };
  auto flag = [&](const Round& r, const std::string& inv, std::string detail) {
    if (verdict) verdict->add(r, inv, std::move(detail));
  };

  WalkResult out;
  out.crashed.assign(static_cast<std::size_t>(nproc), false);
  out.retired.assign(static_cast<std::size_t>(nproc), false);
  std::vector<Mode> modes = initial_modes(hdr.protocol, nproc);
  std::map<WorkUnitId, long long> performed;
  Metrics& m = out.metrics;

  bool check_single = single_active_family(hdr.protocol);
  bool check_monotone = monotone_family(hdr.protocol);
  ProcessId last_activated = check_monotone ? 0 : -1;

  Round prev_round = 0;
  std::set<std::pair<ProcessId, ProcessId>> prev_polls;  // (poller, target)

  for (const auto& rec : trace.rounds) {
    if (rec.round <= prev_round || rec.round < 1)
      flag(rec.round, "round-order", "record rounds must increase");
    bool adjacent = rec.round == prev_round + 1;
    std::set<std::pair<ProcessId, ProcessId>> polls;
    std::set<ProcessId> actors;

    for (const auto& ev : rec.events) {
      ProcessId p = std::visit([](const auto& e) { return e.process; }, ev);
      if (p < 0 || p >= nproc) {
        flag(rec.round, "process-range", pname(p) + " does not exist");
        continue;
      }
      bool ended = out.crashed[idx(p)] || out.retired[idx(p)];
      if (const auto* mo = std::get_if<EvMode>(&ev)) {
        if (ended) flag(rec.round, "acts-after-end", pname(p) + " changed mode");
        if (mo->to == Mode::Terminated || mo->to == Mode::Crashed)
          flag(rec.round, "mode-event",
               "termination and crashes have dedicated events");
        modes[idx(p)] = mo->to;
        if (check_monotone && mo->to == Mode::Active) {
          if (p <= last_activated)
            flag(rec.round, "monotone-takeover",
                 pname(p) + " activated after process " +
                     std::to_string(last_activated));
          last_activated = p;
        }
      } else if (const auto* w = std::get_if<EvWork>(&ev)) {
        if (ended) flag(rec.round, "acts-after-end", pname(p) + " worked");
        if (w->unit < 1 || w->unit > hdr.num_units)
          flag(rec.round, "unit-range",
               "unit " + std::to_string(w->unit) + " out of range");
        m.work_total += 1;
        if (++performed[w->unit] > 1) m.work_redundant += 1;
        actors.insert(p);
      } else if (const auto* s = std::get_if<EvSend>(&ev)) {
        if (ended) flag(rec.round, "acts-after-end", pname(p) + " sent");
        bucket_add(m.messages, s->payload,
                   static_cast<long long>(s->to.size()));
        if (std::holds_alternative<Poll>(s->payload)) {
          for (ProcessId q : s->to) polls.emplace(p, q);
        } else if (std::holds_alternative<PollReply>(s->payload)) {
          for (ProcessId q : s->to)
            if (!adjacent || !prev_polls.count({q, p}))
              flag(rec.round, "poll-pairing",
                   pname(p) + " answered a poll " + pname(q) + " never sent");
        }
        if (active_payload(s->payload)) actors.insert(p);
      } else if (std::get_if<EvRetire>(&ev)) {
        if (ended) flag(rec.round, "acts-after-end", pname(p) + " retired");
        out.retired[idx(p)] = true;
        modes[idx(p)] = Mode::Terminated;
      } else if (const auto* d = std::get_if<EvDecide>(&ev)) {
        if (ended) flag(rec.round, "acts-after-end", pname(p) + " decided");
        m.decisions[p] = d->value;
      } else if (const auto* c = std::get_if<EvCrash>(&ev)) {
        if (out.crashed[idx(p)])
          flag(rec.round, "crash-permanence", pname(p) + " crashed twice");
        if (out.retired[idx(p)])
          flag(rec.round, "crash-permanence", pname(p) + " crashed retired");
        (void)c;
        out.crashed[idx(p)] = true;
        modes[idx(p)] = Mode::Crashed;
        m.failures_injected += 1;
      }
    }

    if (check_single) {
      long long active = std::count(modes.begin(), modes.end(), Mode::Active);
      if (active > 1)
        flag(rec.round, "single-active",
             std::to_string(active) + " processes active at round end");
      if (actors.size() > 1)
        flag(rec.round, "single-active",
             "two processes acted as active in one round");
    }
    prev_round = rec.round;
    prev_polls = std::move(polls);
  }

  m.rounds_until_all_retired = prev_round;

  if (is_agreement(hdr.protocol)) {
    bool ok = true;
    std::optional<int> agreed;
    for (ProcessId p = 0; p < nproc; ++p) {
      if (out.crashed[idx(p)]) continue;
      auto it = m.decisions.find(p);
      if (it == m.decisions.end()) {
        ok = false;
        break;
      }
      if (!agreed) agreed = it->second;
      if (*agreed != it->second) {
        ok = false;
        break;
      }
    }
    m.completed = ok;
  } else {
    long long done = 0;
    for (const auto& [unit, times] : performed)
      if (unit >= 1 && unit <= hdr.num_units && times > 0) done += 1;
    m.completed = done == hdr.num_units;
  }
  return out;
}

}  // namespace

CrashSchedule schedule_from_trace(const Trace& trace) {
  CrashSchedule s;
  for (const auto& rec : trace.rounds)
    for (const auto& ev : rec.events)
      if (const auto* c = std::get_if<EvCrash>(&ev))
        s.crashes.push_back({c->process, rec.round, c->pre_action, c->subset});
  return s;
}

Metrics metrics_from_trace(const Trace& trace) {
  return walk(trace, nullptr).metrics;
}

Verdict check_structure(const Trace& trace) {
  Verdict v;
  WalkResult w = walk(trace, &v);
  const auto& hdr = trace.header;
  int nproc = hdr.num_processes;

  bool survivor = false;
  for (ProcessId p = 0; p < nproc; ++p) {
    auto i = static_cast<std::size_t>(p);
    if (!w.crashed[i] && !w.retired[i])
      v.add(w.metrics.rounds_until_all_retired, "truncated",
            pname(p) + " neither retired nor crashed by the end");
    if (!w.crashed[i]) survivor = true;
  }
  if (survivor && !w.metrics.completed)
    v.add(w.metrics.rounds_until_all_retired, "completion",
          "a process survived but the run did not complete");

  try {
    long long n = is_agreement(hdr.protocol) ? hdr.num_processes
                                             : hdr.num_units;
    bool fallback =
        hdr.protocol == "d" && w.metrics.messages.ordinary > 0;
    Bounds b = bound_for(hdr.protocol, n, hdr.fault_budget,
                         w.metrics.failures_injected, fallback);
    if (w.metrics.work_total > b.work)
      v.add(w.metrics.rounds_until_all_retired, "work-bound",
            std::to_string(w.metrics.work_total) + " units performed, bound " +
                std::to_string(b.work));
    if (w.metrics.messages.total() > b.messages)
      v.add(w.metrics.rounds_until_all_retired, "message-bound",
            std::to_string(w.metrics.messages.total()) + " messages, bound " +
                std::to_string(b.messages));
    if (w.metrics.rounds_until_all_retired > b.rounds)
      v.add(w.metrics.rounds_until_all_retired, "round-bound",
            "retirement exceeded the round bound");
  } catch (const ConfigError& e) {
    v.add(0, "config", e.what());
  }
  return v;
}

Verdict check_execution(const Trace& trace) {
  Verdict v = check_structure(trace);
  if (!v.pass) return v;

  std::unique_ptr<Protocol> proto;
  try {
    long long n = is_agreement(trace.header.protocol)
                      ? trace.header.num_processes
                      : trace.header.num_units;
    proto =
        make_protocol(trace.header.protocol, n, trace.header.fault_budget);
  } catch (const ConfigError& e) {
    v.add(0, "config", e.what());
    return v;
  }
  if (proto->num_processes() != trace.header.num_processes ||
      proto->num_units() != trace.header.num_units) {
    v.add(0, "header", "header counts do not match the protocol shape");
    return v;
  }

  ScheduledAdversary adv(schedule_from_trace(trace), proto->num_processes());
  RunParams params;
  params.record_trace = true;
  Engine eng(*proto, adv, params);
  auto observers = invariant_observers(*proto);
  for (auto& obs : observers) eng.add_observer(obs.get());

  RunResult rr;
  try {
    rr = eng.run();
  } catch (const std::exception& e) {
    v.add(0, "replay", std::string("replay failed: ") + e.what());
    return v;
  }
  for (auto& viol : rr.verdict.violations) {
    v.pass = false;
    v.violations.push_back(std::move(viol));
  }

  std::ostringstream got, want;
  write_trace_jsonl(want, trace);
  write_trace_jsonl(got, rr.trace);
  if (got.str() != want.str())
    v.add(0, "replay",
          "trace differs from a fresh execution of its own crash schedule");
  return v;
}

namespace {

// The knowledge lemma, split into its checkable clauses. The comparisons
// deliberately exclude retired processes: pollers mark silent finishers as
// faulty, so a late descender legitimately knows failures a finisher never
// saw, and only processes that could still act need ordered knowledge.
class KnowledgeInvariants final : public Observer {
 public:
  explicit KnowledgeInvariants(const ProtoC& c)
      : c_(c), prev_m_(static_cast<std::size_t>(c.num_processes()), 0) {}

  void on_round(const RoundRecord& rec, const EngineSnapshot& snap,
                Verdict& verdict) override {
    const int t = c_.num_processes();
    std::vector<long long> m(static_cast<std::size_t>(t));
    for (ProcessId p = 0; p < t; ++p)
      m[static_cast<std::size_t>(p)] = reduced_view(c_.view_of(p));

    // every merged report strictly grows the receiver's reduced view;
    // records are sparse, so the window since the last one is checked whole
    for (ProcessId p = 0; p < t; ++p) {
      auto i = static_cast<std::size_t>(p);
      if (c_.heard_round_of(p) > last_round_ && m[i] <= prev_m_[i])
        verdict.add(rec.round, "knowledge-growth",
                    pname(p) + " merged a report without learning anything");
    }

    // the active process knows at least as much as anyone who could still act
    for (ProcessId u = 0; u < t; ++u) {
      if (snap.modes[static_cast<std::size_t>(u)] != Mode::Active) continue;
      for (ProcessId v = 0; v < t; ++v) {
        Mode mv = snap.modes[static_cast<std::size_t>(v)];
        if (v == u || mv == Mode::Crashed || mv == Mode::Terminated) continue;
        if (m[static_cast<std::size_t>(u)] < m[static_cast<std::size_t>(v)])
          verdict.add(rec.round, "knowledge-dominance",
                      pname(u) + " is active with reduced view " +
                          std::to_string(m[static_cast<std::size_t>(u)]) +
                          " while " + pname(v) + " holds " +
                          std::to_string(m[static_cast<std::size_t>(v)]));
      }
    }

    // processes still waiting for a first turn hold totally ordered views,
    // and that order agrees with the reduced-view order
    std::vector<ProcessId> waiting;
    for (ProcessId p = 0; p < t; ++p) {
      if (snap.modes[static_cast<std::size_t>(p)] == Mode::Inactive &&
          m[static_cast<std::size_t>(p)] > 0)
        waiting.push_back(p);
    }
    for (std::size_t i = 0; i < waiting.size(); ++i) {
      for (std::size_t j = i + 1; j < waiting.size(); ++j) {
        const ViewC& u = c_.view_of(waiting[i]);
        const ViewC& v = c_.view_of(waiting[j]);
        bool uv = dominates(u, v);
        bool vu = dominates(v, u);
        std::string pair = pname(waiting[i]) + " and " +
                           std::to_string(waiting[j]);
        if (!uv && !vu)
          verdict.add(rec.round, "knowledge-comparability",
                      "views of " + pair + " are incomparable");
        long long mu = reduced_view(u);
        long long mv = reduced_view(v);
        if ((uv && mu < mv) || (vu && mv < mu))
          verdict.add(rec.round, "knowledge-dominance",
                      "dominance disagrees with reduced-view order for " +
                          pair);
      }
    }

    prev_m_ = m;
    last_round_ = rec.round;
  }

 private:
  // F-containment plus pointwise recency, over the work clock and every
  // group's takeover clock.
  static bool dominates(const ViewC& u, const ViewC& v) {
    if (u.round_work < v.round_work) return false;
    if (!std::includes(u.faulty.begin(), u.faulty.end(), v.faulty.begin(),
                       v.faulty.end()))
      return false;
    for (const auto& [key, r] : v.round) {
      if (r == 0) continue;
      auto it = u.round.find(key);
      if (it == u.round.end() || it->second < r) return false;
    }
    return true;
  }

  const ProtoC& c_;
  std::vector<long long> prev_m_;
  Round last_round_ = 0;
};

// Everyone entering an agreement-decided phase holds the same outstanding
// units and the same roster.
class PhaseInvariants final : public Observer {
 public:
  explicit PhaseInvariants(const ProtoD& d)
      : d_(d),
        last_phase_(static_cast<std::size_t>(d.num_processes()), 0) {}

  void on_round(const RoundRecord& rec, const EngineSnapshot& snap,
                Verdict& verdict) override {
    for (ProcessId p = 0; p < d_.num_processes(); ++p) {
      auto i = static_cast<std::size_t>(p);
      if (snap.modes[i] == Mode::Crashed) continue;
      int ph = d_.phase_of(p);
      if (ph <= last_phase_[i]) continue;
      last_phase_[i] = ph;
      if (ph == 1) continue;  // construction state, nothing agreed yet
      Entry e{d_.remaining_of(p), d_.thought_correct_of(p)};
      auto [it, fresh] = entry_.try_emplace(ph, e);
      if (!fresh && (it->second.s != e.s || it->second.t != e.t))
        verdict.add(rec.round, "phase-agreement",
                    pname(p) + " entered phase " + std::to_string(ph) +
                        " with a different view of the remaining work");
    }
  }

 private:
  struct Entry {
    std::set<WorkUnitId> s;
    std::set<ProcessId> t;
  };
  const ProtoD& d_;
  std::vector<int> last_phase_;
  std::map<int, Entry> entry_;
};

}  // namespace

std::vector<std::unique_ptr<Observer>> invariant_observers(Protocol& proto) {
  std::vector<std::unique_ptr<Observer>> out;
  if (auto* c = dynamic_cast<ProtoC*>(&proto))
    out.push_back(std::make_unique<KnowledgeInvariants>(*c));
  if (auto* d = dynamic_cast<ProtoD*>(&proto))
    out.push_back(std::make_unique<PhaseInvariants>(*d));
  return out;
}

Json verdict_to_json(const Verdict& v) {
  Json j;
  j["pass"] = v.pass;
  j["violations"] = Json::array();
  for (const auto& viol : v.violations) {
    Json e;
    e["round"] = round_to_json(viol.round);
    e["invariant"] = viol.invariant;
    e["detail"] = viol.detail;
    j["violations"].push_back(std::move(e));
  }
  return j;
}

}  // namespace worksim
