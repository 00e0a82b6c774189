#include <worksim/engine.hpp>

#include <algorithm>
#include <cstddef>
#include <set>

namespace worksim {

bool SubsetSelector::delivers(std::size_t batch_index,
                              ProcessId recipient) const {
  switch (kind) {
    case Kind::Empty:
      return false;
    case Kind::Full:
      return true;
    case Kind::Prefix:
      return static_cast<long long>(batch_index) < prefix_len;
    case Kind::Mask:
      return batch_index < 64 && ((mask_bits >> batch_index) & 1ULL) != 0;
    case Kind::Pids:
      return std::find(pids.begin(), pids.end(), recipient) != pids.end();
  }
  throw DomainError("unknown subset kind");
}

namespace {

struct Provisional {
  bool stepped = false;
  Mode mode_before = Mode::Inactive;
  Mode mode_after = Mode::Inactive;
  std::vector<Send> reply_sends;  // poll answers, before the action's sends
  Action action = ActIdle{};
  std::size_t envelope_count = 0;
};

long long* bucket_for(MessageCounts& counts, const Payload& payload) {
  if (std::holds_alternative<PartialCkpt>(payload) ||
      std::holds_alternative<FullCkpt>(payload) ||
      std::holds_alternative<OrdinaryC>(payload))
    return &counts.ordinary;
  if (std::holds_alternative<GoAhead>(payload)) return &counts.go_ahead;
  if (std::holds_alternative<Poll>(payload)) return &counts.poll;
  if (std::holds_alternative<PollReply>(payload)) return &counts.poll_reply;
  if (std::holds_alternative<ViewD>(payload)) return &counts.view_d;
  if (std::holds_alternative<Inform>(payload)) return &counts.inform;
  throw DomainError("unbucketed payload");
}

std::size_t count_envelopes(const Provisional& prov) {
  std::size_t n = 0;
  for (const auto& s : prov.reply_sends) n += s.to.size();
  if (const auto* w = std::get_if<ActWork>(&prov.action)) {
    for (const auto& s : w->sends) n += s.to.size();
  } else if (const auto* s = std::get_if<ActSend>(&prov.action)) {
    for (const auto& b : s->batch) n += b.to.size();
  }
  return n;
}

struct Context final : AdversaryContext {
  const std::vector<Provisional>* prov = nullptr;
  const std::vector<Mode>* modes = nullptr;
  std::size_t batch_size(ProcessId p) const override {
    return (*prov)[static_cast<std::size_t>(p)].envelope_count;
  }
  Mode mode(ProcessId p) const override {
    return (*modes)[static_cast<std::size_t>(p)];
  }
};

}  // namespace

Engine::Engine(Protocol& protocol, Adversary& adversary, RunParams params)
    : protocol_(protocol), adversary_(adversary), params_(params) {}

void Engine::add_observer(Observer* obs) { observers_.push_back(obs); }

RunResult Engine::run() {
  const int nproc = protocol_.num_processes();
  if (nproc <= 0) throw ConfigError("protocol has no processes");

  RunResult result;
  result.trace.header.protocol = protocol_.name();
  result.trace.header.num_units = protocol_.num_units();
  result.trace.header.fault_budget = protocol_.fault_budget();
  result.trace.header.num_processes = nproc;

  std::vector<bool> crashed(static_cast<std::size_t>(nproc), false);
  std::vector<MessageEnvelope> flight;
  std::map<WorkUnitId, long long> performed;
  Metrics& metrics = result.metrics;

  auto engine_mode = [&](ProcessId p) {
    return crashed[static_cast<std::size_t>(p)] ? Mode::Crashed
                                                : protocol_.mode(p);
  };
  auto is_live = [&](ProcessId p) {
    Mode m = engine_mode(p);
    return m == Mode::Inactive || m == Mode::Preactive || m == Mode::Active;
  };
  auto any_live = [&] {
    for (ProcessId p = 0; p < nproc; ++p)
      if (is_live(p)) return true;
    return false;
  };

  std::vector<Mode> mode_view(static_cast<std::size_t>(nproc));
  auto refresh_modes = [&] {
    for (ProcessId p = 0; p < nproc; ++p)
      mode_view[static_cast<std::size_t>(p)] = engine_mode(p);
  };

  Round r = 1;
  long long executed = 0;
  bool finished_clean = !any_live();

  while (!finished_clean) {
    if (++executed > params_.max_executed_rounds)
      throw DomainError("executed round cap exceeded");

    // Phase 1: deliver everything sent last round.
    std::vector<Inbox> inboxes(static_cast<std::size_t>(nproc));
    std::vector<std::vector<ProcessId>> pollers(static_cast<std::size_t>(nproc));
    for (const auto& env : flight) {
      if (env.send_round + 1 != r)
        throw DomainError("stale message in flight");
      if (crashed[static_cast<std::size_t>(env.recipient)]) continue;
      if (std::holds_alternative<Poll>(env.payload))
        pollers[static_cast<std::size_t>(env.recipient)].push_back(env.sender);
      else
        inboxes[static_cast<std::size_t>(env.recipient)].push_back(
            {env.sender, env.payload});
    }
    flight.clear();
    for (auto& inbox : inboxes)
      std::sort(inbox.begin(), inbox.end(),
                [](const ReceivedMessage& a, const ReceivedMessage& b) {
                  return a.sender < b.sender;
                });
    for (auto& ps : pollers) std::sort(ps.begin(), ps.end());

    // Phase 2: poll answers, generated without consuming the action.
    std::vector<Provisional> prov(static_cast<std::size_t>(nproc));
    for (ProcessId p = 0; p < nproc; ++p) {
      auto& pr = prov[static_cast<std::size_t>(p)];
      if (crashed[static_cast<std::size_t>(p)]) continue;
      pr.mode_before = protocol_.mode(p);
      pr.mode_after = pr.mode_before;
      if (!pollers[static_cast<std::size_t>(p)].empty() &&
          protocol_.answers_poll(p)) {
        for (ProcessId q : pollers[static_cast<std::size_t>(p)])
          pr.reply_sends.push_back({PollReply{}, {q}});
      }
    }

    // Phase 3: step live processes in id order.
    for (ProcessId p = 0; p < nproc; ++p) {
      if (!is_live(p)) continue;
      auto& pr = prov[static_cast<std::size_t>(p)];
      pr.stepped = true;
      pr.action = protocol_.step(p, r, inboxes[static_cast<std::size_t>(p)]);
      pr.mode_after = protocol_.mode(p);
      pr.envelope_count = count_envelopes(pr);
    }
    for (ProcessId p = 0; p < nproc; ++p) {
      auto& pr = prov[static_cast<std::size_t>(p)];
      if (!pr.stepped) pr.envelope_count = count_envelopes(pr);
    }

    // Phase 4: adversary decides this round's crashes.
    refresh_modes();
    Context ctx;
    ctx.prov = &prov;
    ctx.modes = &mode_view;
    std::vector<CrashDirective> directives =
        adversary_.crashes_for_round(r, ctx);
    std::sort(directives.begin(), directives.end(),
              [](const CrashDirective& a, const CrashDirective& b) {
                return a.process < b.process;
              });
    std::vector<CrashDirective> applied;
    for (auto& d : directives) {
      if (d.process < 0 || d.process >= nproc)
        throw ConfigError("crash directive targets unknown process");
      if (d.round != r) throw DomainError("crash directive for wrong round");
      Mode m = engine_mode(d.process);
      if (m == Mode::Crashed)
        throw ConfigError("process " + std::to_string(d.process) +
                          " crashes twice");
      if (m == Mode::Terminated) continue;  // nothing left to crash
      if (d.pre_action) d.subset = SubsetSelector{};  // batch is empty
      applied.push_back(std::move(d));
    }
    auto directive_for = [&](ProcessId p) -> const CrashDirective* {
      for (const auto& d : applied)
        if (d.process == p) return &d;
      return nullptr;
    };

    // Phase 5: commit surviving effects in process id order.
    RoundRecord rec;
    rec.round = r;
    for (ProcessId p = 0; p < nproc; ++p) {
      auto& pr = prov[static_cast<std::size_t>(p)];
      const CrashDirective* dir = directive_for(p);
      if (dir && dir->pre_action) continue;  // acted never

      if (pr.mode_after != pr.mode_before && pr.mode_after != Mode::Terminated)
        rec.events.push_back(EvMode{p, pr.mode_after});

      // Flatten the outgoing batch in canonical order: poll answers first,
      // then the action's sends. Crash subsets address this order.
      std::vector<Send> batch = pr.reply_sends;
      const ActWork* work = std::get_if<ActWork>(&pr.action);
      const ActRetire* retire = std::get_if<ActRetire>(&pr.action);
      if (work)
        batch.insert(batch.end(), work->sends.begin(), work->sends.end());
      else if (const auto* send = std::get_if<ActSend>(&pr.action))
        batch.insert(batch.end(), send->batch.begin(), send->batch.end());

      if (dir && dir->subset.kind == SubsetSelector::Kind::Pids) {
        std::set<ProcessId> recipients;
        for (const auto& s : batch)
          for (ProcessId q : s.to) recipients.insert(q);
        for (ProcessId q : dir->subset.pids)
          if (!recipients.count(q))
            throw ConfigError(
                "deliver_to lists process " + std::to_string(q) +
                ", not a recipient of the crashing process's batch");
      }

      if (work) {
        metrics.work_total += 1;
        long long& times = performed[work->unit];
        times += 1;
        if (times > 1) metrics.work_redundant += 1;
        rec.events.push_back(EvWork{p, work->unit});
      }

      std::size_t batch_index = 0;
      for (const auto& s : batch) {
        std::vector<ProcessId> delivered;
        for (ProcessId q : s.to) {
          if (q < 0 || q >= nproc) throw DomainError("send to unknown process");
          bool keep = !dir || dir->subset.delivers(batch_index, q);
          ++batch_index;
          if (!keep) continue;
          delivered.push_back(q);
          flight.push_back({p, q, r, s.payload});
        }
        *bucket_for(metrics.messages, s.payload) +=
            static_cast<long long>(delivered.size());
        rec.events.push_back(EvSend{p, s.payload, std::move(delivered)});
      }

      if (pr.stepped && pr.mode_after == Mode::Terminated) {
        if (retire && retire->decide) {
          metrics.decisions[p] = *retire->decide;
          rec.events.push_back(EvDecide{p, *retire->decide});
        }
        rec.events.push_back(EvRetire{p});
      }
    }
    for (const auto& d : applied) {
      rec.events.push_back(EvCrash{d.process, d.pre_action, d.subset});
      crashed[static_cast<std::size_t>(d.process)] = true;
      metrics.failures_injected += 1;
    }

    if (!rec.events.empty()) {
      refresh_modes();
      EngineSnapshot snap{protocol_, mode_view, r, metrics};
      for (Observer* obs : observers_) obs->on_round(rec, snap, result.verdict);
      if (params_.abort_on_violation && !result.verdict.pass)
        throw CheckViolation(result.verdict.violations.front());
      if (params_.record_trace) result.trace.rounds.push_back(rec);
    }

    if (!any_live()) {
      metrics.rounds_until_all_retired = r;
      finished_clean = true;
      break;
    }

    // Choose the next round to execute.
    if (!flight.empty()) {
      r += 1;
      continue;
    }
    std::optional<Round> next;
    for (ProcessId p = 0; p < nproc; ++p) {
      if (!is_live(p)) continue;
      auto wake = protocol_.next_wake(p, r);
      if (wake) {
        if (*wake <= r) throw DomainError("next_wake not in the future");
        if (!next || *wake < *next) next = *wake;
      }
    }
    if (auto crash = adversary_.next_crash_after(r)) {
      if (!next || *crash < *next) next = *crash;
    }
    if (!next)
      throw DomainError("live processes remain but no event is scheduled");
    r = params_.disable_fast_forward ? r + 1 : *next;
  }

  long long units_done = 0;
  for (const auto& [unit, times] : performed)
    if (unit >= 1 && unit <= protocol_.num_units() && times > 0)
      units_done += 1;
  metrics.completed = units_done == protocol_.num_units();

  refresh_modes();
  protocol_.finalize_metrics(metrics, mode_view);
  EngineSnapshot snap{protocol_, mode_view, r, metrics};
  for (Observer* obs : observers_) obs->on_end(snap, result.verdict);
  if (params_.abort_on_violation && !result.verdict.pass)
    throw CheckViolation(result.verdict.violations.front());
  return result;
}

RunResult simulate(Protocol& protocol, Adversary& adversary, RunParams params) {
  Engine engine(protocol, adversary, params);
  return engine.run();
}

}  // namespace worksim
