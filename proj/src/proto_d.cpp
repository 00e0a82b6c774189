#include <worksim/proto_d.hpp>

#include <algorithm>
#include <cmath>

namespace worksim {

std::set<WorkUnitId> allot(const std::set<WorkUnitId>& remaining,
                           const std::set<ProcessId>& live, ProcessId j) {
  std::set<WorkUnitId> share;
  auto it = live.find(j);
  if (it == live.end() || remaining.empty()) return share;
  long long rank = std::distance(live.begin(), it);
  long long count = static_cast<long long>(live.size());
  long long total = static_cast<long long>(remaining.size());
  long long quota = (total + count - 1) / count;
  auto from = remaining.begin();
  std::advance(from, std::min(rank * quota, total));
  auto to = remaining.begin();
  std::advance(to, std::min((rank + 1) * quota, total));
  share.insert(from, to);
  return share;
}

ProtoD::ProtoD(long long n, int t) : n_(n), t_(t) {
  if (n < 1) throw ConfigError("unit count must be positive");
  if (t < 1) throw ConfigError("process count must be positive");
  procs_.resize(t);
  for (ProcessId p = 0; p < t; ++p) {
    PState& st = procs_[p];
    for (WorkUnitId u = 1; u <= n; ++u) st.s.insert(u);
    for (ProcessId q = 0; q < t; ++q) st.t.insert(q);
    begin_work_phase(st, p);
  }
}

Mode ProtoD::mode(ProcessId p) const { return procs_[p].mode; }

void ProtoD::begin_work_phase(PState& st, ProcessId p) {
  st.sub = Sub::Work;
  auto mine = allot(st.s, st.t, p);
  st.share.assign(mine.begin(), mine.end());
  st.work_done = 0;
  long long total = static_cast<long long>(st.s.size());
  long long count = static_cast<long long>(st.t.size());
  st.work_len = count > 0 ? (total + count - 1) / count : 0;
}

void ProtoD::begin_agreement(PState& st, ProcessId p) {
  for (WorkUnitId w : st.share) st.s.erase(w);
  st.sub = Sub::Agree;
  st.snap0 = st.t;
  st.u = st.t;
  st.t = {p};
  st.u_prev.clear();
  // Phase starts drift apart by at most one round, so the first exchange of
  // every phase after the first is a grace window: silence there is lag, not
  // death.  In phase one everybody starts together and judgement is
  // immediate.
  st.round_var = st.phase == 1 ? 1 : 0;
  st.sent_initial = false;
}

Action ProtoD::broadcast(const PState& st, ProcessId p, bool done) const {
  std::vector<ProcessId> to;
  for (ProcessId q : st.u)
    if (q != p) to.push_back(q);
  if (to.empty()) return ActIdle{};
  ViewD msg;
  msg.remaining.assign(st.s.begin(), st.s.end());
  msg.live.assign(st.t.begin(), st.t.end());
  msg.phase = st.phase;
  msg.done = done;
  return ActSend{{Send{msg, to}}};
}

Action ProtoD::on_done(PState& st, ProcessId p, const Round& r) {
  Action final_word = broadcast(st, p, true);
  if (st.s.empty()) {
    st.mode = Mode::Terminated;
    if (std::holds_alternative<ActIdle>(final_word)) return ActRetire{};
    return final_word;
  }
  if (static_cast<long long>(st.snap0.size()) >
      2 * static_cast<long long>(st.t.size())) {
    // Most of the roster died this phase; stop iterating and hand the
    // leftovers to an embedded checkpoint-chain run on a square roster.
    fallback_seen_ = true;
    int square = static_cast<int>(std::sqrt(static_cast<double>(st.t.size())));
    while ((square + 1) * (square + 1) <= static_cast<int>(st.t.size()))
      ++square;
    while (square * square > static_cast<int>(st.t.size())) --square;
    int tp = square * square;
    st.participants.assign(st.t.begin(), st.t.end());
    st.participants.resize(tp);
    st.unit_map.assign(st.s.begin(), st.s.end());
    long long real = static_cast<long long>(st.unit_map.size());
    long long padded = (real + tp - 1) / tp * tp;
    st.embedded = std::make_unique<ProtoA>(padded, tp);
    st.embed_offset = r;
    st.sub = Sub::Fallback;
    if (std::find(st.participants.begin(), st.participants.end(), p) ==
        st.participants.end())
      st.mode = Mode::Terminated;
    return final_word;
  }
  st.phase += 1;
  begin_work_phase(st, p);
  return final_word;
}

Action ProtoD::fallback_step(PState& st, ProcessId p, const Round& r,
                             const Inbox& inbox) {
  auto pos = std::find(st.participants.begin(), st.participants.end(), p);
  ProcessId aid =
      static_cast<ProcessId>(std::distance(st.participants.begin(), pos));
  Inbox translated;
  for (const auto& m : inbox) {
    if (!std::holds_alternative<PartialCkpt>(m.payload) &&
        !std::holds_alternative<FullCkpt>(m.payload))
      continue;
    auto sp = std::find(st.participants.begin(), st.participants.end(),
                        m.sender);
    if (sp == st.participants.end()) continue;
    translated.push_back(
        {static_cast<ProcessId>(std::distance(st.participants.begin(), sp)),
         m.payload});
  }
  Action act = st.embedded->step(aid, r - st.embed_offset, translated);
  if (st.embedded->mode(aid) == Mode::Terminated) {
    st.mode = Mode::Terminated;
    st.s.clear();
  }
  if (auto* w = std::get_if<ActWork>(&act)) {
    auto remap_sends = [&](const std::vector<Send>& sends) {
      std::vector<Send> out;
      for (const auto& s : sends) {
        std::vector<ProcessId> to;
        for (ProcessId q : s.to) to.push_back(st.participants[q]);
        out.push_back({s.payload, to});
      }
      return out;
    };
    if (w->unit <= static_cast<WorkUnitId>(st.unit_map.size()))
      return ActWork{st.unit_map[w->unit - 1], remap_sends(w->sends)};
    return ActIdle{};  // phantom padding unit
  }
  if (auto* s = std::get_if<ActSend>(&act)) {
    ActSend out;
    for (const auto& send : s->batch) {
      std::vector<ProcessId> to;
      for (ProcessId q : send.to) to.push_back(st.participants[q]);
      out.batch.push_back({send.payload, to});
    }
    return out;
  }
  return act;
}

Action ProtoD::step(ProcessId p, const Round& r, const Inbox& inbox) {
  PState& st = procs_[p];
  // Views only mean anything inside the agreement they were sent for.  The
  // last completion echoes of one agreement land while their receiver is
  // already working the next phase (or, when that work takes a single round,
  // inside the next agreement's first window), so anything from another
  // phase is dropped unread.
  if (st.sub == Sub::Agree) {
    for (const auto& m : inbox) {
      const auto* vd = std::get_if<ViewD>(&m.payload);
      if (vd && vd->phase == st.phase) st.buffer.push_back({m.sender, *vd});
    }
  }
  if (st.sub == Sub::Fallback) return fallback_step(st, p, r, inbox);
  if (st.sub == Sub::Work) {
    Action act = ActIdle{};
    if (st.work_done < static_cast<long long>(st.share.size()))
      act = ActWork{st.share[st.work_done], {}};
    st.work_done += 1;
    if (st.work_done >= st.work_len) begin_agreement(st, p);
    return act;
  }
  if (!st.sent_initial) {
    st.sent_initial = true;
    st.u_prev = st.u;
    return broadcast(st, p, false);
  }
  // One exchange per round: merge every current view, adopt a finished one
  // wholesale, drop members that stayed silent.  A member that finished is
  // never silently dropped before its final view arrives, because it sends
  // in every window up to and including that one.
  bool judging = st.round_var >= 1;
  bool done = false;
  for (ProcessId i : st.u_prev) {
    if (i == p) continue;
    bool heard = false;
    for (const auto& [from, msg] : st.buffer) {
      if (from != i) continue;
      heard = true;
      if (msg.done) {
        st.s.clear();
        st.s.insert(msg.remaining.begin(), msg.remaining.end());
        st.t.clear();
        st.t.insert(msg.live.begin(), msg.live.end());
        done = true;
      } else {
        std::set<WorkUnitId> rem(msg.remaining.begin(), msg.remaining.end());
        std::set<WorkUnitId> both;
        std::set_intersection(st.s.begin(), st.s.end(), rem.begin(),
                              rem.end(), std::inserter(both, both.begin()));
        st.s.swap(both);
        st.t.insert(msg.live.begin(), msg.live.end());
      }
    }
    if (!heard && judging) st.u.erase(i);
  }
  // Nobody dropped out between two consecutive exchanges: everyone still
  // counted as live was heard in both, so every one of them has already
  // folded in everything this process knows, and the merge is final.
  if (judging && st.u == st.u_prev) done = true;
  st.round_var += 1;
  st.buffer.clear();
  if (done) return on_done(st, p, r);
  st.u_prev = st.u;
  return broadcast(st, p, false);
}

std::optional<Round> ProtoD::next_wake(ProcessId p, const Round& r) const {
  const PState& st = procs_[p];
  if (st.mode == Mode::Terminated) return std::nullopt;
  if (st.sub == Sub::Fallback) {
    auto pos = std::find(st.participants.begin(), st.participants.end(), p);
    ProcessId aid =
        static_cast<ProcessId>(std::distance(st.participants.begin(), pos));
    auto w = st.embedded->next_wake(aid, r - st.embed_offset);
    if (!w) return std::nullopt;
    return *w + st.embed_offset;
  }
  return r + 1;
}

}  // namespace worksim
