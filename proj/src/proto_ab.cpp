#include <worksim/proto_ab.hpp>

#include <algorithm>

namespace worksim {

int isqrt_exact(int t) {
  if (t < 1) throw ConfigError("t must be positive");
  int s = 0;
  while ((s + 1) * (s + 1) <= t) ++s;
  if (s * s != t) throw ConfigError("t must be a perfect square");
  return s;
}

int group_of(ProcessId i, int t) {
  int st = isqrt_exact(t);
  return static_cast<int>(i) / st + 1;
}

std::vector<ProcessId> group_members(int g, int t) {
  int st = isqrt_exact(t);
  std::vector<ProcessId> out;
  for (int k = 0; k < st; ++k) out.push_back((g - 1) * st + k);
  return out;
}

Round dd_a(ProcessId j, long long n, int t) {
  return Round(j) * (n + 3LL * t);
}

long long pto(long long n, int t) { return n / t + 2; }

long long gto(int bar_i, long long n, int t) {
  int st = isqrt_exact(t);
  return n / st + 3LL * st + (st - bar_i - 1) * pto(n, t) + 1;
}

Round dd_b(ProcessId j, ProcessId i, long long n, int t) {
  if (j <= i) throw ConfigError("takeover deadline needs j > i");
  int st = isqrt_exact(t);
  int gj = group_of(j, t), gi = group_of(i, t);
  if (gj == gi) return Round(j - i) * pto(n, t);
  int bar_i = i - (gi - 1) * st;
  int bar_j = j - (gj - 1) * st;
  return Round(gto(bar_i, n, t)) + Round(gj - gi - 1) * gto(0, n, t) +
         Round(bar_j) * pto(n, t);
}

namespace {

void validate_shape(long long n, int t) {
  isqrt_exact(t);
  if (n < t || n % t != 0)
    throw ConfigError("n must be a positive multiple of t, at least t");
}

std::vector<ProcessId> remainder_of(ProcessId self, int t) {
  auto members = group_members(group_of(self, t), t);
  std::erase(members, self);
  return members;
}

struct Ranked {
  long long c;
  int g;
  bool operator<(const Ranked& o) const {
    return c != o.c ? c < o.c : g < o.g;
  }
};

// Adopts strictly better checkpoints; returns whether anything was heard.
bool fold_checkpoint(CheckpointKnowledge& know, const ReceivedMessage& msg) {
  long long c;
  int g;
  if (const auto* part = std::get_if<PartialCkpt>(&msg.payload)) {
    c = part->c;
    g = 0;
  } else if (const auto* full = std::get_if<FullCkpt>(&msg.payload)) {
    c = full->c;
    g = full->g;
  } else {
    return false;
  }
  if (Ranked{know.c, know.g} < Ranked{c, g}) {
    know.c = c;
    know.g = g;
    know.sender = msg.sender;
  }
  return true;
}

// A checkpoint that releases its recipients within the sender's own group.
bool releases(const ReceivedMessage& msg, int own_group, int t) {
  if (const auto* part = std::get_if<PartialCkpt>(&msg.payload))
    return part->c == t;
  if (const auto* full = std::get_if<FullCkpt>(&msg.payload))
    return full->c == t && full->g == own_group;
  return false;
}

}  // namespace

std::vector<PlanStep> checkpoint_plan(ProcessId self, long long n, int t,
                                      const CheckpointKnowledge& resume) {
  validate_shape(n, t);
  const int st = isqrt_exact(t);
  const int gamma = group_of(self, t);
  const long long chunk = n / t;
  const auto remainder = remainder_of(self, t);

  std::vector<PlanStep> plan;
  auto cascade = [&](long long c, int from_g) {
    for (int g = from_g; g <= st; ++g) {
      plan.push_back(PlanBroadcast{FullCkpt{c, g}, group_members(g, t)});
      plan.push_back(PlanBroadcast{FullCkpt{c, g}, remainder});
    }
  };

  if (resume.c > 0) {
    if (resume.g == 0) {
      if (resume.c % st == 0) {
        plan.push_back(PlanBroadcast{PartialCkpt{resume.c}, remainder});
        cascade(resume.c, gamma + 1);
      }
    } else if (resume.sender >= 0 && group_of(resume.sender, t) == gamma) {
      // A group mate fell mid-cascade: repeat its step locally, then carry
      // the cascade onward from the next group.
      plan.push_back(PlanBroadcast{FullCkpt{resume.c, resume.g}, remainder});
      cascade(resume.c, resume.g + 1);
    } else {
      plan.push_back(PlanBroadcast{PartialCkpt{resume.c}, remainder});
      cascade(resume.c, gamma + 1);
    }
  }

  for (long long s = resume.c + 1; s <= t; ++s) {
    for (long long u = (s - 1) * chunk + 1; u <= s * chunk; ++u)
      plan.push_back(PlanWork{u});
    plan.push_back(PlanBroadcast{PartialCkpt{s}, remainder});
    if (s % st == 0) cascade(s, gamma + 1);
  }
  return plan;
}

// ---- Eager variant ----

ProtoA::ProtoA(long long n, int t) : n_(n), t_(t) {
  validate_shape(n, t);
  procs_.resize(static_cast<std::size_t>(t));
  procs_[0].mode = Mode::Active;
  procs_[0].plan = checkpoint_plan(0, n_, t_, CheckpointKnowledge{});
}

Mode ProtoA::mode(ProcessId p) const {
  return procs_[static_cast<std::size_t>(p)].mode;
}

Action ProtoA::activate(PState& st, ProcessId p) {
  st.plan = checkpoint_plan(p, n_, t_, st.know);
  st.pos = 0;
  if (st.plan.empty()) {
    st.mode = Mode::Terminated;
    return ActRetire{};
  }
  st.mode = Mode::Active;
  return ActIdle{};  // caller issues the first plan step
}

Action ProtoA::step(ProcessId p, const Round& r, const Inbox& inbox) {
  PState& st = procs_[static_cast<std::size_t>(p)];
  if (st.mode == Mode::Inactive) {
    const int gamma = group_of(p, t_);
    for (const auto& msg : inbox) {
      fold_checkpoint(st.know, msg);
      if (releases(msg, gamma, t_)) {
        st.mode = Mode::Terminated;
        return ActRetire{};
      }
    }
    if (r < dd_a(p, n_, t_)) return ActIdle{};
    Action a = activate(st, p);
    if (st.mode == Mode::Terminated) return a;
  }
  // Active: run the plan, one step per round; the inbox carries nothing an
  // active process acts on.
  PlanStep& stepv = st.plan[st.pos];
  ++st.pos;
  if (st.pos == st.plan.size()) st.mode = Mode::Terminated;
  if (const auto* w = std::get_if<PlanWork>(&stepv)) return ActWork{w->unit, {}};
  const auto& b = std::get<PlanBroadcast>(stepv);
  return ActSend{{Send{b.payload, b.to}}};
}

std::optional<Round> ProtoA::next_wake(ProcessId p, const Round& r) const {
  const PState& st = procs_[static_cast<std::size_t>(p)];
  if (st.mode == Mode::Active) return r + 1;
  if (st.mode == Mode::Inactive) {
    Round dd = dd_a(p, n_, t_);
    return dd > r ? dd : r + 1;
  }
  return std::nullopt;
}

// ---- Message-lean variant ----

ProtoB::ProtoB(long long n, int t) : n_(n), t_(t) {
  validate_shape(n, t);
  procs_.resize(static_cast<std::size_t>(t));
  procs_[0].mode = Mode::Active;
  procs_[0].plan = checkpoint_plan(0, n_, t_, CheckpointKnowledge{});
}

Mode ProtoB::mode(ProcessId p) const {
  return procs_[static_cast<std::size_t>(p)].mode;
}

std::optional<Action> ProtoB::activate(PState& st, ProcessId p) {
  st.plan = checkpoint_plan(p, n_, t_, st.know);
  st.pos = 0;
  if (st.plan.empty()) {
    st.mode = Mode::Terminated;
    return ActRetire{};
  }
  st.mode = Mode::Active;
  return std::nullopt;
}

std::optional<Action> ProtoB::enter_probe_or_activate(PState& st, ProcessId p,
                                                      const Round& r,
                                                      bool fresh_entry) {
  if (fresh_entry) {
    const int stq = isqrt_exact(t_);
    const int gamma = group_of(p, t_);
    st.cursor = group_of(st.heard_from, t_) != gamma
                    ? static_cast<ProcessId>((gamma - 1) * stq)
                    : static_cast<ProcessId>(st.heard_from + 1);
  } else {
    st.cursor += 1;
  }
  if (st.cursor >= p) return activate(st, p);
  st.mode = Mode::Preactive;
  st.window_close = r + pto(n_, t_);
  return Action{ActSend{{Send{GoAhead{}, {st.cursor}}}}};
}

Action ProtoB::step(ProcessId p, const Round& r, const Inbox& inbox) {
  PState& st = procs_[static_cast<std::size_t>(p)];

  if (st.mode != Mode::Active) {
    const int gamma = group_of(p, t_);
    bool heard = false;
    ProcessId best_sender = -1;
    Ranked best{-1, -1};
    bool go_ahead = false;
    for (const auto& msg : inbox) {
      if (std::holds_alternative<GoAhead>(msg.payload)) {
        go_ahead = true;
        continue;
      }
      if (!fold_checkpoint(st.know, msg)) continue;
      heard = true;
      long long c = 0;
      int g = 0;
      if (const auto* part = std::get_if<PartialCkpt>(&msg.payload)) {
        c = part->c;
      } else {
        const auto& full = std::get<FullCkpt>(msg.payload);
        c = full.c;
        g = full.g;
      }
      if (best < Ranked{c, g}) {
        best = Ranked{c, g};
        best_sender = msg.sender;
      }
      if (releases(msg, gamma, t_)) {
        st.mode = Mode::Terminated;
        return ActRetire{};
      }
    }
    if (heard) {
      st.heard_round = r;
      if (best_sender >= 0 && best_sender < p) st.heard_from = best_sender;
      st.mode = Mode::Inactive;  // any sign of life cancels a probe window
    }

    std::optional<Action> out;
    if (go_ahead) {
      out = activate(st, p);
    } else if (st.mode == Mode::Preactive) {
      out = r >= st.window_close ? enter_probe_or_activate(st, p, r, false)
                                 : std::optional<Action>{ActIdle{}};
    } else {
      out = r >= st.heard_round + dd_b(p, st.heard_from, n_, t_)
                ? enter_probe_or_activate(st, p, r, true)
                : std::optional<Action>{ActIdle{}};
    }
    if (out) return *out;
  }

  PlanStep& stepv = st.plan[st.pos];
  ++st.pos;
  if (st.pos == st.plan.size()) st.mode = Mode::Terminated;
  if (const auto* w = std::get_if<PlanWork>(&stepv)) return ActWork{w->unit, {}};
  const auto& b = std::get<PlanBroadcast>(stepv);
  return ActSend{{Send{b.payload, b.to}}};
}

std::optional<Round> ProtoB::next_wake(ProcessId p, const Round& r) const {
  const PState& st = procs_[static_cast<std::size_t>(p)];
  switch (st.mode) {
    case Mode::Active:
      return r + 1;
    case Mode::Preactive:
      return st.window_close > r ? st.window_close : r + 1;
    case Mode::Inactive: {
      Round dd = st.heard_round + dd_b(p, st.heard_from, n_, t_);
      return dd > r ? dd : r + 1;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace worksim
