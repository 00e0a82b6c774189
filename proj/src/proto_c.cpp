#include <worksim/proto_c.hpp>

#include <algorithm>

namespace worksim {

int log2_exact(int t) {
  if (t < 1) throw ConfigError("process count must be positive");
  int lg = 0;
  int v = t;
  while (v > 1) {
    if (v % 2 != 0) throw ConfigError("process count must be a power of two");
    v /= 2;
    ++lg;
  }
  return lg;
}

int c_group_size(int level, int t) {
  return 1 << (log2_exact(t) - level + 1);
}

long long c_group_index(ProcessId p, int level, int t) {
  return p / c_group_size(level, t);
}

long long c_scale_plain(int t) { return 5LL * t + 2LL * log2_exact(t); }

long long c_scale_batched(long long n, int t) {
  return 2 * n + 3LL * t + 2LL * log2_exact(t);
}

Round c_deadline(ProcessId i, long long m, long long n, int t, long long k) {
  // m == 0 holders have identical views, so their deadlines stagger by id;
  // informed processes sleep exponentially shorter the more they know.
  if (m == 0) return Round(k) * (t - i) * (n + t) << (n + t - 1);
  return Round(k) * (n + t - m) << (n + t - 1 - m);
}

long long reduced_view(const ViewC& view) {
  return view.point_work - 1 + static_cast<long long>(view.faulty.size());
}

void merge_view(ViewC& dst, const ViewC& src) {
  dst.faulty.insert(src.faulty.begin(), src.faulty.end());
  if (src.point_work > dst.point_work) {
    dst.point_work = src.point_work;
    dst.round_work = src.round_work;
  } else if (src.point_work == dst.point_work &&
             src.round_work > dst.round_work) {
    dst.round_work = src.round_work;
  }
  for (const auto& [key, pt] : src.point) {
    auto it = src.round.find(key);
    Round incoming = it == src.round.end() ? Round(0) : it->second;
    if (incoming > dst.round[key]) {
      dst.point[key] = pt;
      dst.round[key] = incoming;
    }
  }
}

ViewC initial_view(ProcessId p, long long, int t) {
  ViewC v;
  int levels = log2_exact(t);
  for (int h = 1; h <= levels; ++h) {
    int size = c_group_size(h, t);
    for (int idx = 0; idx * size < t; ++idx) {
      ProcessId first = idx * size;
      GroupKey key{h, idx};
      v.point[key] = first == p ? first + 1 : first;
      v.round[key] = 0;
    }
  }
  return v;
}

ProtoC::ProtoC(long long n, int t, bool batched)
    : n_(n), t_(t), batched_(batched) {
  if (n < 1) throw ConfigError("unit count must be positive");
  levels_ = log2_exact(t);
  if (n + t - 1 > 250)
    throw ConfigError("deadline 2^(n+t-1) exceeds round arithmetic range");
  scale_ = batched ? c_scale_batched(n, t) : c_scale_plain(t);
  batch_quota_ = batched ? (n + t - 1) / t : 1;
  procs_.resize(t);
  for (ProcessId p = 0; p < t; ++p) procs_[p].view = initial_view(p, n, t);
}

Mode ProtoC::mode(ProcessId p) const { return procs_[p].mode; }

const ViewC& ProtoC::view_of(ProcessId p) const { return procs_[p].view; }

Round ProtoC::heard_round_of(ProcessId p) const {
  return procs_[p].heard_round;
}

long long ProtoC::activation_view_of(ProcessId p) const {
  return procs_[p].activation_m;
}

ProcessId ProtoC::candidate(const PState& st, ProcessId p, int level) const {
  GroupKey key{level, c_group_index(p, level, t_)};
  auto it = st.view.point.find(key);
  ProcessId from = it == st.view.point.end() ? 0 : it->second;
  int size = c_group_size(level, t_);
  ProcessId last = static_cast<ProcessId>(key.index * size + size - 1);
  for (ProcessId q = std::max(from, ProcessId(key.index * size)); q <= last;
       ++q) {
    if (q == p || st.view.faulty.count(q)) continue;
    return q;
  }
  return -1;
}

std::optional<ProcessId> ProtoC::report_target(PState& st, ProcessId p) {
  for (int k = 0; k < t_; ++k) {
    ProcessId q = (st.rr + k) % t_;
    if (q == p || st.view.faulty.count(q)) continue;
    st.rr = (q + 1) % t_;
    return q;
  }
  return std::nullopt;
}

Action ProtoC::active_step(PState& st, ProcessId p, const Round& r,
                           const Inbox& inbox) {
  if (st.sub == Sub::Await) {
    if (r < st.eval_round) return ActIdle{};
    bool replied = false;
    for (const auto& m : inbox) {
      if (m.sender == st.poll_target &&
          std::holds_alternative<PollReply>(m.payload))
        replied = true;
    }
    if (replied) {
      st.h -= 1;  // coordinator confirmed alive; widen to the next group
      st.sub = Sub::Poll;
    } else {
      st.view.faulty.insert(st.poll_target);
      GroupKey key{st.h, c_group_index(p, st.h, t_)};
      st.sub = Sub::Poll;
      ProcessId succ = candidate(st, p, st.h);
      st.view.point[key] = succ < 0 ? t_ : succ;
      st.view.round[key] = r;
      if (st.h != levels_) {
        // The already-verified inner coordinator must learn of the casualty.
        ProcessId inner = candidate(st, p, st.h + 1);
        if (inner >= 0)
          return ActSend{{Send{OrdinaryC{st.view, std::nullopt}, {inner}}}};
      }
    }
  }
  if (st.sub == Sub::Poll) {
    while (st.h >= 1 && candidate(st, p, st.h) < 0) st.h -= 1;
    if (st.h >= 1) {
      ProcessId target = candidate(st, p, st.h);
      st.poll_target = target;
      st.eval_round = r + 2;
      st.sub = Sub::Await;
      return ActSend{{Send{Poll{}, {target}}}};
    }
    st.sub = Sub::Work;
  }
  if (st.report_pending) {
    st.report_pending = false;
    auto tgt = report_target(st, p);
    if (tgt) {
      if (st.view.point_work > n_) st.mode = Mode::Terminated;
      return ActSend{{Send{OrdinaryC{st.view, std::nullopt}, {*tgt}}}};
    }
  }
  if (st.view.point_work > n_) {
    st.mode = Mode::Terminated;
    return ActRetire{};
  }
  long long unit = st.view.point_work;
  st.view.point_work += 1;
  st.view.round_work = r;
  st.batch_count += 1;
  if (!batched_ || st.batch_count >= batch_quota_ ||
      st.view.point_work > n_) {
    st.batch_count = 0;
    PState probe = st;
    if (report_target(probe, p))
      st.report_pending = true;
    else if (st.view.point_work > n_)
      st.mode = Mode::Terminated;  // finished with nobody left to tell
  }
  return ActWork{unit, {}};
}

Action ProtoC::step(ProcessId p, const Round& r, const Inbox& inbox) {
  PState& st = procs_[p];
  if (st.mode == Mode::Active) return active_step(st, p, r, inbox);
  bool heard = false;
  for (const auto& m : inbox) {
    if (const auto* ord = std::get_if<OrdinaryC>(&m.payload)) {
      merge_view(st.view, ord->view);
      heard = true;
    }
  }
  if (heard) st.heard_round = r;
  long long m = reduced_view(st.view);
  if (r >= st.heard_round + c_deadline(p, m, n_, t_, scale_)) {
    st.mode = Mode::Active;
    st.h = levels_;
    st.sub = Sub::Poll;
    st.rr = 0;
    st.batch_count = 0;
    st.activation_m = m;
    return active_step(st, p, r, inbox);
  }
  return ActIdle{};
}

std::optional<Round> ProtoC::next_wake(ProcessId p, const Round& r) const {
  const PState& st = procs_[p];
  if (st.mode == Mode::Terminated) return std::nullopt;
  if (st.mode == Mode::Active) {
    if (st.sub == Sub::Await && st.eval_round > r) return st.eval_round;
    return r + 1;
  }
  Round deadline =
      st.heard_round + c_deadline(p, reduced_view(st.view), n_, t_, scale_);
  return deadline > r ? deadline : r + 1;
}

}  // namespace worksim
