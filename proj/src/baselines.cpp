#include <worksim/baselines.hpp>

namespace worksim {

NaiveAll::NaiveAll(long long n, int t) : n_(n), t_(t) {
  if (n < 1) throw ConfigError("unit count must be positive");
  if (t < 1) throw ConfigError("process count must be positive");
  modes_.assign(t, Mode::Active);
}

Action NaiveAll::step(ProcessId p, const Round& r, const Inbox&) {
  long long unit = static_cast<long long>(r);
  if (unit >= n_) modes_[p] = Mode::Terminated;
  return ActWork{unit, {}};
}

std::optional<Round> NaiveAll::next_wake(ProcessId p, const Round& r) const {
  if (modes_[p] == Mode::Terminated) return std::nullopt;
  return r + 1;
}

Round leader_deadline(ProcessId j, long long n) {
  // A failed worker wastes at most 2n+2 rounds, so backup j takes over at
  // j*(2n+2); the gap leaves any earlier takeover room to finish.
  return Round(j) * (2 * n + 2);
}

NaiveLeader::NaiveLeader(long long n, int t) : n_(n), t_(t) {
  if (n < 1) throw ConfigError("unit count must be positive");
  if (t < 1) throw ConfigError("process count must be positive");
  procs_.resize(t);
  procs_[0].mode = Mode::Active;
  procs_[0].current = 1;
}

Action NaiveLeader::step(ProcessId p, const Round& r, const Inbox& inbox) {
  PState& st = procs_[p];
  if (st.mode == Mode::Inactive) {
    bool released = false;
    for (const auto& m : inbox) {
      if (const auto* ckpt = std::get_if<PartialCkpt>(&m.payload)) {
        st.know = std::max(st.know, ckpt->c);
        if (ckpt->c == n_) released = true;
      }
    }
    if (released) {
      st.mode = Mode::Terminated;
      return ActRetire{};
    }
    if (r < leader_deadline(p, n_)) return ActIdle{};
    st.mode = Mode::Active;
    if (st.know >= n_) {
      st.mode = Mode::Terminated;
      return ActRetire{};
    }
    st.current = st.know + 1;
    st.announce = false;
  }
  if (st.announce) {
    st.announce = false;
    std::vector<ProcessId> to;
    for (ProcessId q = 0; q < t_; ++q)
      if (q != p) to.push_back(q);
    if (st.current == n_) st.mode = Mode::Terminated;
    Action act = ActSend{{Send{PartialCkpt{st.current}, to}}};
    st.current += 1;
    return act;
  }
  st.announce = true;
  return ActWork{st.current, {}};
}

std::optional<Round> NaiveLeader::next_wake(ProcessId p,
                                            const Round& r) const {
  const PState& st = procs_[p];
  if (st.mode == Mode::Terminated) return std::nullopt;
  if (st.mode == Mode::Active) return r + 1;
  Round deadline = leader_deadline(p, n_);
  return deadline > r ? deadline : r + 1;
}

}  // namespace worksim
