#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace worksim {

using ProcessId = int;
using WorkUnitId = long long;

// Rounds are 256-bit: the tree-protocol deadlines grow like 2^(n+t) and
// overflow both u64 and __int128 for the larger configurations we simulate.
using Round = boost::multiprecision::int256_t;

enum class Mode { Inactive, Preactive, Active, Terminated, Crashed };

const char* mode_name(Mode m);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Internal consistency failure: a state the simulator itself must never reach.
struct DomainError : std::logic_error {
  using std::logic_error::logic_error;
};

// ---- Tree-protocol view state ----

struct GroupKey {
  int level = 0;
  long long index = 0;
  auto operator<=>(const GroupKey&) const = default;
};

struct ViewC {
  std::set<ProcessId> faulty;
  WorkUnitId point_work = 1;  // lowest work unit not known done
  Round round_work = 0;       // round that knowledge was acquired
  std::map<GroupKey, ProcessId> point;  // per-group believed coordinator
  std::map<GroupKey, Round> round;      // round of that belief

  bool operator==(const ViewC&) const = default;
};

// ---- Message payloads ----

struct PartialCkpt {
  long long c = 0;
  bool operator==(const PartialCkpt&) const = default;
};

struct FullCkpt {
  long long c = 0;
  int g = 0;
  bool operator==(const FullCkpt&) const = default;
};

struct GoAhead {
  bool operator==(const GoAhead&) const = default;
};

struct Poll {
  bool operator==(const Poll&) const = default;
};

struct PollReply {
  bool operator==(const PollReply&) const = default;
};

struct OrdinaryC {
  ViewC view;
  std::optional<int> value;  // consensus piggyback, absent outside agreement runs
  bool operator==(const OrdinaryC&) const = default;
};

struct ViewD {
  std::vector<WorkUnitId> remaining;  // S: units not known done
  std::vector<ProcessId> live;        // T: processes known correct
  int phase = 1;                      // work phase the view belongs to
  bool done = false;
  bool operator==(const ViewD&) const = default;
};

struct Inform {
  int value = 0;
  bool operator==(const Inform&) const = default;
};

using Payload = std::variant<PartialCkpt, FullCkpt, GoAhead, Poll, PollReply,
                             OrdinaryC, ViewD, Inform>;

struct MessageEnvelope {
  ProcessId sender = -1;
  ProcessId recipient = -1;
  Round send_round = 0;
  Payload payload;
};

struct ReceivedMessage {
  ProcessId sender = -1;
  Payload payload;
};
using Inbox = std::vector<ReceivedMessage>;  // sorted by sender id

// ---- Actions a process takes in one round ----

struct Send {
  Payload payload;
  std::vector<ProcessId> to;
};

struct ActIdle {};
struct ActWork {
  WorkUnitId unit = 0;
  std::vector<Send> sends;  // piggybacked on the work round (consensus informs)
};
struct ActSend {
  std::vector<Send> batch;
};
struct ActRetire {
  std::optional<int> decide;  // agreement runs record a decision on retirement
};

using Action = std::variant<ActIdle, ActWork, ActSend, ActRetire>;

// ---- Crash schedule ----

// Selects which envelopes of a crashing sender's outgoing batch are delivered.
// Prefix/Mask address envelopes by batch position; Pids by recipient id.
struct SubsetSelector {
  enum class Kind { Empty, Full, Prefix, Mask, Pids };
  Kind kind = Kind::Empty;
  long long prefix_len = 0;
  unsigned long long mask_bits = 0;
  std::vector<ProcessId> pids;

  bool delivers(std::size_t batch_index, ProcessId recipient) const;
  bool operator==(const SubsetSelector&) const = default;
};

struct CrashDirective {
  ProcessId process = -1;
  Round round = 0;
  bool pre_action = false;  // crashed before acting: no work, no sends that round
  SubsetSelector subset;    // ignored when pre_action (batch is empty)
};

struct CrashSchedule {
  std::vector<CrashDirective> crashes;
};

// ---- Metrics ----

struct MessageCounts {
  long long ordinary = 0;  // checkpoints and view reports
  long long go_ahead = 0;
  long long poll = 0;
  long long poll_reply = 0;
  long long view_d = 0;
  long long inform = 0;
  long long total() const {
    return ordinary + go_ahead + poll + poll_reply + view_d + inform;
  }
};

struct Metrics {
  long long work_total = 0;
  long long work_redundant = 0;  // re-performances beyond each unit's first
  MessageCounts messages;
  Round rounds_until_all_retired = 0;
  bool completed = false;
  long long failures_injected = 0;
  std::map<ProcessId, int> decisions;  // agreement runs only
};

// ---- Trace ----

struct EvMode {
  ProcessId process = -1;
  Mode to = Mode::Inactive;
};
struct EvWork {
  ProcessId process = -1;
  WorkUnitId unit = 0;
};
struct EvSend {
  ProcessId process = -1;
  Payload payload;
  std::vector<ProcessId> to;  // after the sender-crash filter
};
struct EvRetire {
  ProcessId process = -1;
};
struct EvDecide {
  ProcessId process = -1;
  int value = 0;
};
struct EvCrash {
  ProcessId process = -1;
  bool pre_action = false;
  SubsetSelector subset;
};

using TraceEvent =
    std::variant<EvMode, EvWork, EvSend, EvRetire, EvDecide, EvCrash>;

struct RoundRecord {
  Round round = 0;
  std::vector<TraceEvent> events;
};

struct TraceHeader {
  std::string protocol;
  long long num_units = 0;    // n
  int fault_budget = 0;       // t
  int num_processes = 0;
};

struct Trace {
  TraceHeader header;
  std::vector<RoundRecord> rounds;
};

// ---- Verification ----

struct Violation {
  Round round = 0;
  std::string invariant;
  std::string detail;
};

struct Verdict {
  bool pass = true;
  std::vector<Violation> violations;
  void add(Round r, std::string invariant, std::string detail) {
    pass = false;
    violations.push_back({r, std::move(invariant), std::move(detail)});
  }
};

// Thrown when a run is configured to abort on the first invariant violation.
struct CheckViolation : std::runtime_error {
  Violation violation;
  explicit CheckViolation(Violation v)
      : std::runtime_error(v.invariant + ": " + v.detail),
        violation(std::move(v)) {}
};

}  // namespace worksim
