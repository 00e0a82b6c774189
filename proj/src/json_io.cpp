#include <worksim/json_io.hpp>

#include <cctype>
#include <istream>
#include <ostream>

namespace worksim {

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Inactive: return "inactive";
    case Mode::Preactive: return "preactive";
    case Mode::Active: return "active";
    case Mode::Terminated: return "terminated";
    case Mode::Crashed: return "crashed";
  }
  throw DomainError("unknown mode");
}

static Mode mode_from_name(const std::string& s) {
  if (s == "inactive") return Mode::Inactive;
  if (s == "preactive") return Mode::Preactive;
  if (s == "active") return Mode::Active;
  if (s == "terminated") return Mode::Terminated;
  if (s == "crashed") return Mode::Crashed;
  throw ConfigError("unknown mode name: " + s);
}

Json round_to_json(const Round& r) {
  static const Round kMaxExact = (Round(1) << 53) - 1;
  if (r >= 0 && r <= kMaxExact) return Json(static_cast<std::int64_t>(r));
  return Json(r.str());
}

Round round_from_json(const Json& j) {
  if (j.is_number_integer()) return Round(j.get<std::int64_t>());
  if (j.is_string()) return Round(j.get<std::string>());
  throw ConfigError("round must be an integer or decimal string");
}

static Json view_c_to_json(const ViewC& v) {
  Json groups = Json::array();
  for (const auto& [key, point] : v.point) {
    Json g;
    g["level"] = key.level;
    g["index"] = key.index;
    g["point"] = point;
    g["round"] = round_to_json(v.round.at(key));
    groups.push_back(std::move(g));
  }
  Json j;
  j["faulty"] = v.faulty;
  j["point_work"] = v.point_work;
  j["round_work"] = round_to_json(v.round_work);
  j["groups"] = std::move(groups);
  return j;
}

static ViewC view_c_from_json(const Json& j) {
  ViewC v;
  for (const auto& f : j.at("faulty")) v.faulty.insert(f.get<ProcessId>());
  v.point_work = j.at("point_work").get<WorkUnitId>();
  v.round_work = round_from_json(j.at("round_work"));
  for (const auto& g : j.at("groups")) {
    GroupKey key{g.at("level").get<int>(), g.at("index").get<long long>()};
    v.point[key] = g.at("point").get<ProcessId>();
    v.round[key] = round_from_json(g.at("round"));
  }
  return v;
}

Json payload_to_json(const Payload& p) {
  Json j;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, PartialCkpt>) {
          j["kind"] = "partial";
          j["c"] = x.c;
        } else if constexpr (std::is_same_v<T, FullCkpt>) {
          j["kind"] = "full";
          j["c"] = x.c;
          j["g"] = x.g;
        } else if constexpr (std::is_same_v<T, GoAhead>) {
          j["kind"] = "goahead";
        } else if constexpr (std::is_same_v<T, Poll>) {
          j["kind"] = "poll";
        } else if constexpr (std::is_same_v<T, PollReply>) {
          j["kind"] = "poll_reply";
        } else if constexpr (std::is_same_v<T, OrdinaryC>) {
          j["kind"] = "ordinary_c";
          j["view"] = view_c_to_json(x.view);
          if (x.value) j["value"] = *x.value;
        } else if constexpr (std::is_same_v<T, ViewD>) {
          j["kind"] = "view_d";
          j["S"] = x.remaining;
          j["T"] = x.live;
          j["phase"] = x.phase;
          j["done"] = x.done;
        } else if constexpr (std::is_same_v<T, Inform>) {
          j["kind"] = "inform";
          j["value"] = x.value;
        }
      },
      p);
  return j;
}

Payload payload_from_json(const Json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "partial") return PartialCkpt{j.at("c").get<long long>()};
  if (kind == "full")
    return FullCkpt{j.at("c").get<long long>(), j.at("g").get<int>()};
  if (kind == "goahead") return GoAhead{};
  if (kind == "poll") return Poll{};
  if (kind == "poll_reply") return PollReply{};
  if (kind == "ordinary_c") {
    OrdinaryC o;
    o.view = view_c_from_json(j.at("view"));
    if (j.contains("value")) o.value = j.at("value").get<int>();
    return o;
  }
  if (kind == "view_d") {
    ViewD v;
    v.remaining = j.at("S").get<std::vector<WorkUnitId>>();
    v.live = j.at("T").get<std::vector<ProcessId>>();
    v.phase = j.at("phase").get<int>();
    v.done = j.at("done").get<bool>();
    return v;
  }
  if (kind == "inform") return Inform{j.at("value").get<int>()};
  throw ConfigError("unknown payload kind: " + kind);
}

Json selector_to_json(const SubsetSelector& s) {
  Json j;
  switch (s.kind) {
    case SubsetSelector::Kind::Empty: j["kind"] = "empty"; break;
    case SubsetSelector::Kind::Full: j["kind"] = "full"; break;
    case SubsetSelector::Kind::Prefix:
      j["kind"] = "prefix";
      j["k"] = s.prefix_len;
      break;
    case SubsetSelector::Kind::Mask:
      j["kind"] = "mask";
      j["bits"] = s.mask_bits;
      break;
    case SubsetSelector::Kind::Pids:
      j["kind"] = "pids";
      j["ids"] = s.pids;
      break;
  }
  return j;
}

SubsetSelector selector_from_json(const Json& j) {
  SubsetSelector s;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "empty") {
    s.kind = SubsetSelector::Kind::Empty;
  } else if (kind == "full") {
    s.kind = SubsetSelector::Kind::Full;
  } else if (kind == "prefix") {
    s.kind = SubsetSelector::Kind::Prefix;
    s.prefix_len = j.at("k").get<long long>();
  } else if (kind == "mask") {
    s.kind = SubsetSelector::Kind::Mask;
    s.mask_bits = j.at("bits").get<unsigned long long>();
  } else if (kind == "pids") {
    s.kind = SubsetSelector::Kind::Pids;
    s.pids = j.at("ids").get<std::vector<ProcessId>>();
  } else {
    throw ConfigError("unknown subset kind: " + kind);
  }
  return s;
}

Json metrics_to_json(const Metrics& m) {
  Json j;
  j["work_total"] = m.work_total;
  j["work_redundant"] = m.work_redundant;
  Json msgs;
  msgs["ordinary"] = m.messages.ordinary;
  msgs["go_ahead"] = m.messages.go_ahead;
  msgs["poll"] = m.messages.poll;
  msgs["poll_reply"] = m.messages.poll_reply;
  msgs["view_d"] = m.messages.view_d;
  msgs["inform"] = m.messages.inform;
  msgs["total"] = m.messages.total();
  j["messages"] = std::move(msgs);
  j["rounds_until_all_retired"] = round_to_json(m.rounds_until_all_retired);
  j["completed"] = m.completed;
  j["failures_injected"] = m.failures_injected;
  if (!m.decisions.empty()) {
    Json d = Json::object();
    for (const auto& [pid, value] : m.decisions) d[std::to_string(pid)] = value;
    j["decisions"] = std::move(d);
  }
  return j;
}

Json trace_event_to_json(const TraceEvent& ev) {
  Json j;
  std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, EvMode>) {
          j["e"] = "mode";
          j["p"] = x.process;
          j["m"] = mode_name(x.to);
        } else if constexpr (std::is_same_v<T, EvWork>) {
          j["e"] = "work";
          j["p"] = x.process;
          j["u"] = x.unit;
        } else if constexpr (std::is_same_v<T, EvSend>) {
          j["e"] = "send";
          j["p"] = x.process;
          j["msg"] = payload_to_json(x.payload);
          j["to"] = x.to;
        } else if constexpr (std::is_same_v<T, EvRetire>) {
          j["e"] = "retire";
          j["p"] = x.process;
        } else if constexpr (std::is_same_v<T, EvDecide>) {
          j["e"] = "decide";
          j["p"] = x.process;
          j["v"] = x.value;
        } else if constexpr (std::is_same_v<T, EvCrash>) {
          j["e"] = "crash";
          j["p"] = x.process;
          j["pre"] = x.pre_action;
          j["subset"] = selector_to_json(x.subset);
        }
      },
      ev);
  return j;
}

TraceEvent trace_event_from_json(const Json& j) {
  const std::string e = j.at("e").get<std::string>();
  const ProcessId p = j.at("p").get<ProcessId>();
  if (e == "mode") return EvMode{p, mode_from_name(j.at("m").get<std::string>())};
  if (e == "work") return EvWork{p, j.at("u").get<WorkUnitId>()};
  if (e == "send")
    return EvSend{p, payload_from_json(j.at("msg")),
                  j.at("to").get<std::vector<ProcessId>>()};
  if (e == "retire") return EvRetire{p};
  if (e == "decide") return EvDecide{p, j.at("v").get<int>()};
  if (e == "crash")
    return EvCrash{p, j.at("pre").get<bool>(),
                   selector_from_json(j.at("subset"))};
  throw ConfigError("unknown trace event: " + e);
}

void write_trace_jsonl(std::ostream& os, const Trace& trace) {
  Json header;
  header["header"] = Json{{"protocol", trace.header.protocol},
                          {"n", trace.header.num_units},
                          {"t", trace.header.fault_budget},
                          {"procs", trace.header.num_processes}};
  os << header.dump() << "\n";
  for (const auto& rec : trace.rounds) {
    Json line;
    line["round"] = round_to_json(rec.round);
    Json events = Json::array();
    for (const auto& ev : rec.events) events.push_back(trace_event_to_json(ev));
    line["events"] = std::move(events);
    os << line.dump() << "\n";
  }
}

Trace read_trace_jsonl(std::istream& is) {
  Trace trace;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    if (j.contains("header")) {
      const Json& h = j.at("header");
      trace.header.protocol = h.at("protocol").get<std::string>();
      trace.header.num_units = h.at("n").get<long long>();
      trace.header.fault_budget = h.at("t").get<int>();
      trace.header.num_processes = h.at("procs").get<int>();
      have_header = true;
      continue;
    }
    RoundRecord rec;
    rec.round = round_from_json(j.at("round"));
    for (const auto& ev : j.at("events"))
      rec.events.push_back(trace_event_from_json(ev));
    trace.rounds.push_back(std::move(rec));
  }
  if (!have_header) throw ConfigError("trace has no header line");
  return trace;
}

CrashSchedule schedule_from_json(const Json& j) {
  CrashSchedule s;
  if (!j.contains("crashes"))
    throw ConfigError("scenario file must contain a \"crashes\" array");
  for (const auto& c : j.at("crashes")) {
    CrashDirective d;
    d.process = c.at("process").get<ProcessId>();
    d.round = round_from_json(c.at("round"));
    if (d.round < 1) throw ConfigError("crash round must be >= 1");
    if (c.contains("pre_action")) d.pre_action = c.at("pre_action").get<bool>();
    if (c.contains("deliver_to")) {
      auto ids = c.at("deliver_to").get<std::vector<ProcessId>>();
      if (!ids.empty()) {
        d.subset.kind = SubsetSelector::Kind::Pids;
        d.subset.pids = std::move(ids);
      }
    }
    if (d.pre_action && d.subset.kind != SubsetSelector::Kind::Empty)
      throw ConfigError("pre_action crash cannot deliver messages");
    s.crashes.push_back(std::move(d));
  }
  return s;
}

Json schedule_to_json(const CrashSchedule& s) {
  Json arr = Json::array();
  for (const auto& d : s.crashes) {
    Json c;
    c["process"] = d.process;
    c["round"] = round_to_json(d.round);
    c["pre_action"] = d.pre_action;
    if (d.subset.kind == SubsetSelector::Kind::Pids) c["deliver_to"] = d.subset.pids;
    arr.push_back(std::move(c));
  }
  Json j;
  j["crashes"] = std::move(arr);
  return j;
}

std::pair<std::uint64_t, std::uint64_t> decimal_to_fraction(
    const std::string& text) {
  if (text.empty()) throw ConfigError("empty probability");
  std::string digits;
  std::uint64_t den = 1;
  bool seen_dot = false;
  for (char ch : text) {
    if (ch == '.') {
      if (seen_dot) throw ConfigError("malformed probability: " + text);
      seen_dot = true;
      continue;
    }
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw ConfigError("malformed probability: " + text);
    if (digits.size() >= 18) throw ConfigError("probability too precise: " + text);
    digits.push_back(ch);
    if (seen_dot) den *= 10;
  }
  if (digits.empty()) throw ConfigError("malformed probability: " + text);
  std::uint64_t num = std::stoull(digits);
  if (num > den) throw ConfigError("probability must be in [0,1]: " + text);
  return {num, den};
}

}  // namespace worksim
