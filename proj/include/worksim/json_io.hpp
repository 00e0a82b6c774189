#pragma once

#include <worksim/types.hpp>

#include <nlohmann/json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

namespace worksim {

using Json = nlohmann::ordered_json;

// Rounds encode as a JSON number while they fit the double-exact integer
// range, and as a decimal string beyond that.
Json round_to_json(const Round& r);
Round round_from_json(const Json& j);

Json payload_to_json(const Payload& p);
Payload payload_from_json(const Json& j);

Json selector_to_json(const SubsetSelector& s);
SubsetSelector selector_from_json(const Json& j);

Json metrics_to_json(const Metrics& m);

Json trace_event_to_json(const TraceEvent& ev);
TraceEvent trace_event_from_json(const Json& j);

// One JSON object per line: a header line, then one line per recorded round.
void write_trace_jsonl(std::ostream& os, const Trace& trace);
Trace read_trace_jsonl(std::istream& is);

// Scenario file: {"crashes":[{"process":P,"round":R,"pre_action":B,
// "deliver_to":[pid,...]}]}. deliver_to omitted means nothing is delivered.
CrashSchedule schedule_from_json(const Json& j);
Json schedule_to_json(const CrashSchedule& s);

// Exact rational from a decimal string such as "0.05"; throws ConfigError on
// malformed input or values outside [0,1].
std::pair<std::uint64_t, std::uint64_t> decimal_to_fraction(
    const std::string& text);

}  // namespace worksim
