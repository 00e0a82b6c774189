#pragma once

#include <worksim/engine.hpp>
#include <worksim/json_io.hpp>
#include <worksim/types.hpp>

#include <memory>
#include <vector>

namespace worksim {

// The crash directives exactly as a trace recorded them.
CrashSchedule schedule_from_trace(const Trace& trace);

// Metrics recomputed from the event stream alone; completion follows the
// protocol's own notion (all units performed, or unanimous decisions for the
// agreement family).
Metrics metrics_from_trace(const Trace& trace);

// Trace-only verification: event-stream sanity (ordering, crash permanence,
// nothing after retirement, poll pairing, unit ranges), the protocol family's
// event-level invariants (one active at a time, takeovers in increasing id
// order, completion whenever someone survives), and the closed-form bound
// comparison on recomputed metrics.
Verdict check_structure(const Trace& trace);

// Full verification: check_structure, then a fresh run driven by the trace's
// own crash schedule with protocol-state observers attached. The replay must
// reproduce the input byte for byte; divergence means the trace was not
// produced by this engine as configured, and is reported as a violation.
Verdict check_execution(const Trace& trace);

// State-level invariant observers for the given protocol instance (knowledge
// dominance for the sequential-knowledge family, phase agreement for the
// phased one; empty for protocols whose invariants are all structural). The
// protocol must outlive the observers.
std::vector<std::unique_ptr<Observer>> invariant_observers(Protocol& proto);

Json verdict_to_json(const Verdict& v);

}  // namespace worksim
