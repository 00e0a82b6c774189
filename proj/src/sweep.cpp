#include <worksim/sweep.hpp>

#include <worksim/adversary.hpp>
#include <worksim/bounds.hpp>
#include <worksim/checker.hpp>
#include <worksim/engine.hpp>
#include <worksim/protocols.hpp>

#include <algorithm>
#include <exception>
#include <memory>
#include <utility>

namespace worksim {
namespace {

// First violation wins; later ones are echoes of the same failure.
void note(SweepOutcome& out, const std::string& what) {
  if (out.pass) {
    out.pass = false;
    out.violation = what;
  }
}

void check_from_metrics(const SweepConfig& cfg, int num_processes,
                        const Metrics& m, SweepOutcome& out) {
  bool fallback = cfg.protocol == "d" && m.messages.ordinary > 0;
  Bounds b = bound_for(cfg.protocol, cfg.n, cfg.t, m.failures_injected, fallback);
  if (m.work_total > b.work) note(out, "work-bound");
  if (m.messages.total() > b.messages) note(out, "message-bound");
  if (m.rounds_until_all_retired > b.rounds) note(out, "round-bound");
  if (cfg.protocol.rfind("ba-", 0) == 0) {
    // completed means every non-crashed process decided the same value.
    if (!m.completed) note(out, "agreement");
    auto it = m.decisions.find(0);
    if (it != m.decisions.end() && it->second != 1) note(out, "validity");
  } else if (m.failures_injected < num_processes && !m.completed) {
    note(out, "completion");
  }
}

void validate(const SweepConfig& cfg) {
  make_protocol(cfg.protocol, cfg.n, cfg.t);
  if (cfg.p_den == 0 || cfg.p_num > cfg.p_den)
    throw ConfigError("crash probability must be a fraction in [0, 1]");
  if (cfg.seed_end < cfg.seed_begin)
    throw ConfigError("empty seed range");
}

SweepOutcome guarded(const SweepConfig& cfg, std::uint64_t seed) {
  try {
    return sweep_one(cfg, seed);
  } catch (const std::exception& e) {
    SweepOutcome out;
    out.seed = seed;
    out.pass = false;
    out.violation = std::string("exception: ") + e.what();
    return out;
  }
}

SweepSummary finish(std::vector<SweepOutcome> outcomes) {
  SweepSummary s;
  s.outcomes = std::move(outcomes);
  s.runs = static_cast<long long>(s.outcomes.size());
  for (const auto& o : s.outcomes) {
    if (!o.pass) {
      ++s.violations;
      if (!s.any_bad) {
        s.any_bad = true;
        s.first_bad_seed = o.seed;
        s.first_violation = o.violation;
      }
    }
    s.max_work = std::max(s.max_work, o.metrics.work_total);
    s.max_messages = std::max(s.max_messages, o.metrics.messages.total());
    s.max_rounds = std::max(s.max_rounds, o.metrics.rounds_until_all_retired);
  }
  return s;
}

}  // namespace

SweepOutcome sweep_one(const SweepConfig& cfg, std::uint64_t seed) {
  SweepOutcome out;
  out.seed = seed;
  auto proto = make_protocol(cfg.protocol, cfg.n, cfg.t);
  RandomAdversary::Params ap;
  ap.seed = seed;
  ap.p_num = cfg.p_num;
  ap.p_den = cfg.p_den;
  ap.max_crashes = cfg.max_crashes >= 0
                       ? cfg.max_crashes
                       : default_crash_budget(cfg.protocol, cfg.t);
  RandomAdversary adv(ap, proto->num_processes());

  RunParams params;
  params.record_trace = cfg.deep_check;
  Engine eng(*proto, adv, params);
  std::vector<std::unique_ptr<Observer>> observers;
  if (cfg.deep_check) {
    observers = invariant_observers(*proto);
    for (auto& o : observers) eng.add_observer(o.get());
  }
  RunResult rr = eng.run();
  out.metrics = rr.metrics;

  for (const auto& v : rr.verdict.violations) note(out, v.invariant);
  if (cfg.deep_check) {
    Verdict sv = check_structure(rr.trace);
    for (const auto& v : sv.violations) note(out, v.invariant);
  }
  check_from_metrics(cfg, proto->num_processes(), rr.metrics, out);
  return out;
}

SweepSummary sweep_serial(const SweepConfig& cfg) {
  validate(cfg);
  std::vector<SweepOutcome> outs;
  outs.reserve(static_cast<std::size_t>(cfg.seed_end - cfg.seed_begin));
  for (std::uint64_t seed = cfg.seed_begin; seed < cfg.seed_end; ++seed)
    outs.push_back(guarded(cfg, seed));
  return finish(std::move(outs));
}

SweepSummary sweep_parallel(const SweepConfig& cfg) {
#ifdef _OPENMP
  validate(cfg);
  const long long count =
      static_cast<long long>(cfg.seed_end - cfg.seed_begin);
  std::vector<SweepOutcome> outs(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < count; ++i)
    outs[static_cast<std::size_t>(i)] =
        guarded(cfg, cfg.seed_begin + static_cast<std::uint64_t>(i));
  return finish(std::move(outs));
#else
  return sweep_serial(cfg);
#endif
}

Json sweep_summary_to_json(const SweepSummary& s, bool include_outcomes) {
  Json j;
  j["runs"] = s.runs;
  j["violations"] = s.violations;
  j["max_work"] = s.max_work;
  j["max_messages"] = s.max_messages;
  j["max_rounds"] = round_to_json(s.max_rounds);
  if (s.any_bad)
    j["first_violation"] = Json{{"seed", s.first_bad_seed},
                                {"invariant", s.first_violation}};
  if (include_outcomes) {
    Json arr = Json::array();
    for (const auto& o : s.outcomes) {
      Json row;
      row["seed"] = o.seed;
      row["pass"] = o.pass;
      if (!o.pass) row["violation"] = o.violation;
      row["metrics"] = metrics_to_json(o.metrics);
      arr.push_back(std::move(row));
    }
    j["outcomes"] = std::move(arr);
  }
  return j;
}

}  // namespace worksim
