// Command-line front end: single runs, seeded sweeps, exhaustive adversary
// enumeration. Machine-readable JSON on stdout or --out; exit 0 on success,
// 2 on configuration errors, 3 on invariant violations.

#include <CLI11.hpp>

#include <worksim/adversary.hpp>
#include <worksim/checker.hpp>
#include <worksim/engine.hpp>
#include <worksim/enumerate.hpp>
#include <worksim/json_io.hpp>
#include <worksim/protocols.hpp>
#include <worksim/sweep.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace worksim;

struct AdversarySpec {
  enum class Kind { None, File, Random } kind = Kind::None;
  std::string path;
  std::uint64_t seed = 0;
  std::uint64_t p_num = 1;
  std::uint64_t p_den = 20;
  int max_crashes = -1;  // -1: the protocol's default budget
};

AdversarySpec parse_adversary(const std::string& text) {
  AdversarySpec spec;
  if (text == "none") return spec;
  if (text.rfind("file:", 0) == 0) {
    spec.kind = AdversarySpec::Kind::File;
    spec.path = text.substr(5);
    if (spec.path.empty()) throw ConfigError("file: adversary needs a path");
    return spec;
  }
  if (text == "random" || text.rfind("random:", 0) == 0) {
    spec.kind = AdversarySpec::Kind::Random;
    std::string args = text.size() > 6 ? text.substr(7) : "";
    std::stringstream ss(args);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      auto eq = part.find('=');
      if (eq == std::string::npos)
        throw ConfigError("bad adversary option (want key=value): " + part);
      std::string key = part.substr(0, eq), value = part.substr(eq + 1);
      if (key == "seed")
        spec.seed = std::stoull(value);
      else if (key == "p")
        std::tie(spec.p_num, spec.p_den) = decimal_to_fraction(value);
      else if (key == "max")
        spec.max_crashes = std::stoi(value);
      else
        throw ConfigError("unknown adversary option: " + key);
    }
    return spec;
  }
  throw ConfigError("unknown adversary: " + text +
                    " (want none, file:PATH, or random:seed=S,p=P,max=M)");
}

// "A..B" is the inclusive seed range; a bare number is a single seed.
std::pair<std::uint64_t, std::uint64_t> parse_seeds(const std::string& text) {
  auto dots = text.find("..");
  try {
    if (dots == std::string::npos) {
      std::uint64_t only = std::stoull(text);
      return {only, only + 1};
    }
    std::uint64_t lo = std::stoull(text.substr(0, dots));
    std::uint64_t hi = std::stoull(text.substr(dots + 2));
    if (hi + 1 < lo) return {lo, lo};  // empty range
    return {lo, hi + 1};
  } catch (const std::exception&) {
    throw ConfigError("bad seed range (want A..B or N): " + text);
  }
}

void emit(const Json& j, const std::string& out_path) {
  std::string text = j.dump(2);
  text.push_back('\n');
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw ConfigError("cannot open output file: " + out_path);
  os << text;
}

std::unique_ptr<Adversary> build_adversary(const AdversarySpec& spec,
                                           const std::string& protocol, int t,
                                           int num_processes) {
  switch (spec.kind) {
    case AdversarySpec::Kind::None:
      return std::make_unique<NullAdversary>();
    case AdversarySpec::Kind::File: {
      std::ifstream is(spec.path);
      if (!is) throw ConfigError("cannot open scenario file: " + spec.path);
      Json j = Json::parse(is, nullptr, true);
      return std::make_unique<ScheduledAdversary>(schedule_from_json(j),
                                                  num_processes);
    }
    case AdversarySpec::Kind::Random: {
      RandomAdversary::Params params;
      params.seed = spec.seed;
      params.p_num = spec.p_num;
      params.p_den = spec.p_den;
      params.max_crashes = spec.max_crashes >= 0
                               ? spec.max_crashes
                               : default_crash_budget(protocol, t);
      return std::make_unique<RandomAdversary>(params, num_processes);
    }
  }
  throw ConfigError("unreachable adversary kind");
}

int cmd_run(const std::string& protocol, long long n, int t,
            const std::string& adversary, const std::string& out_path,
            const std::string& trace_path, bool check) {
  auto proto = make_protocol(protocol, n, t);
  AdversarySpec spec = parse_adversary(adversary);
  auto adv = build_adversary(spec, protocol, t, proto->num_processes());

  RunParams params;
  params.record_trace = check || !trace_path.empty();
  Engine engine(*proto, *adv, params);
  std::vector<std::unique_ptr<Observer>> observers;
  if (check) {
    observers = invariant_observers(*proto);
    for (auto& ob : observers) engine.add_observer(ob.get());
  }
  RunResult result = engine.run();

  Json out;
  out["protocol"] = protocol;
  out["n"] = n;
  out["t"] = t;
  Json metrics = metrics_to_json(result.metrics);
  for (auto& [key, value] : metrics.items()) out[key] = value;
  emit(out, out_path);

  if (!trace_path.empty()) {
    std::ofstream os(trace_path, std::ios::binary);
    if (!os) throw ConfigError("cannot open trace file: " + trace_path);
    write_trace_jsonl(os, result.trace);
  }

  if (check) {
    Verdict verdict = result.verdict;
    Verdict structural = check_execution(result.trace);
    for (const auto& v : structural.violations) verdict.violations.push_back(v);
    Metrics replayed = metrics_from_trace(result.trace);
    if (replayed.work_total != result.metrics.work_total ||
        replayed.work_redundant != result.metrics.work_redundant ||
        replayed.messages.total() != result.metrics.messages.total() ||
        replayed.rounds_until_all_retired !=
            result.metrics.rounds_until_all_retired ||
        replayed.completed != result.metrics.completed ||
        replayed.failures_injected != result.metrics.failures_injected ||
        replayed.decisions != result.metrics.decisions) {
      verdict.add(result.metrics.rounds_until_all_retired, "metrics",
                  "engine metrics disagree with the recorded event stream");
    }
    verdict.pass = verdict.violations.empty();
    if (!verdict.pass) {
      std::cerr << verdict_to_json(verdict).dump(2) << "\n";
      return 3;
    }
  }
  return 0;
}

int cmd_sweep(const std::string& protocol, long long n, int t,
              const std::string& adversary, const std::string& seeds,
              const std::string& out_path, bool check) {
  AdversarySpec spec = parse_adversary(adversary);
  if (spec.kind != AdversarySpec::Kind::Random)
    throw ConfigError("sweep needs a random adversary");
  SweepConfig cfg;
  cfg.protocol = protocol;
  cfg.n = n;
  cfg.t = t;
  std::tie(cfg.seed_begin, cfg.seed_end) = parse_seeds(seeds);
  cfg.p_num = spec.p_num;
  cfg.p_den = spec.p_den;
  cfg.max_crashes = spec.max_crashes;
  cfg.deep_check = check;

  SweepSummary summary = sweep_parallel(cfg);
  emit(sweep_summary_to_json(summary, false), out_path);
  if (summary.any_bad) {
    std::cerr << "seed " << summary.first_bad_seed << ": "
              << summary.first_violation << "\n";
    return 3;
  }
  return 0;
}

int cmd_enumerate(const std::string& protocol, long long n, int t,
                  long long stride, const std::string& subset_policy,
                  std::uint64_t cap, const std::string& out_path) {
  Granularity g;
  g.stride = stride;
  g.subset_policy = subset_policy;
  EnumerationReport report = enumerate_parallel(protocol, n, t, g, cap);
  emit(enumeration_report_to_json(report), out_path);
  if (report.failures > 0) {
    std::cerr << "schedule " << report.first_bad_index << ": "
              << report.first_violation << "\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Round-based simulator for fault-tolerant work protocols"};
  app.require_subcommand(1);

  std::string protocol, adversary = "none", seeds = "0..999";
  std::string out_path, trace_path, subset_policy = "prefix";
  long long n = 0, stride = 1;
  int t = 0;
  std::uint64_t cap = 1000000;
  bool check = false;

  auto add_shape = [&](CLI::App* cmd) {
    cmd->add_option("--protocol", protocol, "Protocol name")
        ->required()
        ->check(CLI::IsMember(protocol_names()));
    cmd->add_option("--n", n, "Work units (processes for the ba-* family)")
        ->required();
    cmd->add_option("--t", t, "Processes (failure budget for ba-*)")
        ->required();
  };

  CLI::App* run = app.add_subcommand("run", "Simulate one execution");
  add_shape(run);
  run->add_option("--adversary", adversary,
                  "none | file:PATH | random:seed=S,p=P,max=M");
  run->add_option("--out", out_path, "Metrics file (default stdout)");
  run->add_option("--trace", trace_path, "Trace file (JSON lines)");
  run->add_flag("--check", check, "Verify invariants and the recorded trace");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a seeded batch");
  add_shape(sweep);
  sweep->add_option("--adversary", adversary,
                    "random:p=P,max=M (seed comes from --seeds)");
  sweep->add_option("--seeds", seeds, "Seed range A..B, inclusive");
  sweep->add_option("--out", out_path, "Summary file (default stdout)");
  sweep->add_flag("--check", check,
                  "Deep-check every run (state observers + trace pass)");

  CLI::App* enumerate =
      app.add_subcommand("enumerate", "Walk every crash schedule in a grid");
  add_shape(enumerate);
  enumerate->add_option("--rounds-stride", stride, "Crash-round grid stride")
      ->check(CLI::PositiveNumber);
  enumerate->add_option("--subset-policy", subset_policy,
                        "Delivery subsets: prefix | small-all")
      ->check(CLI::IsMember({"prefix", "small-all"}));
  enumerate->add_option("--cap", cap, "Refuse spaces larger than this");
  enumerate->add_option("--out", out_path, "Report file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (run->parsed())
      return cmd_run(protocol, n, t, adversary, out_path, trace_path, check);
    if (sweep->parsed()) {
      if (sweep->count("--adversary") == 0) adversary = "random";
      return cmd_sweep(protocol, n, t, adversary, seeds, out_path, check);
    }
    return cmd_enumerate(protocol, n, t, stride, subset_policy, cap, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
