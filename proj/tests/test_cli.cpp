// End-to-end tests of the command-line front end: spawns the real binary,
// parses its JSON output, and checks the exit-code contract.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <worksim/json_io.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

using worksim::Json;

namespace {

struct CmdResult {
  int code = -1;
  std::string out;
};

std::string bin() {
  const char* b = std::getenv("WORKSIM_BIN");
  REQUIRE_MESSAGE(b != nullptr, "WORKSIM_BIN must point at the binary");
  return b;
}

std::string data_dir() {
  const char* d = std::getenv("WORKSIM_DATA_DIR");
  REQUIRE_MESSAGE(d != nullptr, "WORKSIM_DATA_DIR must point at tests/data");
  return d;
}

CmdResult run_cmd(const std::string& args) {
  std::string cmd = bin() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  CmdResult r;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  REQUIRE(is);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("a single run reports its metrics as JSON on stdout") {
  CmdResult r = run_cmd("run --protocol a --n 8 --t 4");
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["protocol"] == "a");
  CHECK(j["n"] == 8);
  CHECK(j["t"] == 4);
  CHECK(j["work_total"] == 8);
  CHECK(j["work_redundant"] == 0);
  CHECK(j["messages"]["ordinary"] == 10);
  CHECK(j["messages"]["total"] == 10);
  CHECK(j["rounds_until_all_retired"] == 16);
  CHECK(j["completed"] == true);
  CHECK(j["failures_injected"] == 0);
}

TEST_CASE("a scenario file drives the run and --check verifies it") {
  std::string scenario = data_dir() + "/scenario_d.json";
  CmdResult r = run_cmd("run --protocol d --n 8 --t 4 --adversary file:" +
                        scenario + " --check");
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["work_total"] == 9);
  CHECK(j["failures_injected"] == 2);
  CHECK(j["completed"] == true);
}

TEST_CASE("the recorded trace is valid JSON lines and loads back") {
  std::string trace_path = std::string("/tmp/worksim_cli_trace_") +
                           std::to_string(getpid()) + ".jsonl";
  CmdResult r = run_cmd("run --protocol a --n 8 --t 4 --trace " + trace_path);
  REQUIRE(r.code == 0);
  std::ifstream is(trace_path);
  REQUIRE(is);
  worksim::Trace t = worksim::read_trace_jsonl(is);
  CHECK(t.header.protocol == "a");
  CHECK(t.header.num_units == 8);
  CHECK(t.header.num_processes == 4);
  CHECK(t.rounds.size() == 16);

  std::ostringstream ss;
  worksim::write_trace_jsonl(ss, t);
  CHECK(ss.str() == slurp(trace_path));
  std::remove(trace_path.c_str());
}

TEST_CASE("sweep output files are byte-identical across invocations") {
  std::string base = std::string("/tmp/worksim_cli_sweep_") +
                     std::to_string(getpid());
  std::string args = "sweep --protocol b --n 8 --t 4 --seeds 1..64 "
                     "--adversary random:p=0.1 --out ";
  CmdResult r1 = run_cmd(args + base + "_1.json");
  CmdResult r2 = run_cmd(args + base + "_2.json");
  REQUIRE(r1.code == 0);
  REQUIRE(r2.code == 0);
  std::string a = slurp(base + "_1.json");
  CHECK(a == slurp(base + "_2.json"));

  Json j = Json::parse(a);
  CHECK(j["runs"] == 64);
  CHECK(j["violations"] == 0);
  std::remove((base + "_1.json").c_str());
  std::remove((base + "_2.json").c_str());
}

TEST_CASE("an inverted seed range is an empty sweep, not an error") {
  CmdResult r = run_cmd("sweep --protocol a --n 8 --t 4 --seeds 5..4 "
                        "--adversary random");
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["runs"] == 0);
}

TEST_CASE("a small enumeration passes and reports its schedule count") {
  CmdResult r = run_cmd("enumerate --protocol c --n 2 --t 2 --cap 1000000");
  REQUIRE(r.code == 0);
  Json j = Json::parse(r.out);
  CHECK(j["failures"] == 0);
  CHECK(j["schedules"].get<long long>() > 0);
}

TEST_CASE("configuration mistakes exit 2") {
  CHECK(run_cmd("run --protocol z --n 8 --t 4").code == 2);
  CHECK(run_cmd("run --protocol a --n 7 --t 4").code == 2);
  CHECK(run_cmd("run --protocol a --n 8 --t 4 --adversary bogus").code == 2);
  CHECK(run_cmd("sweep --protocol a --n 8 --t 4 --adversary none").code == 2);
  CHECK(run_cmd("enumerate --protocol a --n 8 --t 4 --cap 10").code == 2);
  CHECK(run_cmd("").code == 2);
}

TEST_CASE("--help exits clean") {
  CHECK(run_cmd("--help").code == 0);
  CHECK(run_cmd("run --help").code == 0);
}
