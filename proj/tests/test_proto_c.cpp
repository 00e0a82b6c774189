// Poll-driven protocol: hierarchy arithmetic, deadline scales, view algebra,
// and full runs where silence is the only failure signal.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <worksim/bounds.hpp>
#include <worksim/proto_c.hpp>

#include "util.hpp"

using namespace worksim;
using namespace worksim::testutil;

TEST_CASE("binary hierarchy: level h splits t ids into groups of 2^(lg-h+1)") {
  CHECK(log2_exact(4) == 2);
  CHECK(log2_exact(8) == 3);
  CHECK(log2_exact(1) == 0);
  CHECK_THROWS_AS(log2_exact(6), ConfigError);
  CHECK_THROWS_AS(log2_exact(0), ConfigError);

  CHECK(c_group_size(1, 4) == 4);
  CHECK(c_group_size(2, 4) == 2);
  CHECK(c_group_size(3, 8) == 2);
  CHECK(c_group_index(3, 2, 4) == 1);
  CHECK(c_group_index(5, 2, 8) == 1);
  CHECK(c_group_index(5, 3, 8) == 2);
}

TEST_CASE("timeout scales: 5t+2lg plain, 2n+3t+2lg batched") {
  CHECK(c_scale_plain(4) == 24);
  CHECK(c_scale_plain(8) == 46);
  CHECK(c_scale_batched(4, 4) == 24);
  CHECK(c_scale_batched(8, 4) == 32);
}

TEST_CASE("sleep allowances: id-staggered at zero knowledge, then shrinking") {
  // k (t-i)(n+t) 2^(n+t-1) for an empty view.
  CHECK(c_deadline(3, 0, 4, 4, 24) == 24576);
  CHECK(c_deadline(2, 0, 4, 4, 24) == 49152);
  CHECK(c_deadline(0, 0, 4, 4, 24) == 98304);
  // k (n+t-m) 2^(n+t-1-m) once informed: exponentially sooner per unit known.
  CHECK(c_deadline(0, 4, 4, 4, 24) == 768);
  CHECK(c_deadline(0, 7, 4, 4, 24) == 24);
  for (long long m = 1; m < 7; ++m)
    CHECK(c_deadline(1, m + 1, 4, 4, 24) < c_deadline(1, m, 4, 4, 24));
}

TEST_CASE("reduced view counts units known done plus processes known faulty") {
  ViewC v;
  v.point_work = 3;
  CHECK(reduced_view(v) == 2);
  v.faulty = {1, 2};
  CHECK(reduced_view(v) == 4);
}

TEST_CASE("merging views never loses knowledge") {
  ViewC dst;
  dst.point_work = 2;
  dst.round_work = 10;
  dst.faulty = {1};
  ViewC src;
  src.point_work = 4;
  src.round_work = 9;
  src.faulty = {2};
  src.point[{2, 0}] = 1;
  src.round[{2, 0}] = 5;

  merge_view(dst, src);
  CHECK(dst.point_work == 4);
  CHECK(dst.round_work == 9);
  CHECK(dst.faulty == std::set<ProcessId>{1, 2});
  CHECK(dst.point[{2, 0}] == 1);
  CHECK(reduced_view(dst) == 5);

  // Older pointer news does not overwrite fresher beliefs.
  ViewC stale;
  stale.point[{2, 0}] = 0;
  stale.round[{2, 0}] = 3;
  merge_view(dst, stale);
  CHECK(dst.point[{2, 0}] == 1);
}

TEST_CASE("initial views point at each group's first member, or past self") {
  ViewC v0 = initial_view(0, 4, 4);
  CHECK(v0.point.at({1, 0}) == 1);  // process 0 is the first member
  CHECK(v0.point.at({2, 0}) == 1);
  CHECK(v0.point.at({2, 1}) == 2);
  ViewC v3 = initial_view(3, 4, 4);
  CHECK(v3.point.at({1, 0}) == 0);
  CHECK(v3.point.at({2, 1}) == 2);
  CHECK(v3.faulty.empty());
  CHECK(v3.point_work == 1);
}

TEST_CASE("round arithmetic guard rejects configurations past 2^250") {
  CHECK_THROWS_AS(ProtoC(256, 4, false), ConfigError);
  CHECK_NOTHROW(ProtoC(128, 4, false));
}

TEST_CASE("failure-free run: the last id wakes first, the rest confirm") {
  auto proto = std::make_unique<ProtoC>(4, 4, false);
  NullAdversary adv;
  RunParams params;
  params.record_trace = true;
  Engine eng(*proto, adv, params);
  RunResult rr = eng.run();

  CHECK(rr.metrics.work_total == 5);
  CHECK(rr.metrics.work_redundant == 1);
  CHECK(rr.metrics.messages.ordinary == 5);
  CHECK(rr.metrics.messages.poll == 8);
  // Retired processes stay silent, so three polls go unanswered.
  CHECK(rr.metrics.messages.poll_reply == 5);
  CHECK(rr.metrics.rounds_until_all_retired == 26612);
  CHECK(rr.metrics.completed);

  // Wake order and view sizes at activation, fixed by the deadline algebra.
  CHECK(proto->activation_view_of(3) == 0);
  CHECK(proto->activation_view_of(0) == 4);
  CHECK(proto->activation_view_of(2) == 3);
  CHECK(proto->activation_view_of(1) == 6);

  std::map<ProcessId, Round> woke, retired;
  for (const auto& rec : rr.trace.rounds)
    for (const auto& ev : rec.events) {
      if (const auto* m = std::get_if<EvMode>(&ev))
        if (m->to == Mode::Active && !woke.count(m->process))
          woke[m->process] = rec.round;
      if (const auto* ret = std::get_if<EvRetire>(&ev))
        retired[ret->process] = rec.round;
    }
  CHECK(woke[3] == 24576);
  CHECK(woke[0] == 25356);
  CHECK(woke[2] == 26506);
  CHECK(woke[1] == 26610);
  CHECK(retired[3] == 24587);
  CHECK(retired[1] == 26612);
}

TEST_CASE("batched reporter: fewer reports, more redone work, longer sleep") {
  RunResult plain = run_free("c", 8, 4);
  CHECK(plain.metrics.work_total == 9);
  CHECK(plain.metrics.work_redundant == 1);
  CHECK(plain.metrics.messages.ordinary == 9);
  CHECK(plain.metrics.rounds_until_all_retired == 592060);

  RunResult batched = run_free("c-batched", 8, 4);
  CHECK(batched.metrics.work_total == 10);
  CHECK(batched.metrics.work_redundant == 2);
  CHECK(batched.metrics.messages.ordinary == 5);
  CHECK(batched.metrics.rounds_until_all_retired == 792728);
  CHECK(batched.metrics.completed);

  // Both within their closed-form guarantees.
  for (const char* name : {"c", "c-batched"}) {
    const Metrics& m =
        std::string(name) == "c" ? plain.metrics : batched.metrics;
    Bounds b = bound_for(name, 8, 4, 0, false);
    CHECK(m.work_total <= b.work);
    CHECK(m.messages.total() <= b.messages);
    CHECK(m.rounds_until_all_retired <= b.rounds);
  }
}

TEST_CASE("crash of the first waker: a poller replaces it and finishes") {
  CrashSchedule sched;
  sched.crashes.push_back(crash_silent(3, 24578));  // mid work sweep
  RunResult rr = run_checked("c", 4, 4, sched);
  CHECK(rr.verdict.pass);
  CHECK(rr.metrics.completed);
  CHECK(rr.metrics.failures_injected == 1);
  Bounds b = bound_for("c", 4, 4, 1, false);
  CHECK(rr.metrics.work_total <= b.work);
  CHECK(rr.metrics.messages.total() <= b.messages);
  CHECK(rr.metrics.rounds_until_all_retired <= b.rounds);
}

TEST_CASE("pre-activation crash: the next deadline in line takes over") {
  CrashSchedule sched;
  sched.crashes.push_back({3, Round(24576), true, SubsetSelector{}});
  RunResult rr = run_checked("c", 4, 4, sched);
  CHECK(rr.verdict.pass);
  CHECK(rr.metrics.completed);
  Bounds b = bound_for("c", 4, 4, 1, false);
  CHECK(rr.metrics.rounds_until_all_retired <= b.rounds);
}

TEST_CASE("two crashes under the batched reporter stay within bounds") {
  CrashSchedule sched;
  sched.crashes.push_back(crash_silent(3, 24577));
  sched.crashes.push_back(crash_silent(2, 49160));
  RunResult rr = run_checked("c-batched", 4, 4, sched);
  CHECK(rr.verdict.pass);
  CHECK(rr.metrics.completed);
  CHECK(rr.metrics.failures_injected == 2);
  Bounds b = bound_for("c-batched", 4, 4, 2, false);
  CHECK(rr.metrics.work_total <= b.work);
  CHECK(rr.metrics.messages.total() <= b.messages);
  CHECK(rr.metrics.rounds_until_all_retired <= b.rounds);
}
