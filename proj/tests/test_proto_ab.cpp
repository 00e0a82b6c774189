// Takeover protocols: group layout, deadline algebra, checkpoint plans, and
// full runs under targeted crash schedules.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <worksim/bounds.hpp>
#include <worksim/proto_ab.hpp>

#include "util.hpp"

using namespace worksim;
using namespace worksim::testutil;

TEST_CASE("process ids split into sqrt(t) groups of sqrt(t) consecutive ids") {
  CHECK(isqrt_exact(4) == 2);
  CHECK(isqrt_exact(16) == 4);
  CHECK(isqrt_exact(1) == 1);
  CHECK_THROWS_AS(isqrt_exact(5), ConfigError);
  CHECK_THROWS_AS(isqrt_exact(0), ConfigError);

  CHECK(group_of(0, 4) == 1);
  CHECK(group_of(1, 4) == 1);
  CHECK(group_of(2, 4) == 2);
  CHECK(group_of(15, 16) == 4);
  CHECK(group_members(2, 4) == std::vector<ProcessId>{2, 3});
  CHECK(group_members(1, 16) == std::vector<ProcessId>{0, 1, 2, 3});
}

TEST_CASE("eager takeover rounds are j(n+3t), strictly increasing") {
  CHECK(dd_a(0, 8, 4) == 0);
  CHECK(dd_a(1, 8, 4) == 20);
  CHECK(dd_a(3, 8, 4) == 60);
  CHECK(dd_a(2, 64, 16) == 224);
  for (ProcessId j = 1; j < 16; ++j)
    CHECK(dd_a(j, 64, 16) > dd_a(j - 1, 64, 16));
}

TEST_CASE("lean takeover delays: hand-computed values at n=8, t=4") {
  CHECK(pto(8, 4) == 4);
  CHECK(gto(0, 8, 4) == 15);  // n/sqrt(t) + 3 sqrt(t) + (sqrt(t)-1) pto + 1
  CHECK(gto(1, 8, 4) == 11);

  // Same group: id distance times the per-unit timeout.
  CHECK(dd_b(1, 0, 8, 4) == 4);
  CHECK(dd_b(3, 2, 8, 4) == 4);
  // Across groups: the predecessor's group timeout plus skipped groups plus
  // the in-group offset.
  CHECK(dd_b(2, 0, 8, 4) == 15);
  CHECK(dd_b(2, 1, 8, 4) == 11);
  CHECK(dd_b(3, 0, 8, 4) == 19);
  CHECK(dd_b(3, 1, 8, 4) == 15);

  CHECK_THROWS_AS(dd_b(1, 1, 8, 4), ConfigError);
  CHECK_THROWS_AS(dd_b(0, 2, 8, 4), ConfigError);
}

TEST_CASE("lean delays telescope: delay(j,k) + delay(l,j) = delay(l,k)") {
  // The full grid is covered by the acceptance suite; this pins one shape.
  const long long n = 8;
  const int t = 4;
  for (ProcessId k = 0; k < t; ++k)
    for (ProcessId j = k + 1; j < t; ++j)
      for (ProcessId l = j + 1; l < t; ++l)
        CHECK(dd_b(j, k, n, t) + dd_b(l, j, n, t) == dd_b(l, k, n, t));
}

TEST_CASE("fresh checkpoint plan: chunk work, partials, cascades at chunk ends") {
  auto plan = checkpoint_plan(0, 8, 4, CheckpointKnowledge{});
  REQUIRE(plan.size() == 16);  // 8 work + 4 partials + 2 cascades of 2

  const auto* w0 = std::get_if<PlanWork>(&plan[0]);
  REQUIRE(w0 != nullptr);
  CHECK(w0->unit == 1);

  const auto* b2 = std::get_if<PlanBroadcast>(&plan[2]);
  REQUIRE(b2 != nullptr);
  const auto* p2 = std::get_if<PartialCkpt>(&b2->payload);
  REQUIRE(p2 != nullptr);
  CHECK(p2->c == 1);
  CHECK(b2->to == std::vector<ProcessId>{1});

  // Chunk boundary: full checkpoints to the next group, then the remainder.
  const auto* b6 = std::get_if<PlanBroadcast>(&plan[6]);
  REQUIRE(b6 != nullptr);
  const auto* f6 = std::get_if<FullCkpt>(&b6->payload);
  REQUIRE(f6 != nullptr);
  CHECK(f6->c == 2);
  CHECK(f6->g == 2);
  CHECK(b6->to == std::vector<ProcessId>{2, 3});
  const auto* b7 = std::get_if<PlanBroadcast>(&plan[7]);
  REQUIRE(b7 != nullptr);
  CHECK(b7->to == std::vector<ProcessId>{1});
}

TEST_CASE("resume plans rebroadcast according to what was heard") {
  // Partial at a chunk boundary: repeat it, carry the cascade onward.
  auto from_partial = checkpoint_plan(1, 8, 4, CheckpointKnowledge{2, 0, 0});
  CHECK(from_partial.size() == 11);  // 3 rebroadcasts + chunks 3 and 4
  const auto* b0 = std::get_if<PlanBroadcast>(&from_partial[0]);
  REQUIRE(b0 != nullptr);
  CHECK(std::get_if<PartialCkpt>(&b0->payload) != nullptr);

  // Mid-chunk partial: nothing to rebroadcast, resume the work directly.
  auto mid = checkpoint_plan(1, 8, 4, CheckpointKnowledge{1, 0, 0});
  CHECK(mid.size() == 13);
  CHECK(std::get_if<PlanWork>(&mid[0]) != nullptr);

  // A group mate fell mid-cascade: repeat its step, then continue.
  auto mate = checkpoint_plan(1, 8, 4, CheckpointKnowledge{2, 2, 0});
  CHECK(mate.size() == 9);
  const auto* m0 = std::get_if<PlanBroadcast>(&mate[0]);
  REQUIRE(m0 != nullptr);
  const auto* mf = std::get_if<FullCkpt>(&m0->payload);
  REQUIRE(mf != nullptr);
  CHECK(mf->c == 2);
  CHECK(mf->g == 2);

  // Heard from another group: announce the resume point to own group only.
  auto other = checkpoint_plan(2, 8, 4, CheckpointKnowledge{2, 2, 1});
  CHECK(other.size() == 7);
  const auto* o0 = std::get_if<PlanBroadcast>(&other[0]);
  REQUIRE(o0 != nullptr);
  CHECK(std::get_if<PartialCkpt>(&o0->payload) != nullptr);
  CHECK(o0->to == std::vector<ProcessId>{3});
}

TEST_CASE("shape validation rejects non-square t and ragged n") {
  CHECK_THROWS_AS(ProtoA(7, 4), ConfigError);
  CHECK_THROWS_AS(ProtoA(8, 5), ConfigError);
  CHECK_THROWS_AS(ProtoA(2, 4), ConfigError);
  CHECK_THROWS_AS(ProtoB(7, 4), ConfigError);
}

TEST_CASE("eager variant, failure-free: one survivor does everything") {
  RunResult rr = run_free("a", 8, 4);
  CHECK(rr.metrics.work_total == 8);
  CHECK(rr.metrics.work_redundant == 0);
  CHECK(rr.metrics.messages.ordinary == 10);
  CHECK(rr.metrics.messages.total() == 10);
  CHECK(rr.metrics.rounds_until_all_retired == 16);
  CHECK(rr.metrics.completed);
}

TEST_CASE("eager variant: silent first-round crash hands over at the deadline") {
  CrashSchedule sched;
  sched.crashes.push_back(crash_silent(0, 1));
  RunResult rr = run_scheduled("a", 8, 4, sched);
  // Successor 1 restarts from scratch at round 20 and redoes unit 1.
  CHECK(rr.metrics.completed);
  CHECK(rr.metrics.work_total == 9);
  CHECK(rr.metrics.work_redundant == 1);
  CHECK(rr.metrics.rounds_until_all_retired == 35);  // 20 + 16 - 1
  Bounds b = bound_for("a", 8, 4, 1, false);
  CHECK(rr.metrics.work_total <= b.work);
  CHECK(rr.metrics.messages.total() <= b.messages);
  CHECK(rr.metrics.rounds_until_all_retired <= b.rounds);
}

TEST_CASE("eager variant: a checkpoint that survives the crash is not redone") {
  CrashSchedule sched;
  sched.crashes.push_back(crash_partial(0, 3, {1}));  // the first partial
  RunResult rr = run_scheduled("a", 8, 4, sched);
  CHECK(rr.metrics.completed);
  CHECK(rr.metrics.work_total == 8);  // units 1..2 done once, resumed at 3
  CHECK(rr.metrics.work_redundant == 0);
}

TEST_CASE("lean variant, failure-free: same texture as the eager one") {
  RunResult rr = run_free("b", 8, 4);
  CHECK(rr.metrics.work_total == 8);
  CHECK(rr.metrics.messages.total() == 10);
  CHECK(rr.metrics.rounds_until_all_retired == 16);
  CHECK(rr.metrics.completed);
}

TEST_CASE("lean variant: deadlines restart from the last sign of life") {
  CrashSchedule sched;
  sched.crashes.push_back(crash_silent(0, 1));
  RunResult rr = run_scheduled("b", 8, 4, sched);
  // Group mate 1 expires at delay 4, takes over from scratch at round 4,
  // and its 16-step plan ends at round 19, the round the release lands.
  CHECK(rr.metrics.completed);
  CHECK(rr.metrics.work_total == 9);
  CHECK(rr.metrics.work_redundant == 1);
  CHECK(rr.metrics.rounds_until_all_retired == 19);
  CHECK(rr.metrics.messages.go_ahead == 0);
}

TEST_CASE("lean variant: go-ahead probe yields to a better-informed survivor") {
  // Group 1 dies entirely; the dying leader's last cascade reaches process 2
  // but not process 3. At its delay 19 process 3 probes process 2, which
  // resumes from the checkpoint it heard instead of redoing chunks 1 and 2.
  CrashSchedule sched;
  sched.crashes.push_back(crash_silent(1, 1));
  sched.crashes.push_back(crash_partial(0, 7, {2}));
  RunResult rr = run_scheduled("b", 8, 4, sched);
  CHECK(rr.metrics.completed);
  CHECK(rr.metrics.work_total == 8);
  CHECK(rr.metrics.work_redundant == 0);
  CHECK(rr.metrics.messages.go_ahead == 1);
  // Sends to already-crashed processes still cost a message: two partials
  // to the dead group mate, the subset-limited cascade, three resume
  // partials to the prober.
  CHECK(rr.metrics.messages.ordinary == 6);
  CHECK(rr.metrics.rounds_until_all_retired == 27);
  Bounds b = bound_for("b", 8, 4, 2, false);
  CHECK(rr.metrics.messages.total() <= b.messages);
  CHECK(rr.metrics.rounds_until_all_retired <= b.rounds);
}

TEST_CASE("lean variant: every process crashed leaves an incomplete run") {
  CrashSchedule sched;
  for (ProcessId p = 0; p < 4; ++p) sched.crashes.push_back(crash_silent(p, 1));
  RunResult rr = run_scheduled("b", 8, 4, sched);
  CHECK_FALSE(rr.metrics.completed);
  CHECK(rr.metrics.work_total == 1);
  CHECK(rr.metrics.failures_injected == 4);
}
