#include <algorithm>

#include "doctest.h"
#include "dpdp/score.hpp"
#include "dpdp/sim.hpp"
#include "dpdp/solvers.hpp"
#include "helpers.hpp"

using namespace dpdp;
using namespace dpdp::testing;

TEST_CASE("[PAPER] score: combined objective is lambda * timeout + mean distance") {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2);
  w.leg("A", "B", 10.0, 1000);
  w.vehicle("V_1", 15).vehicle("V_2", 15);
  w.order("K1", "A", "B", 0, 10000, 1, 0, 0);
  Instance inst = w.build();

  std::map<OrderId, Sec> completion{{"K1", 10600}};  // 600 s late
  std::map<VehicleId, double> distance{{"V_1", 10.0}, {"V_2", 30.0}};
  ScoreReport r = make_score_report("FINISHED", completion, distance, inst);
  CHECK(r.f1 == 600);
  CHECK(r.f2 == 20.0);  // (10 + 30) / 2
  CHECK(r.lambda == 10000.0);
  CHECK(r.f == 6000020.0);  // exactly
  CHECK(r.orders_completed == 1);
  CHECK(r.orders_total == 1);
  CHECK(r.per_order_timeout.at("K1") == 600);

  // Early completion accrues no negative timeout.
  ScoreReport early = make_score_report("FINISHED", {{"K1", 9000}}, distance, inst);
  CHECK(early.f1 == 0);
  CHECK(early.per_order_timeout.at("K1") == 0);
  CHECK(early.f == 20.0);

  // Unfinished orders contribute nothing to f1 (incomplete run).
  ScoreReport inc = make_score_report("INCOMPLETE", {}, distance, inst);
  CHECK(inc.f1 == 0);
  CHECK(inc.orders_completed == 0);
  CHECK(inc.status == "INCOMPLETE");
}

TEST_CASE("[DERIVED] score: replay oracle reproduces engine reports field-for-field") {
  for (std::uint64_t seed : {1, 2, 3, 4, 5, 6, 7, 8}) {
    GeneratorParams p;
    p.factory_count = 5;
    p.vehicle_count = 3;
    p.order_count = 15;
    p.seed = seed;
    Instance inst = generate_instance(p);

    for (const char* policy_name : {"greedy", "threshold"}) {
      auto policy = make_policy(policy_name, inst);
      SimRunResult rr =
          run_to_completion(inst, [&](const Snapshot& s) { return policy->decide(s); });
      REQUIRE(rr.status == RunStatus::Finished);
      CHECK(verify_event_log(rr.log, inst).empty());
      ScoreReport replay = replay_score(rr.log, inst);
      CHECK(replay == rr.report);  // including status, f, and both maps
    }
  }
}

TEST_CASE("[DERIVED] score: replay flags a truncated run as incomplete") {
  GeneratorParams p;
  p.factory_count = 4;
  p.vehicle_count = 2;
  p.order_count = 8;
  p.seed = 9;
  Instance inst = generate_instance(p);
  GreedyPolicy greedy(inst);
  SimRunResult rr = run_to_completion(inst, [&](const Snapshot& s) { return greedy.decide(s); });
  REQUIRE(rr.status == RunStatus::Finished);

  EventLog half(rr.log.begin(), rr.log.begin() + std::ptrdiff_t(rr.log.size() / 2));
  ScoreReport replay = replay_score(half, inst);
  CHECK(replay.status == "INCOMPLETE");
  CHECK(replay.orders_completed < rr.report.orders_completed);
}

TEST_CASE("[DERIVED] score: the log verifier catches tampering") {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2);
  w.leg("A", "B", 40.0, 3600);
  w.vehicle("V_1", 15);
  w.order("K1", "A", "B", 0, 9000, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("A", {}, {"K1-001"}), {stop("B", {"K1-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);
  REQUIRE(rr.status == RunStatus::Finished);
  REQUIRE(verify_event_log(rr.log, inst).empty());

  SUBCASE("dropping a delivery breaks the item lifecycle") {
    EventLog bad;
    for (const auto& e : rr.log)
      if (e.kind != EventKind::ItemDelivered) bad.push_back(e);
    CHECK_FALSE(verify_event_log(bad, inst).empty());
  }
  SUBCASE("stretching a transit leg breaks exact durations") {
    EventLog bad = rr.log;
    for (auto& e : bad)
      if (e.kind == EventKind::VehicleArrived && e.factory == "B") e.t += 1;
    // Later events now precede the arrival; both the duration and monotonic
    // time checks have a say. Any problem suffices.
    CHECK_FALSE(verify_event_log(bad, inst).empty());
  }
  SUBCASE("doubling a dock allocation exceeds the dock ledger") {
    EventLog bad = rr.log;
    auto it = std::find_if(bad.begin(), bad.end(), [](const SimEvent& e) {
      return e.kind == EventKind::DockAllocated;
    });
    REQUIRE(it != bad.end());
    bad.insert(it, *it);
    CHECK_FALSE(verify_event_log(bad, inst).empty());
  }
  SUBCASE("releasing an order at the wrong time") {
    EventLog bad = rr.log;
    for (auto& e : bad)
      if (e.kind == EventKind::OrderReleased) e.t = 0;  // keep order, move time
    bad.front().t = 1;  // creation is 0: now wrong
    bad.front().kind = EventKind::OrderReleased;
    CHECK_FALSE(verify_event_log(bad, inst).empty());
  }
}

TEST_CASE("[DERIVED] score: event log jsonl round-trip") {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2);
  w.leg("A", "B", 40.0, 3600);
  w.vehicle("V_1", 15);
  w.order("K1", "A", "B", 0, 9000, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("A", {}, {"K1-001"}), {stop("B", {"K1-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);

  std::string text = log_to_jsonl(rr.log);
  EventLog back = log_from_jsonl(text);
  CHECK(back == rr.log);
  CHECK(log_to_jsonl(back) == text);

  TempDir tmp("score_log");
  save_log(rr.log, tmp.path() / "events.jsonl");
  CHECK(load_log(tmp.path() / "events.jsonl") == rr.log);

  CHECK_THROWS_AS(log_from_jsonl("{\"t\": \"not an int\"}\n"), ParseError);
  CHECK_THROWS_AS(event_kind_from_name("NOT_A_KIND"), ParseError);
}

TEST_CASE("[DERIVED] score: report json round-trip and status-blind equality") {
  ScoreReport r;
  r.status = "FINISHED";
  r.f1 = 1234;
  r.f2 = 56.75;
  r.lambda = 10000.0;
  r.f = 10000.0 * 1234 + 56.75;
  r.orders_completed = 3;
  r.orders_total = 3;
  r.per_order_timeout = {{"K1", 1000}, {"K2", 234}, {"K3", 0}};
  r.per_vehicle_distance = {{"V_1", 40.5}, {"V_2", 73.0}};

  ScoreReport back = report_from_json(report_to_json(r));
  CHECK(back == r);

  ScoreReport aborted = r;
  aborted.status = "ABORTED_DISPATCH_DEADLINE";
  CHECK(reports_equal_ignoring_status(r, aborted));
  CHECK_FALSE(r == aborted);
  aborted.f1 += 1;
  CHECK_FALSE(reports_equal_ignoring_status(r, aborted));

  CHECK(run_status_name(RunStatus::Finished) == "FINISHED");
  CHECK(run_status_name(RunStatus::DeadlineAborted) == "ABORTED_DISPATCH_DEADLINE");
  CHECK(run_status_name(RunStatus::Stalled) == "ABORTED_STALLED");
}
