#include <set>

#include "doctest.h"
#include "dpdp/score.hpp"
#include "dpdp/sim.hpp"
#include "dpdp/solvers.hpp"
#include "helpers.hpp"

using namespace dpdp;
using namespace dpdp::testing;

namespace {

// A->B world with one vehicle; travel 3600 s, 40 km.
WorldBuilder two_factory_world() {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2);
  w.leg("A", "B", 40.0, 3600);
  w.vehicle("V_1", 15);
  return w;
}

void finish(Simulation& sim, DispatchPlan book) {
  while (sim.status() == RunStatus::Running) {
    Snapshot snap = sim.snapshot();
    book = reconcile_book(book, snap.view);
    REQUIRE(sim.apply_dispatch(book).empty());
    sim.advance_epoch();
  }
}

}  // namespace

TEST_CASE("[DERIVED] sim: single pickup-delivery timeline is exact") {
  WorldBuilder w = two_factory_world();
  w.order("K1", "A", "B", 0, 7000, 0, 0, 1);  // one box: 45 s handling
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("A", {}, {"K1-001"}), {stop("B", {"K1-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);

  REQUIRE(rr.status == RunStatus::Finished);
  CHECK(first_event(rr.log, EventKind::OrderReleased).t == 0);
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_1", "A").t == 0);
  CHECK(first_event(rr.log, EventKind::DockAllocated, "V_1", "A").t == 0);
  // approach 1800 + box load 45.
  CHECK(first_event(rr.log, EventKind::ItemLoaded, "V_1", "", "K1-001").t == 1845);
  CHECK(first_event(rr.log, EventKind::ServiceDone, "V_1", "A").t == 1845);
  // drive 3600, then approach 1800 + box unload 45.
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_1", "B").t == 5445);
  CHECK(first_event(rr.log, EventKind::DockAllocated, "V_1", "B").t == 5445);
  CHECK(first_event(rr.log, EventKind::ItemDelivered, "V_1", "B", "K1-001").t == 7290);
  CHECK(first_event(rr.log, EventKind::ServiceDone, "V_1", "B").t == 7290);

  CHECK(rr.report.status == "FINISHED");
  CHECK(rr.report.f1 == 290);  // 7290 - 7000
  CHECK(rr.report.f2 == 40.0);
  CHECK(rr.report.f == 10000.0 * 290 + 40.0);
  CHECK(rr.report.per_order_timeout.at("K1") == 290);
  CHECK(rr.report.per_vehicle_distance.at("V_1") == 40.0);
  CHECK(rr.report.orders_completed == 1);
  CHECK(rr.report.orders_total == 1);
  CHECK(rr.epochs == 13);  // completion inside window [7200, 7800)
  CHECK(verify_event_log(rr.log, inst).empty());
}

TEST_CASE("[DERIVED] sim: arrival completion semantics stop the clock at the gate") {
  WorldBuilder w = two_factory_world();
  w.config().completion_semantics = CompletionSemantics::Arrival;
  w.order("K1", "A", "B", 0, 5000, 0, 0, 1);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("A", {}, {"K1-001"}), {stop("B", {"K1-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);
  REQUIRE(rr.status == RunStatus::Finished);
  // Completion = arrival at B (5445), not unload end (7290).
  CHECK(rr.report.f1 == 445);
}

TEST_CASE("[DERIVED] sim: stacked orders unload last-in first-out with per-item timing") {
  WorldBuilder w = two_factory_world();
  w.order("K1", "A", "B", 0, 7000, 1, 0, 0);  // standard: 180 s
  w.order("K2", "A", "B", 0, 7000, 0, 1, 0);  // small: 90 s
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] = VehicleCommand{
      stop("A", {}, {"K1-001", "K2-001"}),
      {stop("B", {"K1-001", "K2-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);
  REQUIRE(rr.status == RunStatus::Finished);

  // Loads run in list order: K1 at 1800+180, K2 at +90 more.
  CHECK(first_event(rr.log, EventKind::ItemLoaded, "V_1", "", "K1-001").t == 1980);
  CHECK(first_event(rr.log, EventKind::ItemLoaded, "V_1", "", "K2-001").t == 2070);
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_1", "B").t == 5670);
  // Unloads pop the stack: K2 (top) first at 5670+1800+90, K1 at +180 more.
  const Sec k2 = first_event(rr.log, EventKind::ItemDelivered, "V_1", "", "K2-001").t;
  const Sec k1 = first_event(rr.log, EventKind::ItemDelivered, "V_1", "", "K1-001").t;
  CHECK(k2 == 7560);
  CHECK(k1 == 7740);
  CHECK(k2 < k1);
  CHECK(rr.report.f1 == (7560 - 7000) + (7740 - 7000));
  CHECK(verify_event_log(rr.log, inst).empty());
}

TEST_CASE("[DERIVED] sim: one dock serves strictly first-come-first-served") {
  WorldBuilder w;
  w.factory("T", 1).factory("C", 2).factory("D", 2);
  w.leg("C", "T", 10.0, 1000).leg("D", "T", 12.0, 1200).leg("C", "D", 8.0, 900);
  w.vehicle("V_1", 15).vehicle("V_2", 15);
  w.order("K1", "T", "C", 0, 14400, 1, 0, 0);
  w.order("K2", "T", "D", 0, 14400, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "C"}, {"V_2", "D"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("T", {}, {"K1-001"}), {stop("C", {"K1-001"}, {})}};
  plan.commands["V_2"] =
      VehicleCommand{stop("T", {}, {"K2-001"}), {stop("D", {"K2-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);
  REQUIRE(rr.status == RunStatus::Finished);

  // V_1 arrives first (1000 vs 1200) and holds the only dock until 2980.
  CHECK(first_event(rr.log, EventKind::DockAllocated, "V_1", "T").t == 1000);
  CHECK(first_event(rr.log, EventKind::ServiceDone, "V_1", "T").t == 2980);
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_2", "T").t == 1200);
  CHECK(first_event(rr.log, EventKind::DockAllocated, "V_2", "T").t == 2980);
  CHECK(first_event(rr.log, EventKind::ServiceDone, "V_2", "T").t == 4960);
  CHECK(count_events(rr.log, EventKind::DockAllocated, "T") == 2);
  CHECK(verify_event_log(rr.log, inst).empty());
}

TEST_CASE("[DERIVED] sim: simultaneous arrivals resolve deterministically") {
  WorldBuilder w;
  w.factory("T", 1).factory("C", 2).factory("D", 2);
  w.leg("C", "T", 10.0, 1000).leg("D", "T", 10.0, 1000).leg("C", "D", 8.0, 900);
  w.vehicle("V_1", 15).vehicle("V_2", 15);
  w.order("K1", "T", "C", 0, 14400, 1, 0, 0);
  w.order("K2", "T", "D", 0, 14400, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "C"}, {"V_2", "D"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("T", {}, {"K1-001"}), {stop("C", {"K1-001"}, {})}};
  plan.commands["V_2"] =
      VehicleCommand{stop("T", {}, {"K2-001"}), {stop("D", {"K2-001"}, {})}};

  SimRunResult a = run_with_initial_plan(inst, plan);
  SimRunResult b = run_with_initial_plan(inst, plan);
  REQUIRE(a.status == RunStatus::Finished);
  CHECK(log_to_jsonl(a.log) == log_to_jsonl(b.log));
  CHECK(a.report == b.report);

  // Both arrive at 1000; one is served immediately, the other at 2980.
  std::multiset<Sec> alloc_times;
  for (const auto& e : a.log)
    if (e.kind == EventKind::DockAllocated && e.factory == "T") alloc_times.insert(e.t);
  CHECK(alloc_times == std::multiset<Sec>{1000, 2980});
}

TEST_CASE("[DERIVED] sim: frozen stop must be echoed, transit lists stay open") {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2).factory("C", 2);
  w.leg("A", "B", 40.0, 3600).leg("A", "C", 30.0, 2700).leg("B", "C", 20.0, 1800);
  w.vehicle("V_1", 15);
  w.order("K1", "A", "B", 0, 9000, 1, 0, 0);
  w.order("K2", "A", "B", 0, 9000, 0, 1, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  Simulation sim(inst);
  DispatchPlan book;
  book.commands["V_1"] = VehicleCommand{
      stop("A", {}, {"K1-001", "K2-001"}),
      {stop("B", {"K1-001", "K2-001"}, {})}};
  REQUIRE(sim.apply_dispatch(book).empty());
  sim.advance_epoch();

  // t=600: mid-service at A (loads at 1980/2070); the stop is frozen.
  Snapshot snap = sim.snapshot();
  REQUIRE(snap.now == 600);
  const VehicleView* vv = snap.view.vehicle("V_1");
  REQUIRE(vv != nullptr);
  CHECK(vv->cur_factory_id == "A");
  REQUIRE(vv->destination.has_value());
  CHECK(vv->destination->pickup_item_list == std::vector<ItemId>{"K1-001", "K2-001"});
  // Assigned items count as ongoing even before the physical load completes.
  CHECK(snap.view.unallocated_items.empty());
  REQUIRE(snap.view.ongoing_items.size() == 2);
  CHECK(snap.view.ongoing_items[0].delivery_state == 1);

  DispatchPlan tampered = reconcile_book(book, snap.view);
  tampered.commands["V_1"].destination->pickup_item_list = {"K1-001"};
  auto vs = sim.apply_dispatch(tampered);
  REQUIRE_FALSE(vs.empty());
  CHECK(vs[0].code == ViolationCode::ListCommitted);

  DispatchPlan echoed = reconcile_book(book, snap.view);
  REQUIRE(sim.apply_dispatch(echoed).empty());
  book = echoed;
  sim.advance_epoch();
  sim.advance_epoch();
  sim.advance_epoch();
  sim.advance_epoch();

  // t=3000: in transit toward B (departed 2070). Destination factory locked.
  snap = sim.snapshot();
  REQUIRE(snap.now == 3000);
  vv = snap.view.vehicle("V_1");
  CHECK(vv->cur_factory_id.empty());
  REQUIRE(vv->destination.has_value());
  CHECK(vv->destination->factory_id == "B");
  CHECK(vv->carrying_items == std::vector<ItemId>{"K1-001", "K2-001"});

  DispatchPlan rerouted = reconcile_book(book, snap.view);
  rerouted.commands["V_1"].destination->factory_id = "C";
  vs = sim.apply_dispatch(rerouted);
  REQUIRE_FALSE(vs.empty());
  CHECK(vs[0].code == ViolationCode::DestinationLocked);

  // Reordering the delivery lists of the still-mutable stop is legal.
  DispatchPlan reordered = reconcile_book(book, snap.view);
  reordered.commands["V_1"].destination->delivery_item_list = {"K2-001", "K1-001"};
  REQUIRE(sim.apply_dispatch(reordered).empty());
  finish(sim, reordered);
  CHECK(sim.status() == RunStatus::Finished);
  CHECK(verify_event_log(sim.log(), inst).empty());
}

TEST_CASE("[DERIVED] sim: empty-service stops pass through without docking") {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2).factory("C", 2);
  w.leg("A", "B", 40.0, 3600).leg("B", "C", 20.0, 1800).leg("A", "C", 55.0, 5000);
  w.vehicle("V_1", 15);
  w.order("K1", "A", "C", 0, 14400, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] = VehicleCommand{
      stop("A", {}, {"K1-001"}),
      {stop("B"), stop("C", {"K1-001"}, {})}};  // B: no service, detour only
  SimRunResult rr = run_with_initial_plan(inst, plan);
  REQUIRE(rr.status == RunStatus::Finished);

  const Sec leave_a = first_event(rr.log, EventKind::ServiceDone, "V_1", "A").t;  // 1980
  const SimEvent& arrive_b = first_event(rr.log, EventKind::VehicleArrived, "V_1", "B");
  CHECK(arrive_b.t == leave_a + 3600);
  const SimEvent& depart_b = first_event(rr.log, EventKind::VehicleDeparted, "V_1", "B");
  CHECK(depart_b.t == arrive_b.t);  // instantaneous pass-through
  CHECK(depart_b.empty_stop);
  CHECK(count_events(rr.log, EventKind::DockAllocated, "B") == 0);
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_1", "C").t == arrive_b.t + 1800);
  CHECK(first_event(rr.log, EventKind::ItemDelivered, "V_1", "C").t ==
        arrive_b.t + 1800 + 1800 + 180);
  // Distance follows the detour: 40 + 20, not the direct 55.
  CHECK(rr.report.per_vehicle_distance.at("V_1") == 60.0);
  CHECK(verify_event_log(rr.log, inst).empty());
}

TEST_CASE("[DERIVED] sim: boundary releases appear in the next snapshot") {
  WorldBuilder w = two_factory_world();
  w.order("K1", "A", "B", 600, 15000, 0, 0, 1);  // created exactly at epoch end
  Instance inst = w.build();

  Simulation sim(inst);
  CHECK(sim.snapshot().view.unallocated_items.empty());
  CHECK(sim.snapshot().view.ongoing_items.empty());
  REQUIRE(sim.apply_dispatch({}).empty());
  sim.advance_epoch();

  Snapshot snap = sim.snapshot();
  CHECK(snap.now == 600);
  REQUIRE(snap.view.unallocated_items.size() == 1);
  CHECK(snap.view.unallocated_items[0].id == "K1-001");
  CHECK(snap.view.unallocated_items[0].creation_time == 600);
  CHECK(first_event(sim.log(), EventKind::OrderReleased).t == 600);
}

TEST_CASE("[DERIVED] sim: undispatched orders abort at the deadline boundary") {
  WorldBuilder w = two_factory_world();
  w.order("K1", "A", "B", 0, 86399, 1, 0, 0);
  Instance inst = w.build();

  SimRunResult rr = run_to_completion(inst, [](const Snapshot&) { return DispatchPlan{}; });
  CHECK(rr.status == RunStatus::DeadlineAborted);
  CHECK(rr.report.status == "ABORTED_DISPATCH_DEADLINE");
  CHECK(rr.report.orders_completed == 0);

  // Strictly-greater rule: boundary 14400 (age exactly 14400) passes, the
  // next boundary 15000 aborts.
  Sec last_boundary = -1;
  std::int64_t last_epoch = -1;
  bool saw_14400 = false;
  for (const auto& e : rr.log)
    if (e.kind == EventKind::EpochBoundary) {
      last_boundary = e.t;
      last_epoch = e.epoch;
      if (e.t == 14400) saw_14400 = true;
    }
  CHECK(saw_14400);
  CHECK(last_boundary == 15000);
  CHECK(last_epoch == 24);
  CHECK(rr.epochs == 25);
}

TEST_CASE("[DERIVED] sim: the deadline gates dispatch, not delivery") {
  WorldBuilder w;
  w.factory("A", 2).factory("B", 2);
  w.leg("A", "B", 100.0, 90000);  // delivery will take far past the deadline
  w.vehicle("V_1", 15);
  w.order("K1", "A", "B", 0, 7000, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("A", {}, {"K1-001"}), {stop("B", {"K1-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);
  CHECK(rr.status == RunStatus::Finished);  // no deadline abort: dispatched at 0
  CHECK(rr.report.f1 == 1980 + 90000 + 1980 - 7000);
}

TEST_CASE("[DERIVED] sim: work shift gates dock allocation only") {
  WorldBuilder w = two_factory_world();
  w.config().work_shift = std::make_pair<Sec, Sec>(3600, 5000);
  w.order("K1", "A", "B", 0, 9000, 1, 0, 0);
  Instance inst = w.build();
  inst.config.rng_seed = find_seed(inst, starts_at({{"V_1", "A"}}));

  DispatchPlan plan;
  plan.commands["V_1"] =
      VehicleCommand{stop("A", {}, {"K1-001"}), {stop("B", {"K1-001"}, {})}};
  SimRunResult rr = run_with_initial_plan(inst, plan);
  REQUIRE(rr.status == RunStatus::Finished);

  // Arrived at 0 but the shift opens at 3600; service then runs to completion
  // even though it crosses the 5000 close.
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_1", "A").t == 0);
  CHECK(first_event(rr.log, EventKind::DockAllocated, "V_1", "A").t == 3600);
  CHECK(first_event(rr.log, EventKind::ItemLoaded, "V_1").t == 3600 + 1800 + 180);
  CHECK(first_event(rr.log, EventKind::ServiceDone, "V_1", "A").t == 5580);
  // B is reached at 9180, outside the shift: next day's opening serves it.
  CHECK(first_event(rr.log, EventKind::VehicleArrived, "V_1", "B").t == 9180);
  CHECK(first_event(rr.log, EventKind::DockAllocated, "V_1", "B").t == 86400 + 3600);
  CHECK(first_event(rr.log, EventKind::ItemDelivered, "V_1", "B").t == 90000 + 1980);
  CHECK(verify_event_log(rr.log, inst).empty());
}

TEST_CASE("[DERIVED] sim: a rejected dispatch aborts the run atomically") {
  WorldBuilder w = two_factory_world();
  w.order("K1", "A", "B", 0, 7000, 1, 0, 0);
  Instance inst = w.build();

  SimRunResult rr = run_to_completion(inst, [](const Snapshot&) {
    DispatchPlan bad;
    bad.commands["V_1"] = VehicleCommand{stop("NOWHERE"), {}};
    return bad;
  });
  CHECK(rr.status == RunStatus::Running);  // engine state untouched
  REQUIRE_FALSE(rr.violations.empty());
  CHECK(rr.violations[0].code == ViolationCode::UnknownId);
  CHECK(rr.report.status == "ABORTED_INVALID_DISPATCH");
  CHECK(rr.epochs == 0);
}

TEST_CASE("[TRIVIAL] sim: greedy completes a generated instance") {
  GeneratorParams p;
  p.factory_count = 5;
  p.vehicle_count = 4;
  p.order_count = 20;
  p.seed = 21;
  Instance inst = generate_instance(p);
  GreedyPolicy greedy(inst);
  SimRunResult rr = run_to_completion(inst, [&](const Snapshot& s) { return greedy.decide(s); });
  CHECK(rr.status == RunStatus::Finished);
  CHECK(rr.report.orders_completed == 20);
  CHECK(verify_event_log(rr.log, inst).empty());
}
