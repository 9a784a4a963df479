#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include "dpdp/events.hpp"
#include "dpdp/instance.hpp"
#include "dpdp/score.hpp"
#include "dpdp/validate.hpp"
#include "dpdp/wire.hpp"

namespace dpdp {

// Hard cap on simulated epochs; reaching it marks the run Stalled. Guards
// against policies that keep cargo circulating without ever finishing.
inline constexpr std::int64_t kMaxEpochs = 100000;

// State handed to a policy at each decision point (start of an epoch).
struct Snapshot {
  Sec now = 0;
  std::int64_t epoch_index = 0;  // the epoch about to be simulated
  PolicyView view;
  std::int64_t orders_completed = 0;
  std::int64_t orders_total = 0;
};

// Deterministic discrete-event engine. The driving loop is:
//   snapshot() -> policy -> apply_dispatch() -> advance_epoch(), repeat
// until status() leaves Running. apply_dispatch validates against the same
// snapshot and rejects atomically; an empty plan (all-null commands) is
// always acceptable for vehicles without frozen obligations.
class Simulation {
 public:
  explicit Simulation(Instance inst);

  Sec now() const { return now_; }
  std::int64_t epoch_index() const { return epoch_; }
  RunStatus status() const { return status_; }
  const Instance& instance() const { return inst_; }
  const EventLog& log() const { return log_; }

  PolicyView policy_view() const;
  Snapshot snapshot() const;

  // Validates and, when clean, installs the plan. Newly directed parked
  // vehicles depart immediately. Returns the violations on rejection, in
  // which case no state changes.
  std::vector<Violation> apply_dispatch(const DispatchPlan& plan);

  // Processes every event inside the current epoch window plus order
  // releases falling exactly on its end boundary, logs the boundary, then
  // runs the deadline and completion checks.
  RunStatus advance_epoch();

  // Score of the run so far (orders completed to date).
  ScoreReport report() const;

 private:
  enum class Pos { Parked, Transit, AtFactory };

  struct Veh {
    const Vehicle* spec = nullptr;
    Pos pos = Pos::Parked;
    FactoryId factory;             // Parked / AtFactory
    FactoryId transit_from;        // origin of the leg being driven
    std::optional<Stop> dest;      // Transit: target stop, lists mutable
    Sec dest_eta = 0;
    std::vector<Stop> route;       // stops after dest / after current service
    std::vector<ItemId> cargo;     // loading order; back = top of the stack
    std::vector<ItemId> committed_deliveries;  // frozen at arrival
    std::vector<ItemId> committed_pickups;
    bool dock_allocated = false;
    Sec arrive_time = 0;    // last arrival at the current factory
    Sec leave_estimate = 0; // service end, known once a dock is allocated
    Sec idle_since = 0;     // Parked: when the vehicle became free
    double distance_km = 0;
  };

  struct DockWaiter {
    Sec arrive_time = 0;
    VehicleId vehicle;
  };
  struct Dock {
    int in_use = 0;
    std::vector<DockWaiter> waiting;
    Sec wake_at = -1;  // pending shift-opening wake, -1 = none
  };

  enum class HeapKind { Release, Unload, Load, ServiceDone, Arrive, DockWake };
  struct Ev {
    Sec t = 0;
    int pri = 0;
    std::uint64_t seq = 0;
    HeapKind kind = HeapKind::Release;
    VehicleId vehicle;
    ItemId item;
    std::size_t order_idx = 0;
    FactoryId factory;
  };
  struct EvLater {
    bool operator()(const Ev& a, const Ev& b) const {
      return std::tie(a.t, a.pri, a.seq) > std::tie(b.t, b.pri, b.seq);
    }
  };

  struct ItemRt {
    OrderItem item;
    std::size_t order_idx = 0;
    int status = 1;
  };
  struct OrderRt {
    bool released = false;
    int total = 0;
    int delivered = 0;
    Sec completion = 0;
  };

  void schedule(Sec t, HeapKind kind, VehicleId vehicle = {}, ItemId item = {},
                std::size_t order_idx = 0, FactoryId factory = {});
  void handle(const Ev& e);
  void handle_release(std::size_t order_idx, Sec t);
  void handle_arrive(const VehicleId& vid, Sec t);
  void handle_unload(const VehicleId& vid, const ItemId& iid, Sec t);
  void handle_load(const VehicleId& vid, const ItemId& iid, Sec t);
  void handle_service_done(const VehicleId& vid, Sec t);
  // Logs the departure from v.factory toward `next` and schedules the arrival.
  void start_transit(Veh& v, Stop next, Sec t, bool empty_stop);
  // FCFS dock allocation over the factories touched since the last sweep.
  void sweep(Sec t);
  void allocate_dock(Veh& v, Dock& dock, const FactoryId& f, Sec t);
  bool shift_open(Sec t) const;
  Sec next_shift_open(Sec t) const;
  // Items currently named on any pickup list (= dispatched per the deadline
  // rule); everything else with status 1 is still waiting for a dispatch.
  std::set<ItemId> assigned_items() const;
  Stop normalized(const Stop& s) const;
  Sec service_span(const Stop& s) const;  // approach + handling, 0 if empty

  Instance inst_;
  Sec now_ = 0;
  std::int64_t epoch_ = 0;
  RunStatus status_ = RunStatus::Running;
  EventLog log_;
  std::priority_queue<Ev, std::vector<Ev>, EvLater> heap_;
  std::uint64_t seq_ = 0;
  std::map<VehicleId, Veh> vehicles_;
  std::map<FactoryId, Dock> docks_;
  std::set<FactoryId> touched_;
  std::map<ItemId, ItemRt> items_;  // released items, all statuses
  std::vector<OrderRt> orders_;     // parallel to inst_.orders
  std::int64_t orders_completed_ = 0;
  std::size_t orders_released_ = 0;
};

using PolicyFn = std::function<DispatchPlan(const Snapshot&)>;

struct SimRunResult {
  RunStatus status = RunStatus::Running;
  ScoreReport report;
  EventLog log;
  std::vector<Violation> violations;  // nonempty when a dispatch was rejected
  std::int64_t epochs = 0;
};

// Drives the full loop. A rejected dispatch stops the run immediately and is
// reported through `violations` (report.status = "ABORTED_INVALID_DISPATCH").
SimRunResult run_to_completion(const Instance& inst, const PolicyFn& policy);

}  // namespace dpdp
