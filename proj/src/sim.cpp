#include "dpdp/sim.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>
#include <tuple>

#include "dpdp/util.hpp"

namespace dpdp {

namespace {
constexpr Sec kDay = 86400;
}

Simulation::Simulation(Instance inst) : inst_(std::move(inst)) {
  inst_.check();
  orders_.resize(inst_.orders.size());
  std::mt19937_64 rng(inst_.config.rng_seed);
  const auto& factories = inst_.network.factories();
  std::uniform_int_distribution<std::size_t> pick(0, factories.size() - 1);
  for (const auto& spec : inst_.fleet) {
    Veh v;
    v.spec = &spec;
    v.factory = factories[pick(rng)].id;
    vehicles_.emplace(spec.id, std::move(v));
  }
  for (std::size_t i = 0; i < inst_.orders.size(); ++i)
    schedule(inst_.orders[i].creation_time, HeapKind::Release, {}, {}, i);
  // Orders created at the very start must be visible in the first snapshot.
  while (!heap_.empty() && heap_.top().t <= 0 && heap_.top().kind == HeapKind::Release) {
    Ev e = heap_.top();
    heap_.pop();
    handle_release(e.order_idx, 0);
  }
}

void Simulation::schedule(Sec t, HeapKind kind, VehicleId vehicle, ItemId item,
                          std::size_t order_idx, FactoryId factory) {
  int pri = 0;
  switch (kind) {
    case HeapKind::Release: pri = 0; break;
    case HeapKind::Unload: pri = 1; break;
    case HeapKind::Load: pri = 2; break;
    case HeapKind::ServiceDone: pri = 3; break;
    case HeapKind::Arrive: pri = 4; break;
    case HeapKind::DockWake: pri = 5; break;
  }
  heap_.push(Ev{t, pri, seq_++, kind, std::move(vehicle), std::move(item), order_idx,
                std::move(factory)});
}

void Simulation::handle(const Ev& e) {
  switch (e.kind) {
    case HeapKind::Release: handle_release(e.order_idx, e.t); break;
    case HeapKind::Unload: handle_unload(e.vehicle, e.item, e.t); break;
    case HeapKind::Load: handle_load(e.vehicle, e.item, e.t); break;
    case HeapKind::ServiceDone: handle_service_done(e.vehicle, e.t); break;
    case HeapKind::Arrive: handle_arrive(e.vehicle, e.t); break;
    case HeapKind::DockWake:
      docks_[e.factory].wake_at = -1;
      touched_.insert(e.factory);
      break;
  }
}

void Simulation::handle_release(std::size_t order_idx, Sec t) {
  const Order& o = inst_.orders[order_idx];
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::OrderReleased;
  ev.order = o.id;
  log_.push_back(std::move(ev));
  auto exploded = explode_order(o, inst_.config.handling_rate);
  OrderRt& ort = orders_[order_idx];
  ort.released = true;
  ort.total = int(exploded.size());
  ++orders_released_;
  for (auto& it : exploded) {
    ItemRt rt;
    rt.item = std::move(it);
    rt.order_idx = order_idx;
    rt.status = 1;
    items_.emplace(rt.item.id, std::move(rt));
  }
}

void Simulation::handle_arrive(const VehicleId& vid, Sec t) {
  Veh& v = vehicles_.at(vid);
  Stop stop = std::move(*v.dest);
  v.dest.reset();
  RouteLeg leg = inst_.network.leg(v.transit_from, stop.factory_id);
  v.distance_km += leg.distance_km;
  v.pos = Pos::AtFactory;
  v.factory = stop.factory_id;
  v.transit_from.clear();
  v.arrive_time = t;
  v.leave_estimate = 0;
  v.dock_allocated = false;
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::VehicleArrived;
  ev.vehicle = vid;
  ev.factory = v.factory;
  log_.push_back(std::move(ev));
  // The stop's pickup/delivery lists become this visit's commitments.
  v.committed_deliveries = stop.delivery_item_list;
  v.committed_pickups = stop.pickup_item_list;
  if (v.committed_deliveries.empty() && v.committed_pickups.empty()) {
    // Nothing to handle here: pass through without taking a dock.
    if (!v.route.empty()) {
      Stop next = std::move(v.route.front());
      v.route.erase(v.route.begin());
      start_transit(v, std::move(next), t, /*empty_stop=*/true);
    } else {
      v.pos = Pos::Parked;
      v.idle_since = t;
    }
  } else {
    docks_[v.factory].waiting.push_back(DockWaiter{t, vid});
    touched_.insert(v.factory);
  }
}

void Simulation::start_transit(Veh& v, Stop next, Sec t, bool empty_stop) {
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::VehicleDeparted;
  ev.vehicle = v.spec->id;
  ev.factory = v.factory;
  ev.empty_stop = empty_stop;
  log_.push_back(std::move(ev));
  RouteLeg leg = inst_.network.leg(v.factory, next.factory_id);
  v.transit_from = v.factory;
  v.factory.clear();
  v.pos = Pos::Transit;
  v.dest = std::move(next);
  v.dest_eta = t + leg.travel_time;
  schedule(v.dest_eta, HeapKind::Arrive, v.spec->id);
}

void Simulation::sweep(Sec t) {
  for (const auto& f : touched_) {
    Dock& dock = docks_[f];
    const int capacity = inst_.network.factory(f)->dock_count;
    while (dock.in_use < capacity && !dock.waiting.empty()) {
      if (!shift_open(t)) {
        Sec wake = next_shift_open(t);
        if (dock.wake_at != wake) {
          dock.wake_at = wake;
          schedule(wake, HeapKind::DockWake, {}, {}, 0, f);
        }
        break;
      }
      Sec best = dock.waiting.front().arrive_time;
      for (const auto& w : dock.waiting) best = std::min(best, w.arrive_time);
      std::vector<VehicleId> tied;
      for (const auto& w : dock.waiting)
        if (w.arrive_time == best) tied.push_back(w.vehicle);
      VehicleId chosen;
      if (tied.size() == 1) {
        chosen = tied.front();
      } else {
        // Seed-keyed deterministic tie-break among same-time arrivals.
        std::sort(tied.begin(), tied.end());
        std::string key = std::to_string(inst_.config.rng_seed) + "|" + f + "|" +
                          std::to_string(best) + "|";
        for (std::size_t i = 0; i < tied.size(); ++i) {
          if (i) key += ",";
          key += tied[i];
        }
        chosen = tied[fnv1a64(key) % tied.size()];
      }
      for (std::size_t i = 0; i < dock.waiting.size(); ++i) {
        if (dock.waiting[i].vehicle == chosen) {
          dock.waiting.erase(dock.waiting.begin() + std::ptrdiff_t(i));
          break;
        }
      }
      allocate_dock(vehicles_.at(chosen), dock, f, t);
    }
  }
  touched_.clear();
}

void Simulation::allocate_dock(Veh& v, Dock& dock, const FactoryId& f, Sec t) {
  ++dock.in_use;
  v.dock_allocated = true;
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::DockAllocated;
  ev.vehicle = v.spec->id;
  ev.factory = f;
  log_.push_back(std::move(ev));
  Sec cursor = t + inst_.config.dock_approach_time;
  // Unloads run first, in stack-pop order; the committed delivery set is a
  // top segment of the stack by construction (dispatch validation).
  std::set<ItemId> dset(v.committed_deliveries.begin(), v.committed_deliveries.end());
  std::size_t scheduled = 0;
  for (auto it = v.cargo.rbegin(); it != v.cargo.rend() && dset.count(*it); ++it) {
    cursor += items_.at(*it).item.unload_time;
    schedule(cursor, HeapKind::Unload, v.spec->id, *it);
    ++scheduled;
  }
  if (scheduled != dset.size())
    throw std::logic_error("engine: committed deliveries are not the top of the stack");
  for (const auto& iid : v.committed_pickups) {
    cursor += items_.at(iid).item.load_time;
    schedule(cursor, HeapKind::Load, v.spec->id, iid);
  }
  schedule(cursor, HeapKind::ServiceDone, v.spec->id);
  v.leave_estimate = cursor;
}

void Simulation::handle_unload(const VehicleId& vid, const ItemId& iid, Sec t) {
  Veh& v = vehicles_.at(vid);
  if (v.cargo.empty() || v.cargo.back() != iid)
    throw std::logic_error("engine: unload out of stack order");
  v.cargo.pop_back();
  ItemRt& rt = items_.at(iid);
  rt.status = 3;
  rt.item.status = ItemStatus::Delivered;
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::ItemDelivered;
  ev.vehicle = vid;
  ev.factory = v.factory;
  ev.item = iid;
  ev.order = rt.item.order_id;
  log_.push_back(std::move(ev));
  Sec done =
      inst_.config.completion_semantics == CompletionSemantics::Arrival ? v.arrive_time : t;
  OrderRt& ort = orders_[rt.order_idx];
  ort.completion = std::max(ort.completion, done);
  if (++ort.delivered == ort.total) ++orders_completed_;
}

void Simulation::handle_load(const VehicleId& vid, const ItemId& iid, Sec t) {
  Veh& v = vehicles_.at(vid);
  ItemRt& rt = items_.at(iid);
  rt.status = 2;
  rt.item.status = ItemStatus::Loaded;
  v.cargo.push_back(iid);
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::ItemLoaded;
  ev.vehicle = vid;
  ev.factory = v.factory;
  ev.item = iid;
  ev.order = rt.item.order_id;
  log_.push_back(std::move(ev));
}

void Simulation::handle_service_done(const VehicleId& vid, Sec t) {
  Veh& v = vehicles_.at(vid);
  SimEvent ev;
  ev.t = t;
  ev.kind = EventKind::ServiceDone;
  ev.vehicle = vid;
  ev.factory = v.factory;
  log_.push_back(std::move(ev));
  Dock& dock = docks_[v.factory];
  --dock.in_use;
  touched_.insert(v.factory);
  v.dock_allocated = false;
  v.leave_estimate = 0;
  v.committed_deliveries.clear();
  v.committed_pickups.clear();
  if (!v.route.empty()) {
    Stop next = std::move(v.route.front());
    v.route.erase(v.route.begin());
    start_transit(v, std::move(next), t, /*empty_stop=*/false);
  } else {
    v.pos = Pos::Parked;
    v.idle_since = t;
  }
}

bool Simulation::shift_open(Sec t) const {
  const auto& ws = inst_.config.work_shift;
  if (!ws) return true;
  Sec tod = t % kDay;
  return tod >= ws->first && tod < ws->second;
}

Sec Simulation::next_shift_open(Sec t) const {
  const auto& ws = inst_.config.work_shift;
  Sec day = t / kDay;
  Sec tod = t % kDay;
  return tod < ws->first ? day * kDay + ws->first : (day + 1) * kDay + ws->first;
}

RunStatus Simulation::advance_epoch() {
  if (status_ != RunStatus::Running) return status_;
  const Sec boundary = now_ + inst_.config.epoch_length;
  // Window rule: everything strictly before the boundary, plus order releases
  // landing exactly on it, so the next snapshot covers creation <= now.
  auto eligible = [&](const Ev& e) {
    return e.t < boundary || (e.t == boundary && e.kind == HeapKind::Release);
  };
  while (!heap_.empty() && eligible(heap_.top())) {
    const Sec t = heap_.top().t;
    while (!heap_.empty() && heap_.top().t == t && eligible(heap_.top())) {
      Ev e = heap_.top();
      heap_.pop();
      handle(e);
    }
    sweep(t);
  }
  now_ = boundary;
  SimEvent be;
  be.t = boundary;
  be.kind = EventKind::EpochBoundary;
  be.epoch = epoch_;
  log_.push_back(std::move(be));
  // Deadline rule: a released item still waiting for a dispatch for longer
  // than the deadline aborts the run at this boundary.
  std::set<ItemId> assigned = assigned_items();
  for (const auto& [iid, rt] : items_) {
    if (rt.status != 1 || assigned.count(iid)) continue;
    if (boundary - inst_.orders[rt.order_idx].creation_time > inst_.config.dispatch_deadline) {
      status_ = RunStatus::DeadlineAborted;
      break;
    }
  }
  ++epoch_;
  if (status_ == RunStatus::Running) {
    if (orders_released_ == inst_.orders.size() &&
        orders_completed_ == std::int64_t(inst_.orders.size()))
      status_ = RunStatus::Finished;
    else if (epoch_ >= kMaxEpochs)
      status_ = RunStatus::Stalled;
  }
  return status_;
}

std::set<ItemId> Simulation::assigned_items() const {
  std::set<ItemId> out;
  for (const auto& [vid, v] : vehicles_) {
    out.insert(v.committed_pickups.begin(), v.committed_pickups.end());
    if (v.dest)
      out.insert(v.dest->pickup_item_list.begin(), v.dest->pickup_item_list.end());
    for (const auto& s : v.route)
      out.insert(s.pickup_item_list.begin(), s.pickup_item_list.end());
  }
  return out;
}

Stop Simulation::normalized(const Stop& s) const {
  Stop out = s;
  const Factory* f = inst_.network.factory(s.factory_id);
  out.lng = f->longitude;
  out.lat = f->latitude;
  out.arrive_time = 0;
  out.leave_time = 0;
  return out;
}

Sec Simulation::service_span(const Stop& s) const {
  if (s.empty_service()) return 0;
  Sec span = inst_.config.dock_approach_time;
  for (const auto& iid : s.delivery_item_list) {
    auto it = items_.find(iid);
    if (it != items_.end()) span += it->second.item.unload_time;
  }
  for (const auto& iid : s.pickup_item_list) {
    auto it = items_.find(iid);
    if (it != items_.end()) span += it->second.item.load_time;
  }
  return span;
}

PolicyView Simulation::policy_view() const {
  PolicyView pv;
  pv.now = now_;
  for (const auto& spec : inst_.fleet) {
    const Veh& v = vehicles_.at(spec.id);
    VehicleView vv;
    vv.id = spec.id;
    vv.operation_hours = spec.operation_hours;
    vv.capacity = spec.capacity;
    vv.update_time = now_;
    vv.carrying_items = v.cargo;
    switch (v.pos) {
      case Pos::Parked:
        vv.cur_factory_id = v.factory;
        vv.arrive_time_at_current_factory = v.arrive_time;
        vv.leave_time_at_current_factory = v.idle_since;
        break;
      case Pos::Transit: {
        Stop d = normalized(*v.dest);
        d.arrive_time = v.dest_eta;
        d.leave_time = v.dest_eta + service_span(d);
        vv.destination = std::move(d);
        break;
      }
      case Pos::AtFactory: {
        vv.cur_factory_id = v.factory;
        vv.arrive_time_at_current_factory = v.arrive_time;
        vv.leave_time_at_current_factory = v.leave_estimate;
        Stop d;
        d.factory_id = v.factory;
        const Factory* f = inst_.network.factory(v.factory);
        d.lng = f->longitude;
        d.lat = f->latitude;
        d.delivery_item_list = v.committed_deliveries;
        d.pickup_item_list = v.committed_pickups;
        d.arrive_time = v.arrive_time;
        d.leave_time = v.leave_estimate;
        vv.destination = std::move(d);
        break;
      }
    }
    pv.vehicles.push_back(std::move(vv));
  }
  std::set<ItemId> assigned = assigned_items();
  std::vector<ItemView> all;
  for (const auto& [iid, rt] : items_) {
    if (rt.status == 3) continue;
    const Order& o = inst_.orders[rt.order_idx];
    ItemView iv;
    iv.id = iid;
    iv.type = rt.item.pallet_type;
    iv.order_id = o.id;
    iv.demand = o.quantity.demand();
    iv.pickup_factory_id = o.pickup_factory;
    iv.delivery_factory_id = o.delivery_factory;
    iv.creation_time = o.creation_time;
    iv.committed_completion_time = o.committed_completion_time;
    iv.load_time = rt.item.load_time;
    iv.unload_time = rt.item.unload_time;
    iv.delivery_state = rt.status;
    all.push_back(std::move(iv));
  }
  std::stable_sort(all.begin(), all.end(), [](const ItemView& a, const ItemView& b) {
    return std::tie(a.creation_time, a.order_id, a.id) <
           std::tie(b.creation_time, b.order_id, b.id);
  });
  for (auto& iv : all) {
    bool ongoing = iv.delivery_state == 2 || assigned.count(iv.id);
    (ongoing ? pv.ongoing_items : pv.unallocated_items).push_back(std::move(iv));
  }
  return pv;
}

Snapshot Simulation::snapshot() const {
  Snapshot s;
  s.now = now_;
  s.epoch_index = epoch_;
  s.view = policy_view();
  s.orders_completed = orders_completed_;
  s.orders_total = std::int64_t(inst_.orders.size());
  return s;
}

std::vector<Violation> Simulation::apply_dispatch(const DispatchPlan& plan) {
  PolicyView view = policy_view();
  std::set<FactoryId> fset;
  for (const auto& f : inst_.network.factories()) fset.insert(f.id);
  ValidationContext ctx = make_validation_context(view, fset);
  auto violations = validate_dispatch(ctx, plan);
  if (!violations.empty()) return violations;
  for (const auto& spec : inst_.fleet) {
    const VehicleCommand* cmd = plan.command(spec.id);
    if (!cmd) continue;  // no command: keep the current plan
    Veh& v = vehicles_.at(spec.id);
    switch (v.pos) {
      case Pos::Parked:
        if (!cmd->destination) break;  // stay parked
        v.route.clear();
        for (const auto& s : cmd->route) v.route.push_back(normalized(s));
        start_transit(v, normalized(*cmd->destination), now_, /*empty_stop=*/false);
        break;
      case Pos::Transit:
        // Destination factory is locked (validated); its lists may change.
        v.dest->delivery_item_list = cmd->destination->delivery_item_list;
        v.dest->pickup_item_list = cmd->destination->pickup_item_list;
        v.route.clear();
        for (const auto& s : cmd->route) v.route.push_back(normalized(s));
        break;
      case Pos::AtFactory:
        // The echoed stop is frozen; only the follow-up route may change.
        v.route.clear();
        for (const auto& s : cmd->route) v.route.push_back(normalized(s));
        break;
    }
  }
  return {};
}

ScoreReport Simulation::report() const {
  std::map<OrderId, Sec> completion;
  for (std::size_t i = 0; i < inst_.orders.size(); ++i) {
    const OrderRt& ort = orders_[i];
    if (ort.released && ort.total > 0 && ort.delivered == ort.total)
      completion[inst_.orders[i].id] = ort.completion;
  }
  std::map<VehicleId, double> distance;
  for (const auto& [vid, v] : vehicles_) distance[vid] = v.distance_km;
  return make_score_report(std::string(run_status_name(status_)), completion, distance, inst_);
}

SimRunResult run_to_completion(const Instance& inst, const PolicyFn& policy) {
  Simulation sim(inst);
  SimRunResult rr;
  while (sim.status() == RunStatus::Running) {
    Snapshot snap = sim.snapshot();
    DispatchPlan plan = policy(snap);
    auto violations = sim.apply_dispatch(plan);
    if (!violations.empty()) {
      rr.violations = std::move(violations);
      break;
    }
    sim.advance_epoch();
  }
  rr.status = sim.status();
  rr.log = sim.log();
  rr.report = sim.report();
  rr.epochs = sim.epoch_index();
  if (!rr.violations.empty()) rr.report.status = "ABORTED_INVALID_DISPATCH";
  return rr;
}

}  // namespace dpdp
