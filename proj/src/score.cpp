#include "dpdp/score.hpp"

#include <algorithm>
#include <stdexcept>

#include "json.hpp"

namespace dpdp {

using json = nlohmann::ordered_json;

std::string_view run_status_name(RunStatus s) {
  switch (s) {
    case RunStatus::Running: return "RUNNING";
    case RunStatus::Finished: return "FINISHED";
    case RunStatus::DeadlineAborted: return "ABORTED_DISPATCH_DEADLINE";
    case RunStatus::Stalled: return "ABORTED_STALLED";
  }
  throw std::invalid_argument("unknown run status");
}

ScoreReport make_score_report(const std::string& status,
                              const std::map<OrderId, Sec>& completion,
                              const std::map<VehicleId, double>& distance,
                              const Instance& inst) {
  ScoreReport r;
  r.status = status;
  r.lambda = inst.config.lambda;
  r.orders_total = std::int64_t(inst.orders.size());
  for (const auto& o : inst.orders) {
    auto it = completion.find(o.id);
    if (it == completion.end()) continue;
    Sec timeout = std::max<Sec>(0, it->second - o.committed_completion_time);
    r.f1 += timeout;
    r.per_order_timeout[o.id] = timeout;
    ++r.orders_completed;
  }
  double total_km = 0;
  for (const auto& v : inst.fleet) {
    auto it = distance.find(v.id);
    double km = it == distance.end() ? 0.0 : it->second;
    r.per_vehicle_distance[v.id] = km;
    total_km += km;
  }
  r.f2 = total_km / double(inst.fleet.size());
  r.f = r.lambda * double(r.f1) + r.f2;
  return r;
}

namespace {

// Shared log walker: reconstructs item lifecycles, vehicle stacks, dock
// occupancy and timings from the event stream, recording any inconsistency.
struct Replayer {
  const Instance& inst;
  std::vector<std::string> problems;

  struct ItemState {
    OrderId order;
    Quarters quarters = 0;
    Sec handling = 0;
    FactoryId pickup, delivery;
    int status = 1;
  };
  struct VehicleState {
    Quarters capacity = 0;
    std::vector<ItemId> stack;
    Quarters load = 0;
    FactoryId at_factory;   // empty while in transit / before first arrival
    Sec arrive_time = 0;
    bool has_arrived = false;
    FactoryId depart_from;  // pending transit origin
    Sec depart_time = 0;
    bool in_transit = false;
    bool docked = false;
    Sec service_cursor = 0;  // next expected handling completion
    double distance_km = 0;
  };

  std::map<ItemId, ItemState> items;
  std::map<VehicleId, VehicleState> vehicles;
  std::map<FactoryId, int> docks_in_use;
  std::map<OrderId, bool> released;
  std::map<OrderId, int> live_items;  // undelivered item count per released order
  std::map<OrderId, Sec> completion;
  std::int64_t next_epoch = 0;
  Sec last_t = 0;
  bool first_event = true;

  explicit Replayer(const Instance& inst_) : inst(inst_) {
    for (const auto& v : inst.fleet) vehicles[v.id].capacity = v.capacity;
  }

  void fail(const SimEvent& e, const std::string& what) {
    problems.push_back("t=" + std::to_string(e.t) + " " +
                       std::string(event_kind_name(e.kind)) + ": " + what);
  }

  VehicleState* vehicle(const SimEvent& e) {
    auto it = vehicles.find(e.vehicle);
    if (it == vehicles.end()) {
      fail(e, "unknown vehicle " + e.vehicle);
      return nullptr;
    }
    return &it->second;
  }

  void step(const SimEvent& e) {
    if (!first_event && e.t < last_t) fail(e, "time went backwards");
    first_event = false;
    last_t = e.t;
    switch (e.kind) {
      case EventKind::OrderReleased: on_release(e); break;
      case EventKind::VehicleArrived: on_arrive(e); break;
      case EventKind::DockAllocated: on_dock(e); break;
      case EventKind::ServiceDone: on_service_done(e); break;
      case EventKind::VehicleDeparted: on_depart(e); break;
      case EventKind::ItemLoaded: on_load(e); break;
      case EventKind::ItemDelivered: on_deliver(e); break;
      case EventKind::EpochBoundary: on_boundary(e); break;
    }
  }

  void on_release(const SimEvent& e) {
    const Order* o = inst.order(e.order);
    if (!o) {
      fail(e, "unknown order " + e.order);
      return;
    }
    if (released.count(o->id)) {
      fail(e, "order " + o->id + " released twice");
      return;
    }
    if (e.t != o->creation_time) fail(e, "order " + o->id + " released at the wrong time");
    released[o->id] = true;
    auto exploded = explode_order(*o, inst.config.handling_rate);
    live_items[o->id] = int(exploded.size());
    for (const auto& it : exploded) {
      ItemState s;
      s.order = o->id;
      s.quarters = it.demand_quarters();
      s.handling = it.load_time;
      s.pickup = o->pickup_factory;
      s.delivery = o->delivery_factory;
      items[it.id] = std::move(s);
    }
  }

  void on_arrive(const SimEvent& e) {
    VehicleState* v = vehicle(e);
    if (!v) return;
    if (!inst.network.has_factory(e.factory)) {
      fail(e, "unknown factory " + e.factory);
      return;
    }
    if (v->in_transit) {
      RouteLeg leg = inst.network.leg(v->depart_from, e.factory);
      if (e.t - v->depart_time != leg.travel_time)
        fail(e, "vehicle " + e.vehicle + " transit duration " +
                    std::to_string(e.t - v->depart_time) + " != route time " +
                    std::to_string(leg.travel_time));
      v->distance_km += leg.distance_km;
    } else if (v->has_arrived) {
      fail(e, "vehicle " + e.vehicle + " arrived without departing first");
    }
    v->in_transit = false;
    v->at_factory = e.factory;
    v->arrive_time = e.t;
    v->has_arrived = true;
  }

  void on_dock(const SimEvent& e) {
    VehicleState* v = vehicle(e);
    if (!v) return;
    if (v->at_factory != e.factory) fail(e, "vehicle " + e.vehicle + " docked while elsewhere");
    if (v->docked) fail(e, "vehicle " + e.vehicle + " double dock allocation");
    const Factory* f = inst.network.factory(e.factory);
    int in_use = ++docks_in_use[e.factory];
    if (f && in_use > f->dock_count)
      fail(e, "factory " + e.factory + " exceeds its " + std::to_string(f->dock_count) + " docks");
    v->docked = true;
    v->service_cursor = e.t + inst.config.dock_approach_time;
  }

  void on_service_done(const SimEvent& e) {
    VehicleState* v = vehicle(e);
    if (!v) return;
    if (!v->docked) {
      fail(e, "vehicle " + e.vehicle + " finished service without a dock");
      return;
    }
    if (e.t != v->service_cursor)
      fail(e, "vehicle " + e.vehicle + " service ended at " + std::to_string(e.t) +
                  ", expected " + std::to_string(v->service_cursor));
    v->docked = false;
    --docks_in_use[e.factory];
    if (docks_in_use[e.factory] < 0) fail(e, "factory " + e.factory + " freed a dock it never held");
  }

  void on_depart(const SimEvent& e) {
    VehicleState* v = vehicle(e);
    if (!v) return;
    if (v->in_transit) fail(e, "vehicle " + e.vehicle + " departed while already in transit");
    if (v->docked) fail(e, "vehicle " + e.vehicle + " departed while holding a dock");
    if (v->has_arrived && v->at_factory != e.factory)
      fail(e, "vehicle " + e.vehicle + " departed from the wrong factory");
    v->depart_from = e.factory;
    v->depart_time = e.t;
    v->in_transit = true;
    v->at_factory.clear();
  }

  void on_load(const SimEvent& e) {
    VehicleState* v = vehicle(e);
    if (!v) return;
    auto it = items.find(e.item);
    if (it == items.end()) {
      fail(e, "item " + e.item + " loaded before its order release");
      return;
    }
    ItemState& s = it->second;
    if (s.status != 1) {
      fail(e, "item " + e.item + " loaded in status " + std::to_string(s.status));
      return;
    }
    if (s.pickup != e.factory) fail(e, "item " + e.item + " loaded away from its pickup factory");
    if (!v->docked) fail(e, "item " + e.item + " loaded without a dock");
    if (v->docked) {
      v->service_cursor += s.handling;
      if (e.t != v->service_cursor)
        fail(e, "item " + e.item + " load completed at " + std::to_string(e.t) + ", expected " +
                    std::to_string(v->service_cursor));
    }
    s.status = 2;
    v->stack.push_back(e.item);
    v->load += s.quarters;
    if (v->load > v->capacity)
      fail(e, "vehicle " + e.vehicle + " over capacity after loading " + e.item);
  }

  void on_deliver(const SimEvent& e) {
    VehicleState* v = vehicle(e);
    if (!v) return;
    auto it = items.find(e.item);
    if (it == items.end()) {
      fail(e, "item " + e.item + " delivered before its order release");
      return;
    }
    ItemState& s = it->second;
    if (s.status != 2) {
      fail(e, "item " + e.item + " delivered in status " + std::to_string(s.status));
      return;
    }
    if (s.delivery != e.factory)
      fail(e, "item " + e.item + " delivered away from its delivery factory");
    if (v->stack.empty() || v->stack.back() != e.item)
      fail(e, "item " + e.item + " is not on top of the stack of vehicle " + e.vehicle);
    if (!v->stack.empty() && v->stack.back() == e.item) {
      v->stack.pop_back();
      v->load -= s.quarters;
    }
    if (!v->docked) {
      fail(e, "item " + e.item + " delivered without a dock");
    } else {
      v->service_cursor += s.handling;
      if (e.t != v->service_cursor)
        fail(e, "item " + e.item + " unload completed at " + std::to_string(e.t) + ", expected " +
                    std::to_string(v->service_cursor));
    }
    s.status = 3;
    Sec done = inst.config.completion_semantics == CompletionSemantics::Arrival ? v->arrive_time : e.t;
    auto live = live_items.find(s.order);
    if (live != live_items.end()) {
      auto [cit, inserted] = completion.emplace(s.order, done);
      if (!inserted) cit->second = std::max(cit->second, done);
      if (--live->second < 0) fail(e, "order " + s.order + " delivered more items than it has");
    }
  }

  void on_boundary(const SimEvent& e) {
    if (e.epoch != next_epoch)
      fail(e, "epoch " + std::to_string(e.epoch) + " out of sequence, expected " +
                  std::to_string(next_epoch));
    if (e.t != (e.epoch + 1) * inst.config.epoch_length)
      fail(e, "epoch boundary at the wrong time");
    ++next_epoch;
  }

  bool all_delivered() const {
    if (released.size() != inst.orders.size()) return false;
    for (const auto& [oid, n] : live_items)
      if (n != 0) return false;
    return true;
  }
};

}  // namespace

ScoreReport replay_score(const EventLog& log, const Instance& inst) {
  Replayer r(inst);
  for (const auto& e : log) r.step(e);
  std::map<OrderId, Sec> done;
  for (const auto& [oid, n] : r.live_items)
    if (n == 0) done[oid] = r.completion.at(oid);
  std::map<VehicleId, double> dist;
  for (const auto& [vid, v] : r.vehicles) dist[vid] = v.distance_km;
  return make_score_report(r.all_delivered() ? "FINISHED" : "INCOMPLETE", done, dist, inst);
}

std::vector<std::string> verify_event_log(const EventLog& log, const Instance& inst) {
  Replayer r(inst);
  for (const auto& e : log) r.step(e);
  return r.problems;
}

std::string report_to_json(const ScoreReport& r) {
  json j;
  j["status"] = r.status;
  j["f1"] = r.f1;
  j["f2"] = r.f2;
  j["lambda"] = r.lambda;
  j["f"] = r.f;
  j["orders_completed"] = r.orders_completed;
  j["orders_total"] = r.orders_total;
  json timeouts = json::object();
  for (const auto& [oid, t] : r.per_order_timeout) timeouts[oid] = t;
  j["per_order_timeout"] = std::move(timeouts);
  json dist = json::object();
  for (const auto& [vid, km] : r.per_vehicle_distance) dist[vid] = km;
  j["per_vehicle_distance"] = std::move(dist);
  return j.dump(2) + "\n";
}

ScoreReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("score report: ") + e.what());
  }
  ScoreReport r;
  try {
    r.status = j.at("status").get<std::string>();
    r.f1 = j.at("f1").get<Sec>();
    r.f2 = j.at("f2").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.f = j.at("f").get<double>();
    r.orders_completed = j.at("orders_completed").get<std::int64_t>();
    r.orders_total = j.at("orders_total").get<std::int64_t>();
    for (auto it = j.at("per_order_timeout").begin(); it != j.at("per_order_timeout").end(); ++it)
      r.per_order_timeout[it.key()] = it.value().get<Sec>();
    for (auto it = j.at("per_vehicle_distance").begin(); it != j.at("per_vehicle_distance").end(); ++it)
      r.per_vehicle_distance[it.key()] = it.value().get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("score report: ") + e.what());
  }
  return r;
}

bool reports_equal_ignoring_status(const ScoreReport& a, const ScoreReport& b) {
  ScoreReport x = a, y = b;
  x.status = y.status = "";
  return x == y;
}

}  // namespace dpdp
