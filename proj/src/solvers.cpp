#include "dpdp/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>
#include <tuple>

namespace dpdp {

namespace {

// A stop is behind the vehicle when nothing on its lists remains to do.
bool stop_done(const Stop& s, const PolicyView& view) {
  for (const auto& id : s.pickup_item_list) {
    const ItemView* it = view.item(id);
    if (it && it->delivery_state == 1) return false;
  }
  for (const auto& id : s.delivery_item_list)
    if (view.item(id)) return false;
  return true;
}

Stop make_stop(const RoadNetwork& net, const FactoryId& f) {
  Stop s;
  s.factory_id = f;
  if (const Factory* spec = net.factory(f)) {
    s.lng = spec->longitude;
    s.lat = spec->latitude;
  }
  return s;
}

// One dispatchable unit: a whole order, or one capacity-sized chunk of an
// oversized order.
struct Shipment {
  OrderId order;
  int chunk = 0;
  Sec committed = 0;
  FactoryId pickup;
  FactoryId delivery;
  std::vector<ItemId> items;
  Quarters quarters = 0;
};

struct Group {
  OrderId order;
  Sec committed = 0;
  Sec creation = 0;
  FactoryId pickup;
  FactoryId delivery;
  std::vector<std::pair<ItemId, Quarters>> items;
  Quarters total = 0;
};

std::vector<Group> collect_groups(const PolicyView& view) {
  std::vector<Group> out;
  std::map<OrderId, std::size_t> index;
  for (const auto& iv : view.unallocated_items) {
    auto [it, inserted] = index.emplace(iv.order_id, out.size());
    if (inserted) {
      Group g;
      g.order = iv.order_id;
      g.committed = iv.committed_completion_time;
      g.creation = iv.creation_time;
      g.pickup = iv.pickup_factory_id;
      g.delivery = iv.delivery_factory_id;
      out.push_back(std::move(g));
    }
    Group& g = out[it->second];
    g.items.emplace_back(iv.id, iv.demand_quarters());
    g.total += iv.demand_quarters();
  }
  return out;
}

// First-fit decreasing into bins of at most max_quarters; a fitting order
// stays whole (splitting is only legal when the order exceeds capacity).
std::vector<Shipment> chunk_group(const Group& g, Quarters max_quarters) {
  struct Bin {
    std::vector<ItemId> items;
    Quarters q = 0;
  };
  std::vector<Bin> bins;
  auto items = g.items;
  std::stable_sort(items.begin(), items.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (g.total <= max_quarters) {
    Bin b;
    for (const auto& [id, q] : items) {
      b.items.push_back(id);
      b.q += q;
    }
    bins.push_back(std::move(b));
  } else {
    for (const auto& [id, q] : items) {
      bool placed = false;
      for (auto& b : bins) {
        if (b.q + q <= max_quarters) {
          b.items.push_back(id);
          b.q += q;
          placed = true;
          break;
        }
      }
      if (!placed) bins.push_back(Bin{{id}, q});
    }
  }
  std::vector<Shipment> out;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    Shipment s;
    s.order = g.order;
    s.chunk = int(i);
    s.committed = g.committed;
    s.pickup = g.pickup;
    s.delivery = g.delivery;
    s.items = std::move(bins[i].items);
    s.quarters = bins[i].q;
    out.push_back(std::move(s));
  }
  return out;
}

// Per-vehicle assignment state while a plan is being built.
struct Working {
  const VehicleView* vv = nullptr;
  Quarters capacity = 0;
  bool present = false;        // emit a command for this vehicle
  bool committed_stop = false; // cmd.destination echoes a frozen stop
  VehicleCommand cmd;
};

Working make_working(const VehicleView& vv, const VehicleCommand* cmd) {
  Working w;
  w.vv = &vv;
  w.capacity = vv.capacity;
  w.committed_stop = vv.destination && vv.cur_factory_id == vv.destination->factory_id;
  if (cmd) {
    w.cmd = *cmd;
    w.present = true;
  }
  return w;
}

std::map<VehicleId, Working> init_workings(const PolicyView& view, const DispatchPlan& base) {
  std::map<VehicleId, Working> ws;
  for (const auto& vv : view.vehicles) ws.emplace(vv.id, make_working(vv, base.command(vv.id)));
  return ws;
}

FactoryId working_tail(const Working& w) {
  if (!w.cmd.route.empty()) return w.cmd.route.back().factory_id;
  if (w.cmd.destination) return w.cmd.destination->factory_id;
  return w.vv->cur_factory_id;
}

bool tail_is_frozen(const Working& w) {
  return w.cmd.route.empty() && w.cmd.destination.has_value() && w.committed_stop;
}

// Travel time the append would add; infeasible only when the pickup factory
// is the frozen in-service stop itself (can't merge, can't revisit back to
// back).
bool append_cost(const RoadNetwork& net, const Working& w, const Shipment& sh, Sec* cost) {
  FactoryId tail = working_tail(w);
  if (tail == sh.pickup && tail_is_frozen(w)) return false;
  Sec c = net.leg(sh.pickup, sh.delivery).travel_time;
  if (tail != sh.pickup) c += net.leg(tail, sh.pickup).travel_time;
  *cost = c;
  return true;
}

void append_shipment(Working& w, const Shipment& sh, const RoadNetwork& net) {
  w.present = true;
  if (!w.cmd.route.empty() && w.cmd.route.back().factory_id == sh.pickup) {
    auto& pl = w.cmd.route.back().pickup_item_list;
    pl.insert(pl.end(), sh.items.begin(), sh.items.end());
  } else if (w.cmd.route.empty() && w.cmd.destination &&
             w.cmd.destination->factory_id == sh.pickup && !w.committed_stop) {
    auto& pl = w.cmd.destination->pickup_item_list;
    pl.insert(pl.end(), sh.items.begin(), sh.items.end());
  } else {
    Stop p = make_stop(net, sh.pickup);
    p.pickup_item_list = sh.items;
    if (!w.cmd.destination && w.cmd.route.empty())
      w.cmd.destination = std::move(p);
    else
      w.cmd.route.push_back(std::move(p));
  }
  Stop d = make_stop(net, sh.delivery);
  d.delivery_item_list = sh.items;
  w.cmd.route.push_back(std::move(d));
}

// Cheapest-append assignment, lowest vehicle id on ties. A shipment with no
// feasible vehicle (frozen-tail corner) is deferred to a later epoch.
void assign_shipments(std::map<VehicleId, Working>& ws, const PolicyView& view,
                      const RoadNetwork& net, const std::vector<Shipment>& shipments) {
  for (const auto& sh : shipments) {
    const VehicleId* best = nullptr;
    Sec best_cost = 0;
    for (const auto& vv : view.vehicles) {
      Working& w = ws.at(vv.id);
      if (w.capacity < sh.quarters) continue;
      Sec c = 0;
      if (!append_cost(net, w, sh, &c)) continue;
      if (!best || c < best_cost) {
        best = &vv.id;
        best_cost = c;
      }
    }
    if (best) append_shipment(ws.at(*best), sh, net);
  }
}

std::vector<Shipment> shipments_of_groups(const std::vector<const Group*>& groups,
                                          Quarters max_quarters) {
  std::vector<Shipment> ships;
  for (const Group* g : groups) {
    auto cs = chunk_group(*g, max_quarters);
    ships.insert(ships.end(), cs.begin(), cs.end());
  }
  std::stable_sort(ships.begin(), ships.end(), [](const Shipment& a, const Shipment& b) {
    return std::tie(a.committed, a.order, a.chunk) < std::tie(b.committed, b.order, b.chunk);
  });
  return ships;
}

Quarters max_capacity(const PolicyView& view) {
  Quarters q = 0;
  for (const auto& vv : view.vehicles) q = std::max(q, vv.capacity);
  return q;
}

DispatchPlan plan_from_workings(const PolicyView& view, std::map<VehicleId, Working>& ws) {
  DispatchPlan plan;
  for (const auto& vv : view.vehicles) {
    Working& w = ws.at(vv.id);
    if (w.present) plan.commands[vv.id] = std::move(w.cmd);
  }
  return plan;
}

// Shared greedy core: carry the book forward and assign every open order.
DispatchPlan greedy_plan(const PolicyView& view, const RoadNetwork& net, DispatchPlan& book) {
  DispatchPlan base = reconcile_book(book, view);
  auto ws = init_workings(view, base);
  auto groups = collect_groups(view);
  std::vector<const Group*> refs;
  for (const auto& g : groups) refs.push_back(&g);
  assign_shipments(ws, view, net, shipments_of_groups(refs, max_capacity(view)));
  DispatchPlan plan = plan_from_workings(view, ws);
  book = plan;
  return plan;
}

}  // namespace

DispatchPlan reconcile_book(const DispatchPlan& book, const PolicyView& view) {
  DispatchPlan base;
  for (const auto& vv : view.vehicles) {
    if (!vv.destination) continue;  // parked: no standing obligations
    VehicleCommand cmd;
    cmd.destination = vv.destination;  // verbatim echo
    if (const VehicleCommand* prev = book.command(vv.id)) {
      std::vector<Stop> path;
      if (prev->destination) path.push_back(*prev->destination);
      path.insert(path.end(), prev->route.begin(), prev->route.end());
      std::size_t i = 0;
      while (i < path.size() && stop_done(path[i], view)) ++i;
      std::size_t start;
      if (i < path.size() && path[i].factory_id == vv.destination->factory_id) {
        start = i + 1;
      } else {
        // The vehicle is heading to a pass-through stop earlier in the path.
        start = i;
        for (std::size_t j = 0; j <= i && j < path.size(); ++j) {
          if (path[j].empty_service() && path[j].factory_id == vv.destination->factory_id) {
            start = j + 1;
            break;
          }
        }
      }
      for (std::size_t k = start; k < path.size(); ++k) cmd.route.push_back(path[k]);
    }
    base.commands[vv.id] = std::move(cmd);
  }
  return base;
}

PlanEstimate estimate_plan_cost(const PolicyView& view, const DispatchPlan& plan,
                                const RoadNetwork& net, const SimConfig& cfg,
                                const EstimateParams& params) {
  const double lambda = params.lambda < 0 ? cfg.lambda : params.lambda;
  std::map<ItemId, const ItemView*> items;
  for (const auto& iv : view.unallocated_items) items[iv.id] = &iv;
  for (const auto& iv : view.ongoing_items) items[iv.id] = &iv;

  std::map<OrderId, Sec> completion, committed;
  double km = 0;
  bool impossible = false;
  struct ServiceIv {
    FactoryId f;
    Sec a, b;
  };
  std::vector<ServiceIv> services;

  auto note = [&](const ItemView* iv, Sec t) {
    if (!iv) return;
    committed[iv->order_id] = iv->committed_completion_time;
    auto [it, inserted] = completion.emplace(iv->order_id, t);
    if (!inserted) it->second = std::max(it->second, t);
  };

  for (const auto& vv : view.vehicles) {
    const VehicleCommand* cmd = plan.command(vv.id);
    std::vector<ItemId> stack = vv.carrying_items;
    Sec t = view.now;
    FactoryId at = vv.cur_factory_id;
    bool pending_arrival = false;
    Sec fixed_arrival = 0;
    std::vector<const Stop*> walk;

    const bool at_committed_stop =
        vv.destination && vv.cur_factory_id == vv.destination->factory_id;
    if (at_committed_stop) {
      // Frozen stop in progress: identical in every candidate, so a coarse
      // service-end completion is enough — the term cancels in comparisons.
      const Stop& d = *vv.destination;
      std::set<ItemId> carried(stack.begin(), stack.end());
      Sec leave = d.leave_time;
      if (leave == 0) {
        // Still queued for a dock: assume it is granted right away.
        leave = vv.arrive_time_at_current_factory + cfg.dock_approach_time;
        for (const auto& id : d.delivery_item_list)
          if (carried.count(id))
            if (auto it = items.find(id); it != items.end()) leave += it->second->unload_time;
        for (const auto& id : d.pickup_item_list)
          if (!carried.count(id))
            if (auto it = items.find(id); it != items.end()) leave += it->second->load_time;
      }
      std::set<ItemId> del;
      for (const auto& id : d.delivery_item_list)
        if (carried.count(id)) del.insert(id);
      for (const auto& id : del) {
        auto it = items.find(id);
        note(it == items.end() ? nullptr : it->second,
             cfg.completion_semantics == CompletionSemantics::Arrival
                 ? vv.arrive_time_at_current_factory
                 : leave);
      }
      std::vector<ItemId> next;
      for (const auto& id : stack)
        if (!del.count(id)) next.push_back(id);
      for (const auto& id : d.pickup_item_list)
        if (!carried.count(id)) next.push_back(id);
      stack = std::move(next);
      t = leave;
      if (cmd)
        for (const auto& s : cmd->route) walk.push_back(&s);
    } else if (vv.destination) {
      // In transit: arrival time is already determined; the leg being driven
      // is sunk and not charged to the plan.
      if (cmd && cmd->destination) {
        walk.push_back(&*cmd->destination);
        for (const auto& s : cmd->route) walk.push_back(&s);
      } else {
        walk.push_back(&*vv.destination);
      }
      pending_arrival = true;
      fixed_arrival = vv.destination->arrive_time;
      at = vv.destination->factory_id;
    } else {
      if (cmd) {
        if (cmd->destination) walk.push_back(&*cmd->destination);
        for (const auto& s : cmd->route) walk.push_back(&s);
      }
    }

    for (const Stop* sp : walk) {
      const Stop& s = *sp;
      Sec arrive;
      if (pending_arrival) {
        arrive = fixed_arrival;
        pending_arrival = false;
      } else {
        RouteLeg leg = net.leg(at, s.factory_id);
        km += leg.distance_km;
        arrive = t + leg.travel_time;
        at = s.factory_id;
      }
      if (s.empty_service()) {
        t = arrive;
        continue;
      }
      const Sec alloc = arrive;  // zero-queue assumption
      Sec cursor = alloc + cfg.dock_approach_time;
      std::set<ItemId> want(s.delivery_item_list.begin(), s.delivery_item_list.end());
      while (!stack.empty() && want.count(stack.back())) {
        const ItemId id = stack.back();
        stack.pop_back();
        want.erase(id);
        auto it = items.find(id);
        const ItemView* iv = it == items.end() ? nullptr : it->second;
        cursor += iv ? iv->unload_time : 0;
        note(iv, cfg.completion_semantics == CompletionSemantics::Arrival ? arrive : cursor);
      }
      if (!want.empty()) {
        impossible = true;  // deliveries are not the top of the stack
        break;
      }
      for (const auto& id : s.pickup_item_list) {
        auto it = items.find(id);
        cursor += it == items.end() ? 0 : it->second->load_time;
        stack.push_back(id);
      }
      services.push_back(ServiceIv{s.factory_id, alloc, cursor});
      t = cursor;
    }
    if (impossible) break;
  }

  PlanEstimate pe;
  if (impossible) {
    pe.cost = std::numeric_limits<double>::infinity();
    return pe;
  }
  for (const auto& [oid, c] : completion) pe.f1 += double(std::max<Sec>(0, c - committed[oid]));
  pe.f2 = view.vehicles.empty() ? 0.0 : km / double(view.vehicles.size());
  if (params.mu > 0) {
    std::map<FactoryId, std::vector<std::pair<Sec, int>>> deltas;
    for (const auto& sv : services) {
      deltas[sv.f].emplace_back(sv.a, 1);
      deltas[sv.f].emplace_back(sv.b, -1);
    }
    for (auto& [f, v] : deltas) {
      const Factory* spec = net.factory(f);
      const int docks = spec ? spec->dock_count : 1;
      std::sort(v.begin(), v.end());
      int depth = 0;
      Sec prev = 0;
      for (const auto& [tt, d] : v) {
        if (depth > docks) pe.dock_overflow += double(depth - docks) * double(tt - prev);
        prev = tt;
        depth += d;
      }
    }
  }
  pe.cost = lambda * pe.f1 + pe.f2 + params.mu * pe.dock_overflow;
  return pe;
}

DispatchPlan GreedyPolicy::decide(const Snapshot& snap) {
  return greedy_plan(snap.view, inst_->network, book_);
}

DispatchPlan ThresholdPolicy::decide(const Snapshot& snap) {
  const PolicyView& view = snap.view;
  const SimConfig& cfg = inst_->config;
  const RoadNetwork& net = inst_->network;
  DispatchPlan base = reconcile_book(book_, view);
  auto ws = init_workings(view, base);
  const Quarters max_q = max_capacity(view);
  auto groups = collect_groups(view);

  std::map<FactoryId, Quarters> held;
  for (const auto& g : groups) held[g.pickup] += g.total;
  const double q_pallets = quarters_to_pallets(max_q);

  std::set<FactoryId> fill_factories;
  for (const auto& g : groups)
    if (quarters_to_pallets(held[g.pickup]) >= params_.fill_threshold * q_pallets - 1e-9)
      fill_factories.insert(g.pickup);

  std::vector<const Group*> singles;
  std::map<FactoryId, std::vector<const Group*>> batches;
  for (const auto& g : groups) {
    if (fill_factories.count(g.pickup)) {
      batches[g.pickup].push_back(&g);
      continue;
    }
    const bool urgent = g.committed - view.now <= params_.time_threshold;
    const bool forced =
        view.now - g.creation >= cfg.dispatch_deadline - cfg.epoch_length;
    bool hitch = false;
    for (const auto& vv : view.vehicles) {
      const Working& w = ws.at(vv.id);
      if (w.capacity < g.total) continue;
      if (working_tail(w) == g.pickup && !tail_is_frozen(w)) {
        hitch = true;
        break;
      }
    }
    if (urgent || forced || hitch) singles.push_back(&g);
  }

  // Fill-triggered factories ship as one co-located batch when a single
  // vehicle can take the whole load; otherwise order by order.
  for (auto& [factory, batch] : batches) {
    Quarters total = 0;
    for (const Group* g : batch) total += g->total;
    const VehicleId* best = nullptr;
    Sec best_cost = 0;
    for (const auto& vv : view.vehicles) {
      Working& w = ws.at(vv.id);
      if (w.capacity < total) continue;
      FactoryId tail = working_tail(w);
      if (tail == factory && tail_is_frozen(w)) continue;
      Sec c = tail == factory ? 0 : net.leg(tail, factory).travel_time;
      if (!best || c < best_cost) {
        best = &vv.id;
        best_cost = c;
      }
    }
    if (!best) {
      singles.insert(singles.end(), batch.begin(), batch.end());
      continue;
    }
    Working& w = ws.at(*best);
    w.present = true;
    // One pickup stop with every order, deliveries unwound in reverse (LIFO).
    std::vector<ItemId> pickups;
    for (const Group* g : batch)
      for (const auto& [id, q] : g->items) pickups.push_back(id);
    if (!w.cmd.route.empty() && w.cmd.route.back().factory_id == factory) {
      auto& pl = w.cmd.route.back().pickup_item_list;
      pl.insert(pl.end(), pickups.begin(), pickups.end());
    } else if (w.cmd.route.empty() && w.cmd.destination &&
               w.cmd.destination->factory_id == factory && !w.committed_stop) {
      auto& pl = w.cmd.destination->pickup_item_list;
      pl.insert(pl.end(), pickups.begin(), pickups.end());
    } else {
      Stop p = make_stop(net, factory);
      p.pickup_item_list = std::move(pickups);
      if (!w.cmd.destination && w.cmd.route.empty())
        w.cmd.destination = std::move(p);
      else
        w.cmd.route.push_back(std::move(p));
    }
    for (auto it = batch.rbegin(); it != batch.rend(); ++it) {
      const Group* g = *it;
      if (!w.cmd.route.empty() && w.cmd.route.back().factory_id == g->delivery) {
        for (const auto& [id, q] : g->items)
          w.cmd.route.back().delivery_item_list.push_back(id);
      } else {
        Stop d = make_stop(net, g->delivery);
        for (const auto& [id, q] : g->items) d.delivery_item_list.push_back(id);
        w.cmd.route.push_back(std::move(d));
      }
    }
  }

  assign_shipments(ws, view, net, shipments_of_groups(singles, max_q));
  DispatchPlan plan = plan_from_workings(view, ws);
  book_ = plan;
  return plan;
}

namespace {

// A movable pickup-delivery unit: one order's pickups at one mutable stop,
// all delivered together at a single later stop of the same vehicle.
struct MovableUnit {
  VehicleId vehicle;
  OrderId order;
  FactoryId pickup;
  FactoryId delivery;
  std::vector<ItemId> items;
  Quarters quarters = 0;
};

std::vector<MovableUnit> movable_units(const DispatchPlan& plan, const PolicyView& view,
                                       const std::map<ItemId, const ItemView*>& items) {
  std::vector<MovableUnit> out;
  for (const auto& vv : view.vehicles) {
    const VehicleCommand* cmd = plan.command(vv.id);
    if (!cmd) continue;
    const bool committed = vv.destination && vv.cur_factory_id == vv.destination->factory_id;
    std::vector<const Stop*> path;
    if (cmd->destination) path.push_back(&*cmd->destination);
    for (const auto& s : cmd->route) path.push_back(&s);
    std::map<ItemId, std::size_t> delivery_stop;
    for (std::size_t i = 0; i < path.size(); ++i)
      for (const auto& id : path[i]->delivery_item_list) delivery_stop[id] = i;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (i == 0 && cmd->destination && committed) continue;  // frozen stop
      std::map<OrderId, std::size_t> where;
      std::vector<MovableUnit> local;
      for (const auto& id : path[i]->pickup_item_list) {
        auto iv = items.find(id);
        if (iv == items.end()) continue;
        auto [w, inserted] = where.emplace(iv->second->order_id, local.size());
        if (inserted) {
          MovableUnit u;
          u.vehicle = vv.id;
          u.order = iv->second->order_id;
          u.pickup = path[i]->factory_id;
          u.delivery = iv->second->delivery_factory_id;
          local.push_back(std::move(u));
        }
        MovableUnit& u = local[w->second];
        u.items.push_back(id);
        u.quarters += iv->second->demand_quarters();
      }
      for (auto& u : local) {
        bool single = true;
        std::size_t d = std::size_t(-1);
        for (const auto& id : u.items) {
          auto it = delivery_stop.find(id);
          if (it == delivery_stop.end() || (d != std::size_t(-1) && it->second != d)) {
            single = false;
            break;
          }
          d = it->second;
        }
        if (single && d != std::size_t(-1) && d > i) out.push_back(std::move(u));
      }
    }
  }
  return out;
}

Shipment unit_shipment(const MovableUnit& u) {
  Shipment s;
  s.order = u.order;
  s.pickup = u.pickup;
  s.delivery = u.delivery;
  s.items = u.items;
  s.quarters = u.quarters;
  return s;
}

// Strips the unit's items out of a command, drops stops left with no work,
// and merges stops that became factory-adjacent. The locked destination is
// kept (possibly as a pass-through) unless the vehicle has no standing
// obligation, in which case the next stop is promoted.
VehicleCommand remove_unit(const VehicleCommand& in, const MovableUnit& u, bool committed_stop,
                           bool has_view_destination) {
  VehicleCommand out = in;
  std::set<ItemId> drop(u.items.begin(), u.items.end());
  auto strip = [&](Stop& s) {
    auto rm = [&](std::vector<ItemId>& v) {
      v.erase(std::remove_if(v.begin(), v.end(),
                             [&](const ItemId& id) { return drop.count(id) > 0; }),
              v.end());
    };
    rm(s.pickup_item_list);
    rm(s.delivery_item_list);
  };
  if (out.destination && !committed_stop) strip(*out.destination);
  for (auto& s : out.route) strip(s);
  std::vector<Stop> kept;
  for (auto& s : out.route)
    if (!s.empty_service()) kept.push_back(std::move(s));
  out.route.clear();
  for (auto& s : kept) {
    FactoryId prev = out.route.empty()
                         ? (out.destination ? out.destination->factory_id : FactoryId{})
                         : out.route.back().factory_id;
    if (!prev.empty() && prev == s.factory_id) {
      if (!out.route.empty()) {
        auto& t = out.route.back();
        t.delivery_item_list.insert(t.delivery_item_list.end(), s.delivery_item_list.begin(),
                                    s.delivery_item_list.end());
        t.pickup_item_list.insert(t.pickup_item_list.end(), s.pickup_item_list.begin(),
                                  s.pickup_item_list.end());
        continue;
      }
      if (out.destination && !committed_stop) {
        out.destination->delivery_item_list.insert(out.destination->delivery_item_list.end(),
                                                   s.delivery_item_list.begin(),
                                                   s.delivery_item_list.end());
        out.destination->pickup_item_list.insert(out.destination->pickup_item_list.end(),
                                                 s.pickup_item_list.begin(),
                                                 s.pickup_item_list.end());
        continue;
      }
      // Frozen stop followed by the same factory: the candidate will fail
      // validation and be discarded.
    }
    out.route.push_back(std::move(s));
  }
  if (out.destination && out.destination->empty_service() && !has_view_destination) {
    if (!out.route.empty()) {
      out.destination = std::move(out.route.front());
      out.route.erase(out.route.begin());
    } else {
      out.destination.reset();
    }
  }
  return out;
}

}  // namespace

DispatchPlan vns_improve(const PolicyView& view, const RoadNetwork& net, const SimConfig& cfg,
                         DispatchPlan initial, const VnsConfig& vcfg) {
  for (const auto& nb : vcfg.neighborhoods)
    if (nb != "INTER_ROUTE_SWAP" && nb != "INTRA_ROUTE_RELOCATE")
      throw std::invalid_argument("vns_improve: unknown neighborhood " + nb);
  if (vcfg.max_iterations < 0 || vcfg.max_evaluations < 0 || vcfg.time_budget < 0 || vcfg.mu < 0)
    throw std::invalid_argument("vns_improve: budgets must be non-negative");

  std::set<FactoryId> factories;
  for (const auto& f : net.factories()) factories.insert(f.id);
  ValidationContext ctx = make_validation_context(view, factories);
  if (!validate_dispatch(ctx, initial).empty())
    throw std::invalid_argument("vns_improve: initial plan is invalid");

  std::map<ItemId, const ItemView*> items;
  for (const auto& iv : view.unallocated_items) items[iv.id] = &iv;
  for (const auto& iv : view.ongoing_items) items[iv.id] = &iv;

  EstimateParams ep;
  ep.lambda = vcfg.lambda;
  ep.mu = vcfg.mu;
  DispatchPlan plan = std::move(initial);
  PlanEstimate best = estimate_plan_cost(view, plan, net, cfg, ep);

  std::mt19937_64 rng(vcfg.rng_seed);
  std::int64_t evals = 0;
  bool out_of_budget = false;
  const auto started = std::chrono::steady_clock::now();
  auto budget_left = [&]() {
    if (evals >= vcfg.max_evaluations) return false;
    if (vcfg.time_budget > 0) {
      std::chrono::duration<double> dt = std::chrono::steady_clock::now() - started;
      if (dt.count() >= vcfg.time_budget) return false;
    }
    return true;
  };
  auto consider = [&](DispatchPlan&& cand) {
    if (!budget_left()) {
      out_of_budget = true;
      return false;
    }
    ++evals;
    if (!validate_dispatch(ctx, cand).empty()) return false;
    PlanEstimate c = estimate_plan_cost(view, cand, net, cfg, ep);
    if (c.cost < best.cost - 1e-9) {
      plan = std::move(cand);
      best = c;
      return true;
    }
    return false;
  };
  auto committed_flag = [&](const VehicleId& vid) {
    const VehicleView* vv = view.vehicle(vid);
    return vv && vv->destination && vv->cur_factory_id == vv->destination->factory_id;
  };
  auto locked_flag = [&](const VehicleId& vid) {
    const VehicleView* vv = view.vehicle(vid);
    return vv && vv->destination.has_value();
  };

  for (std::int64_t pass = 0; pass < vcfg.max_iterations && !out_of_budget; ++pass) {
    bool improved = false;
    for (const auto& nb : vcfg.neighborhoods) {
      auto units = movable_units(plan, view, items);
      if (vcfg.rng_seed != 0) std::shuffle(units.begin(), units.end(), rng);
      if (nb == "INTER_ROUTE_SWAP") {
        // One-sided transfers.
        for (std::size_t i = 0; i < units.size() && !improved && !out_of_budget; ++i) {
          const MovableUnit& u = units[i];
          for (const auto& vv : view.vehicles) {
            if (vv.id == u.vehicle || vv.capacity < u.quarters) continue;
            DispatchPlan cand = plan;
            cand.commands[u.vehicle] =
                remove_unit(*cand.command(u.vehicle), u, committed_flag(u.vehicle),
                            locked_flag(u.vehicle));
            Working w = make_working(vv, cand.command(vv.id));
            Sec c = 0;
            if (!append_cost(net, w, unit_shipment(u), &c)) continue;
            append_shipment(w, unit_shipment(u), net);
            cand.commands[vv.id] = std::move(w.cmd);
            if ((improved = consider(std::move(cand)))) break;
            if (out_of_budget) break;
          }
        }
        // Pairwise exchanges.
        for (std::size_t i = 0; i + 1 < units.size() && !improved && !out_of_budget; ++i) {
          for (std::size_t j = i + 1; j < units.size() && !improved && !out_of_budget; ++j) {
            const MovableUnit& a = units[i];
            const MovableUnit& b = units[j];
            if (a.vehicle == b.vehicle) continue;
            const VehicleView* va = view.vehicle(a.vehicle);
            const VehicleView* vb = view.vehicle(b.vehicle);
            if (!va || !vb || va->capacity < b.quarters || vb->capacity < a.quarters) continue;
            DispatchPlan cand = plan;
            cand.commands[a.vehicle] = remove_unit(*cand.command(a.vehicle), a,
                                                   committed_flag(a.vehicle),
                                                   locked_flag(a.vehicle));
            cand.commands[b.vehicle] = remove_unit(*cand.command(b.vehicle), b,
                                                   committed_flag(b.vehicle),
                                                   locked_flag(b.vehicle));
            Working wa = make_working(*va, cand.command(a.vehicle));
            Working wb = make_working(*vb, cand.command(b.vehicle));
            Sec c = 0;
            if (!append_cost(net, wa, unit_shipment(b), &c)) continue;
            if (!append_cost(net, wb, unit_shipment(a), &c)) continue;
            append_shipment(wa, unit_shipment(b), net);
            append_shipment(wb, unit_shipment(a), net);
            cand.commands[a.vehicle] = std::move(wa.cmd);
            cand.commands[b.vehicle] = std::move(wb.cmd);
            improved = consider(std::move(cand));
          }
        }
      } else {  // INTRA_ROUTE_RELOCATE
        for (std::size_t i = 0; i < units.size() && !improved && !out_of_budget; ++i) {
          const MovableUnit& u = units[i];
          VehicleCommand removed = remove_unit(*plan.command(u.vehicle), u,
                                               committed_flag(u.vehicle),
                                               locked_flag(u.vehicle));
          Stop pick;
          Stop del;
          pick = make_stop(net, u.pickup);
          pick.pickup_item_list = u.items;
          del = make_stop(net, u.delivery);
          del.delivery_item_list = u.items;
          if (!removed.destination) {
            DispatchPlan cand = plan;
            VehicleCommand c = removed;
            c.destination = pick;
            c.route.insert(c.route.begin(), del);
            cand.commands[u.vehicle] = std::move(c);
            improved = consider(std::move(cand));
            continue;
          }
          const std::size_t slots = removed.route.size() + 1;
          for (std::size_t k = 0; k < slots && !improved && !out_of_budget; ++k) {
            VehicleCommand c = removed;
            c.route.insert(c.route.begin() + std::ptrdiff_t(k), {pick, del});
            DispatchPlan cand = plan;
            cand.commands[u.vehicle] = std::move(c);
            improved = consider(std::move(cand));
          }
        }
      }
      if (improved) break;  // restart from the first neighborhood
    }
    if (!improved) break;  // local optimum of every neighborhood
  }
  return plan;
}

DispatchPlan VnsPolicy::decide(const Snapshot& snap) {
  DispatchPlan seeded = greedy_plan(snap.view, inst_->network, book_);
  DispatchPlan plan = vns_improve(snap.view, inst_->network, inst_->config, seeded, cfg_);
  book_ = plan;
  return plan;
}

std::unique_ptr<Policy> make_policy(const std::string& name, const Instance& inst) {
  if (name == "greedy") return std::make_unique<GreedyPolicy>(inst);
  if (name == "threshold") return std::make_unique<ThresholdPolicy>(inst, ThresholdParams{});
  if (name == "vns") return std::make_unique<VnsPolicy>(inst, VnsConfig{});
  throw std::invalid_argument("unknown policy: " + name);
}

}  // namespace dpdp
