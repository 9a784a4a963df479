#pragma once
// Independent feasibility oracle plus exhaustive plan enumeration for the
// validator-agreement suites. The oracle re-implements the dispatch rulebook
// from scratch in a different style (counting maps, index loops) so that it
// shares no logic with validate_dispatch; the enumerators emit every
// whole-order assignment and stop sequence for tiny fleets, plus order-split
// variants, so both legal and illegal shapes are exercised.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpdp/instance.hpp"
#include "dpdp/validate.hpp"
#include "dpdp/wire.hpp"

namespace dpdp::testing {

inline std::set<FactoryId> factory_set(const Instance& inst) {
  std::set<FactoryId> out;
  for (const auto& f : inst.network.factories()) out.insert(f.id);
  return out;
}

// True iff `plan` is feasible under the dispatch rulebook. Scope: decision
// moments where every vehicle is idle and empty and every live item awaits
// pickup (the regime the enumerators below produce), homogeneous capacities.
inline bool oracle_feasible(const ValidationContext& ctx, const DispatchPlan& plan) {
  struct Placement {
    VehicleId vehicle;
    std::size_t stop = 0;
  };
  std::map<ItemId, int> pickup_uses, delivery_uses;
  std::map<ItemId, Placement> picked_at;

  for (const auto& [vid, cmd] : plan.commands) {
    const VehicleCtx* v = ctx.vehicle(vid);
    if (!v) return false;
    if (!cmd.destination) {
      if (!cmd.route.empty()) return false;  // route without a destination
      continue;
    }
    std::vector<Stop> path;
    path.push_back(*cmd.destination);
    path.insert(path.end(), cmd.route.begin(), cmd.route.end());

    std::vector<ItemId> stack;
    Quarters load = 0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const Stop& s = path[i];
      if (!ctx.factories.count(s.factory_id)) return false;
      if (i > 0 && s.factory_id == path[i - 1].factory_id) return false;

      // Unloads: the stop's delivery set must be exactly the top of the stack.
      std::set<ItemId> want;
      for (const auto& id : s.delivery_item_list) {
        auto it = ctx.items.find(id);
        if (it == ctx.items.end()) return false;
        if (it->second.delivery != s.factory_id) return false;
        if (!want.insert(id).second) return false;  // same id twice at one stop
        ++delivery_uses[id];
      }
      if (want.size() > stack.size()) return false;
      for (const auto& id : want)
        if (std::find(stack.end() - std::ptrdiff_t(want.size()), stack.end(), id) == stack.end())
          return false;  // not within the top segment: digging required
      for (std::size_t k = 0; k < want.size(); ++k) {
        load -= ctx.items.at(stack.back()).quarters;
        stack.pop_back();
      }

      // Loads, in list order.
      for (const auto& id : s.pickup_item_list) {
        auto it = ctx.items.find(id);
        if (it == ctx.items.end()) return false;
        if (it->second.pickup != s.factory_id) return false;
        if (it->second.status != 1) return false;
        if (std::find(stack.begin(), stack.end(), id) != stack.end()) return false;
        ++pickup_uses[id];
        picked_at[id] = Placement{vid, i};
        stack.push_back(id);
        load += it->second.quarters;
      }
      if (load > v->capacity) return false;
    }
    if (!stack.empty()) return false;  // route ends still carrying cargo
  }

  for (const auto& [id, n] : pickup_uses)
    if (n > 1) return false;
  for (const auto& [id, n] : delivery_uses)
    if (n > 1) return false;

  // Order-split rule. Batch = the order's items picked together at one stop.
  std::map<OrderId, std::vector<ItemId>> by_order;
  for (const auto& [id, it] : ctx.items) by_order[it.order].push_back(id);
  for (const auto& [oid, ids] : by_order) {
    std::set<VehicleId> used;
    std::set<std::pair<VehicleId, std::size_t>> batches;
    bool unassigned = false;
    Quarters order_q = ctx.items.at(ids.front()).order_quarters;
    Quarters cap = 0;
    std::map<std::pair<VehicleId, std::size_t>, Quarters> batch_q;
    for (const auto& id : ids) {
      auto it = picked_at.find(id);
      if (it == picked_at.end()) {
        unassigned = true;
        continue;
      }
      used.insert(it->second.vehicle);
      batches.insert({it->second.vehicle, it->second.stop});
      batch_q[{it->second.vehicle, it->second.stop}] += ctx.items.at(id).quarters;
      cap = ctx.vehicle(it->second.vehicle)->capacity;
    }
    if (used.empty()) continue;  // fully unassigned: nothing dispatched yet
    if (order_q <= cap) {
      if (used.size() > 1 || batches.size() > 1 || unassigned) return false;
    } else {
      for (const auto& [key, q] : batch_q)
        if (q > cap) return false;
    }
  }
  return true;
}

// --- enumeration -----------------------------------------------------------

struct EnumOrder {
  OrderId id;
  FactoryId pickup;
  FactoryId delivery;
  std::vector<ItemId> items;  // id order, whole order
};

inline std::vector<EnumOrder> enum_orders(const PolicyView& view) {
  std::vector<EnumOrder> out;
  std::map<OrderId, std::size_t> where;
  for (const auto& it : view.unallocated_items) {
    auto [pos, fresh] = where.try_emplace(it.order_id, out.size());
    if (fresh) out.push_back(EnumOrder{it.order_id, it.pickup_factory_id,
                                       it.delivery_factory_id, {}});
    out[pos->second].items.push_back(it.id);
  }
  return out;
}

inline Stop enum_stop(const FactoryId& f, std::vector<ItemId> deliveries,
                      std::vector<ItemId> pickups) {
  Stop s;
  s.factory_id = f;
  s.delivery_item_list = std::move(deliveries);
  s.pickup_item_list = std::move(pickups);
  return s;
}

inline DispatchPlan make_enum_plan(const std::vector<VehicleId>& fleet,
                                   const std::vector<std::vector<Stop>>& paths) {
  DispatchPlan plan;
  for (std::size_t v = 0; v < fleet.size(); ++v) {
    VehicleCommand cmd;
    if (!paths[v].empty()) {
      cmd.destination = paths[v].front();
      cmd.route.assign(paths[v].begin() + 1, paths[v].end());
    }
    plan.commands[fleet[v]] = std::move(cmd);
  }
  return plan;
}

// Every assignment of whole orders to (none | one vehicle), crossed with every
// per-vehicle permutation of the resulting pickup/delivery stop multiset.
// Token 2k = pickup of order k, 2k+1 = delivery of order k.
inline std::vector<DispatchPlan> enumerate_whole_order_plans(const PolicyView& view) {
  const auto orders = enum_orders(view);
  std::vector<VehicleId> fleet;
  for (const auto& v : view.vehicles) fleet.push_back(v.id);
  const std::size_t V = fleet.size(), K = orders.size();

  auto stops_for = [&](const std::vector<int>& tokens) {
    std::vector<Stop> path;
    for (int tok : tokens) {
      const EnumOrder& o = orders[std::size_t(tok / 2)];
      if (tok % 2 == 0)
        path.push_back(enum_stop(o.pickup, {}, o.items));
      else
        path.push_back(enum_stop(o.delivery, o.items, {}));
    }
    return path;
  };

  std::vector<DispatchPlan> plans;
  std::vector<std::size_t> owner(K, 0);  // 0 = unassigned, 1..V = fleet index+1
  while (true) {
    // Per vehicle: sorted token list, then all permutations.
    std::vector<std::vector<std::vector<int>>> perms(V);
    for (std::size_t v = 0; v < V; ++v) {
      std::vector<int> toks;
      for (std::size_t k = 0; k < K; ++k)
        if (owner[k] == v + 1) {
          toks.push_back(int(2 * k));
          toks.push_back(int(2 * k + 1));
        }
      std::sort(toks.begin(), toks.end());
      do {
        perms[v].push_back(toks);
      } while (std::next_permutation(toks.begin(), toks.end()));
    }
    std::vector<std::size_t> pick(V, 0);
    while (true) {
      std::vector<std::vector<Stop>> paths(V);
      for (std::size_t v = 0; v < V; ++v) paths[v] = stops_for(perms[v][pick[v]]);
      plans.push_back(make_enum_plan(fleet, paths));
      std::size_t d = 0;
      while (d < V && ++pick[d] == perms[d].size()) pick[d++] = 0;
      if (d == V) break;
    }
    std::size_t k = 0;
    while (k < K && ++owner[k] == V + 1) owner[k++] = 0;
    if (k == K) break;
  }
  return plans;
}

// Split variants: each multi-item order divided into (first item | rest),
// as two batches across two vehicles, as two batches on one vehicle, and as
// a dangling half with the rest left unassigned.
inline std::vector<DispatchPlan> enumerate_split_plans(const PolicyView& view) {
  const auto orders = enum_orders(view);
  std::vector<VehicleId> fleet;
  for (const auto& v : view.vehicles) fleet.push_back(v.id);
  std::vector<DispatchPlan> plans;
  for (const auto& o : orders) {
    if (o.items.size() < 2) continue;
    std::vector<ItemId> part1(o.items.begin(), o.items.begin() + 1);
    std::vector<ItemId> part2(o.items.begin() + 1, o.items.end());
    if (fleet.size() >= 2) {
      std::vector<std::vector<Stop>> paths(fleet.size());
      paths[0] = {enum_stop(o.pickup, {}, part1), enum_stop(o.delivery, part1, {})};
      paths[1] = {enum_stop(o.pickup, {}, part2), enum_stop(o.delivery, part2, {})};
      plans.push_back(make_enum_plan(fleet, paths));
    }
    {
      std::vector<std::vector<Stop>> paths(fleet.size());
      paths[0] = {enum_stop(o.pickup, {}, part1), enum_stop(o.delivery, part1, {}),
                  enum_stop(o.pickup, {}, part2), enum_stop(o.delivery, part2, {})};
      plans.push_back(make_enum_plan(fleet, paths));
    }
    {
      std::vector<std::vector<Stop>> paths(fleet.size());
      paths[0] = {enum_stop(o.pickup, {}, part1), enum_stop(o.delivery, part1, {})};
      plans.push_back(make_enum_plan(fleet, paths));
    }
  }
  return plans;
}

}  // namespace dpdp::testing
