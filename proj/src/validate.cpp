#include "dpdp/validate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dpdp {

std::string_view violation_code_name(ViolationCode c) {
  switch (c) {
    case ViolationCode::DestinationLocked: return "DESTINATION_LOCKED";
    case ViolationCode::ListCommitted: return "LIST_COMMITTED";
    case ViolationCode::CapacityExceeded: return "CAPACITY_EXCEEDED";
    case ViolationCode::LifoViolation: return "LIFO_VIOLATION";
    case ViolationCode::IllegalSplit: return "ILLEGAL_SPLIT";
    case ViolationCode::UnknownId: return "UNKNOWN_ID";
    case ViolationCode::DuplicateItem: return "DUPLICATE_ITEM";
    case ViolationCode::OrphanedItem: return "ORPHANED_ITEM";
    case ViolationCode::MalformedRoute: return "MALFORMED_ROUTE";
  }
  throw std::invalid_argument("unknown violation code");
}

const VehicleCtx* ValidationContext::vehicle(const VehicleId& id) const {
  for (const auto& v : vehicles)
    if (v.id == id) return &v;
  return nullptr;
}

ValidationContext make_validation_context(const PolicyView& view,
                                          const std::set<FactoryId>& factories) {
  ValidationContext ctx;
  ctx.factories = factories;
  for (const auto& v : view.vehicles) {
    VehicleCtx c;
    c.id = v.id;
    c.capacity = v.capacity;
    c.cargo = v.carrying_items;
    if (v.destination) {
      if (!v.cur_factory_id.empty() && v.destination->factory_id == v.cur_factory_id) {
        c.mode = VehicleCtx::Mode::Committed;
        c.locked_factory = v.cur_factory_id;
        c.committed_deliveries = v.destination->delivery_item_list;
        c.committed_pickups = v.destination->pickup_item_list;
      } else {
        c.mode = VehicleCtx::Mode::Transit;
        c.locked_factory = v.destination->factory_id;
      }
    }
    ctx.vehicles.push_back(std::move(c));
  }
  auto add_items = [&ctx](const std::vector<ItemView>& items) {
    for (const auto& it : items) {
      ItemCtx c;
      c.id = it.id;
      c.order = it.order_id;
      c.quarters = it.demand_quarters();
      c.order_quarters = Quarters(std::llround(it.demand * 4.0));
      c.pickup = it.pickup_factory_id;
      c.delivery = it.delivery_factory_id;
      c.status = it.delivery_state;
      ctx.items[c.id] = std::move(c);
    }
  };
  add_items(view.unallocated_items);
  add_items(view.ongoing_items);
  return ctx;
}

namespace {

struct Checker {
  const ValidationContext& ctx;
  const DispatchPlan& plan;
  std::vector<Violation> out;

  void add(ViolationCode code, std::string locus, std::string message) {
    out.push_back({code, std::move(locus), std::move(message)});
  }

  const ItemCtx* item(const ItemId& id) {
    auto it = ctx.items.find(id);
    return it == ctx.items.end() ? nullptr : &it->second;
  }

  // Stops a command executes, with the committed stop (if any) first.
  static std::vector<const Stop*> full_path(const VehicleCommand& cmd) {
    std::vector<const Stop*> path;
    if (cmd.destination) path.push_back(&*cmd.destination);
    for (const auto& s : cmd.route) path.push_back(&s);
    return path;
  }

  void check_ids() {
    for (const auto& [vid, cmd] : plan.commands) {
      if (!ctx.vehicle(vid)) {
        add(ViolationCode::UnknownId, vid, "plan addresses unknown vehicle " + vid);
        continue;
      }
      const VehicleCtx* vc = ctx.vehicle(vid);
      auto path = full_path(cmd);
      for (std::size_t i = 0; i < path.size(); ++i) {
        const Stop& s = *path[i];
        std::string locus = vid + "/stop " + std::to_string(i);
        if (!ctx.factories.count(s.factory_id))
          add(ViolationCode::UnknownId, locus, "unknown factory " + s.factory_id);
        // The echoed mid-service stop repeats the frozen lists verbatim, which
        // may name items already handled there; the echo check owns that stop.
        if (i == 0 && cmd.destination && vc->mode == VehicleCtx::Mode::Committed) continue;
        for (const auto& id : s.delivery_item_list)
          if (!item(id))
            add(ViolationCode::UnknownId, locus, "unknown or completed item " + id);
        for (const auto& id : s.pickup_item_list)
          if (!item(id))
            add(ViolationCode::UnknownId, locus, "unknown or completed item " + id);
      }
    }
  }

  void check_echoes() {
    for (const auto& v : ctx.vehicles) {
      const VehicleCommand* cmd = plan.command(v.id);
      if (v.mode == VehicleCtx::Mode::Idle) continue;
      if (!cmd || !cmd->destination) {
        add(ViolationCode::DestinationLocked, v.id,
            "vehicle " + v.id + " must keep destination " + v.locked_factory);
        continue;
      }
      if (cmd->destination->factory_id != v.locked_factory) {
        add(ViolationCode::DestinationLocked, v.id,
            "vehicle " + v.id + " destination changed from " + v.locked_factory + " to " +
                cmd->destination->factory_id);
        continue;
      }
      if (v.mode == VehicleCtx::Mode::Committed) {
        if (cmd->destination->delivery_item_list != v.committed_deliveries ||
            cmd->destination->pickup_item_list != v.committed_pickups)
          add(ViolationCode::ListCommitted, v.id,
              "vehicle " + v.id + " must echo the generated pickup/delivery lists at " +
                  v.locked_factory);
      }
    }
  }

  void check_shapes() {
    for (const auto& v : ctx.vehicles) {
      const VehicleCommand* cmd = plan.command(v.id);
      if (!cmd) continue;
      if (!cmd->destination && !cmd->route.empty()) {
        add(ViolationCode::MalformedRoute, v.id,
            "vehicle " + v.id + " has route stops but no destination");
        continue;
      }
      auto path = full_path(*cmd);
      for (std::size_t i = 1; i < path.size(); ++i)
        if (path[i]->factory_id == path[i - 1]->factory_id)
          add(ViolationCode::MalformedRoute, v.id + "/stop " + std::to_string(i),
              "consecutive stops at factory " + path[i]->factory_id);
    }
  }

  // Simulates the route: LIFO pops, capacity prefix, wrong-factory handling,
  // leftover cargo. Also records pickup stop indices for the split check.
  struct WalkResult {
    // item id -> (vehicle, stop index) where the plan picks it up
    std::map<ItemId, std::pair<VehicleId, std::size_t>> pickups;
  };

  WalkResult walk_all() {
    WalkResult result;
    for (const auto& v : ctx.vehicles) {
      const VehicleCommand* cmd = plan.command(v.id);
      if (!cmd) {
        if (!v.cargo.empty())
          add(ViolationCode::OrphanedItem, v.id,
              "vehicle " + v.id + " carries items but received no plan");
        continue;
      }
      walk_vehicle(v, *cmd, result);
    }
    return result;
  }

  void walk_vehicle(const VehicleCtx& v, const VehicleCommand& cmd, WalkResult& result) {
    std::vector<ItemId> stack = v.cargo;
    std::set<ItemId> carried(stack.begin(), stack.end());
    Quarters load = 0;
    for (const auto& id : stack)
      if (const ItemCtx* it = item(id)) load += it->quarters;
    auto path = full_path(cmd);
    for (std::size_t i = 0; i < path.size(); ++i) {
      const Stop& s = *path[i];
      std::string locus = v.id + "/stop " + std::to_string(i);
      std::vector<ItemId> deliveries, pickups;
      if (i == 0 && v.mode == VehicleCtx::Mode::Committed) {
        // Mid-service stop: only the not-yet-done part of the frozen lists
        // remains to execute.
        for (const auto& id : v.committed_deliveries)
          if (carried.count(id)) deliveries.push_back(id);
        for (const auto& id : v.committed_pickups)
          if (!carried.count(id)) pickups.push_back(id);
      } else {
        deliveries = s.delivery_item_list;
        pickups = s.pickup_item_list;
      }

      // Unloads first: the delivery set must be exactly the top of the stack.
      std::set<ItemId> want;
      for (const auto& id : deliveries) {
        const ItemCtx* it = item(id);
        if (!it) continue;  // unknown: already reported
        if (it->delivery != s.factory_id) {
          add(ViolationCode::MalformedRoute, locus,
              "item " + id + " delivered away from its delivery factory");
          continue;
        }
        if (!carried.count(id)) {
          add(ViolationCode::LifoViolation, locus,
              "item " + id + " is not on board vehicle " + v.id + " at this stop");
          continue;
        }
        want.insert(id);
      }
      while (!want.empty()) {
        const ItemId top = stack.back();  // want ⊆ carried, so the stack is non-empty
        if (!want.count(top)) {
          // Something loaded after the requested items is still on board.
          add(ViolationCode::LifoViolation, locus,
              "unloading at " + s.factory_id + " would dig under item " + top);
          break;
        }
        stack.pop_back();
        carried.erase(top);
        want.erase(top);
        if (const ItemCtx* it = item(top)) load -= it->quarters;
      }

      for (const auto& id : pickups) {
        const ItemCtx* it = item(id);
        if (!it) continue;
        if (it->pickup != s.factory_id) {
          add(ViolationCode::MalformedRoute, locus,
              "item " + id + " picked up away from its pickup factory");
          continue;
        }
        if (it->status != 1 || carried.count(id)) {
          add(ViolationCode::DuplicateItem, locus, "item " + id + " is already loaded");
          continue;
        }
        if (!result.pickups.emplace(id, std::make_pair(v.id, i)).second) {
          // Reported by the global duplicate check.
        }
        stack.push_back(id);
        carried.insert(id);
        load += it->quarters;
      }
      if (load > v.capacity)
        add(ViolationCode::CapacityExceeded, locus,
            "vehicle " + v.id + " would carry " + format_double(quarters_to_pallets(load)) +
                " over capacity " + format_double(quarters_to_pallets(v.capacity)));
    }
    if (!stack.empty()) {
      std::string names;
      for (const auto& id : stack) names += (names.empty() ? "" : ", ") + id;
      add(ViolationCode::OrphanedItem, v.id,
          "vehicle " + v.id + " route ends still carrying: " + names);
    }
  }

  void check_duplicates() {
    std::map<ItemId, int> pickup_count, delivery_count;
    for (const auto& v : ctx.vehicles) {
      const VehicleCommand* cmd = plan.command(v.id);
      if (!cmd) continue;
      auto path = full_path(*cmd);
      for (const auto* s : path) {
        for (const auto& id : s->pickup_item_list) ++pickup_count[id];
        for (const auto& id : s->delivery_item_list) ++delivery_count[id];
      }
    }
    for (const auto& [id, n] : pickup_count)
      if (n > 1)
        add(ViolationCode::DuplicateItem, id,
            "item " + id + " appears in " + std::to_string(n) + " pickup lists");
    for (const auto& [id, n] : delivery_count)
      if (n > 1)
        add(ViolationCode::DuplicateItem, id,
            "item " + id + " appears in " + std::to_string(n) + " delivery lists");
  }

  void check_splits(const WalkResult& walk) {
    // Gather the live items of every order and where the plan puts them.
    struct OrderPlan {
      Quarters order_quarters = 0;
      Quarters capacity = 0;  // capacity of some involved vehicle (homogeneous fleets)
      std::set<VehicleId> vehicles;
      // batch = items picked together at one stop (or already loaded)
      std::map<std::pair<VehicleId, std::string>, Quarters> batches;
      bool any_unassigned = false;
      Quarters live_quarters = 0;
    };
    std::map<OrderId, OrderPlan> orders;
    std::map<ItemId, VehicleId> loaded_on;
    for (const auto& v : ctx.vehicles)
      for (const auto& id : v.cargo) loaded_on[id] = v.id;

    for (const auto& [id, it] : ctx.items) {
      auto& op = orders[it.order];
      op.order_quarters = it.order_quarters;
      op.live_quarters += it.quarters;
      auto pk = walk.pickups.find(id);
      auto ld = loaded_on.find(id);
      if (ld != loaded_on.end()) {
        op.vehicles.insert(ld->second);
        op.batches[{ld->second, "@loaded"}] += it.quarters;
        if (const VehicleCtx* vc = ctx.vehicle(ld->second)) op.capacity = vc->capacity;
      } else if (pk != walk.pickups.end()) {
        const VehicleCtx* vc = ctx.vehicle(pk->second.first);
        // A pickup pending on the frozen list of the stop being serviced is
        // the same physical batch as the items already loaded there.
        bool same_as_loaded =
            vc && vc->mode == VehicleCtx::Mode::Committed && pk->second.second == 0;
        op.vehicles.insert(pk->second.first);
        op.batches[{pk->second.first,
                    same_as_loaded ? "@loaded" : "stop " + std::to_string(pk->second.second)}] +=
            it.quarters;
        if (vc) op.capacity = vc->capacity;
      } else {
        op.any_unassigned = true;
      }
    }

    for (const auto& [oid, op] : orders) {
      if (op.vehicles.empty()) continue;  // fully unassigned: nothing to judge yet
      if (op.capacity > 0 && op.order_quarters <= op.capacity) {
        // An order that fits in one vehicle must travel whole: one vehicle,
        // one batch, no stragglers.
        if (op.vehicles.size() > 1 || op.batches.size() > 1 || op.any_unassigned)
          add(ViolationCode::IllegalSplit, oid,
              "order " + oid + " fits in one vehicle and may not be split");
        continue;
      }
      // Over-capacity order: every planned batch must itself fit.
      for (const auto& [key, quarters] : op.batches) {
        if (key.second == "@loaded") continue;  // already proven by loading history
        if (op.capacity > 0 && quarters > op.capacity)
          add(ViolationCode::IllegalSplit, oid,
              "order " + oid + " batch at " + key.first + "/" + key.second + " exceeds capacity");
      }
    }
  }
};

}  // namespace

std::vector<Violation> validate_dispatch(const ValidationContext& ctx, const DispatchPlan& plan) {
  Checker c{ctx, plan, {}};
  c.check_ids();
  c.check_echoes();
  c.check_shapes();
  auto walk = c.walk_all();
  c.check_splits(walk);
  c.check_duplicates();
  return std::move(c.out);
}

}  // namespace dpdp
