#pragma once
// Shared scaffolding for the test suites: a compact instance builder for
// handcrafted worlds, seed search for pinning random vehicle placement, and
// a book-keeping simulation driver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "dpdp/instance.hpp"
#include "dpdp/sim.hpp"
#include "dpdp/solvers.hpp"

namespace dpdp::testing {

// Builds small handcrafted instances with explicit legs (symmetric).
class WorldBuilder {
 public:
  WorldBuilder() { cfg_.rng_seed = 1; }

  WorldBuilder& config(const SimConfig& cfg) {
    cfg_ = cfg;
    return *this;
  }
  SimConfig& config() { return cfg_; }

  WorldBuilder& factory(const FactoryId& id, std::int32_t docks = 4) {
    Factory f;
    f.id = id;
    f.longitude = 100.0 + double(factories_.size()) * 0.25;
    f.latitude = 30.0 + double(factories_.size()) * 0.125;
    f.dock_count = docks;
    factories_.push_back(std::move(f));
    return *this;
  }

  WorldBuilder& leg(const FactoryId& a, const FactoryId& b, double km, Sec seconds) {
    edges_[{a, b}] = RouteLeg{km, seconds};
    edges_[{b, a}] = RouteLeg{km, seconds};
    return *this;
  }

  WorldBuilder& vehicle(const VehicleId& id, std::int32_t pallets) {
    Vehicle v;
    v.id = id;
    v.capacity = Quarters(4 * pallets);
    v.gps_id = "G" + id;
    fleet_.push_back(std::move(v));
    return *this;
  }

  WorldBuilder& order(const OrderId& id, const FactoryId& pickup, const FactoryId& delivery,
                      Sec creation, Sec committed, std::int32_t standard, std::int32_t small = 0,
                      std::int32_t box = 0) {
    Order o;
    o.id = id;
    o.pickup_factory = pickup;
    o.delivery_factory = delivery;
    o.quantity = PalletQuantity{standard, small, box};
    o.creation_time = creation;
    o.committed_completion_time = committed;
    o.load_time = Sec(std::llround(o.quantity.demand() * double(cfg_.handling_rate)));
    o.unload_time = o.load_time;
    orders_.push_back(std::move(o));
    return *this;
  }

  Instance build() const {
    Instance inst;
    inst.network = RoadNetwork(factories_, edges_);
    inst.fleet = fleet_;
    inst.orders = orders_;
    std::stable_sort(inst.orders.begin(), inst.orders.end(), [](const Order& a, const Order& b) {
      return std::tie(a.creation_time, a.id) < std::tie(b.creation_time, b.id);
    });
    inst.config = cfg_;
    inst.check();
    return inst;
  }

 private:
  std::vector<Factory> factories_;
  std::map<std::pair<FactoryId, FactoryId>, RouteLeg> edges_;
  std::vector<Vehicle> fleet_;
  std::vector<Order> orders_;
  SimConfig cfg_;
};

// Vehicle start positions are a deterministic function of the rng seed;
// searches for one where the initial snapshot satisfies `pred`.
inline std::uint64_t find_seed(Instance inst, const std::function<bool(const PolicyView&)>& pred,
                               std::uint64_t max_tries = 2000) {
  for (std::uint64_t s = 1; s <= max_tries; ++s) {
    inst.config.rng_seed = s;
    Simulation sim(inst);
    if (pred(sim.policy_view())) return s;
  }
  throw std::runtime_error("find_seed: no seed satisfied the predicate");
}

// Convenience predicate: every listed vehicle parked at its wanted factory.
inline std::function<bool(const PolicyView&)> starts_at(
    std::vector<std::pair<VehicleId, FactoryId>> want) {
  return [want = std::move(want)](const PolicyView& view) {
    for (const auto& [vid, fid] : want) {
      const VehicleView* v = view.vehicle(vid);
      if (!v || v->cur_factory_id != fid) return false;
    }
    return true;
  };
}

// Runs to completion with `make_plan` consulted once per epoch on top of the
// reconciled book (the returned plan replaces the book).
inline SimRunResult run_with(
    const Instance& inst,
    const std::function<DispatchPlan(const Snapshot&, DispatchPlan)>& make_plan) {
  DispatchPlan book;
  PolicyFn fn = [&](const Snapshot& snap) {
    DispatchPlan plan = make_plan(snap, reconcile_book(book, snap.view));
    book = plan;
    return plan;
  };
  return run_to_completion(inst, fn);
}

// Dispatches `first` at epoch 0 and only maintains the book afterwards.
inline SimRunResult run_with_initial_plan(const Instance& inst, const DispatchPlan& first) {
  return run_with(inst, [&](const Snapshot& snap, DispatchPlan reconciled) {
    return snap.epoch_index == 0 ? first : reconciled;
  });
}

// First event matching kind (and optional vehicle/factory/item); throws when absent.
inline const SimEvent& first_event(const EventLog& log, EventKind kind,
                                   const VehicleId& vehicle = {}, const FactoryId& factory = {},
                                   const ItemId& item = {}) {
  for (const auto& e : log) {
    if (e.kind != kind) continue;
    if (!vehicle.empty() && e.vehicle != vehicle) continue;
    if (!factory.empty() && e.factory != factory) continue;
    if (!item.empty() && e.item != item) continue;
    return e;
  }
  throw std::runtime_error("first_event: no match for " + std::string(event_kind_name(kind)));
}

inline std::size_t count_events(const EventLog& log, EventKind kind,
                                const FactoryId& factory = {}) {
  std::size_t n = 0;
  for (const auto& e : log)
    if (e.kind == kind && (factory.empty() || e.factory == factory)) ++n;
  return n;
}

// Stop construction shorthand for plans (coordinates are engine-normalized).
inline Stop stop(const FactoryId& f, std::vector<ItemId> deliveries = {},
                 std::vector<ItemId> pickups = {}) {
  Stop s;
  s.factory_id = f;
  s.delivery_item_list = std::move(deliveries);
  s.pickup_item_list = std::move(pickups);
  return s;
}

// The item ids an exploded order receives, in generation order.
inline std::vector<ItemId> item_ids(const Instance& inst, const OrderId& oid) {
  const Order* o = inst.order(oid);
  if (!o) throw std::runtime_error("item_ids: unknown order " + oid);
  std::vector<ItemId> out;
  auto items = explode_order(*o, inst.config.handling_rate);
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(it.id);
  return out;
}

// Scratch directory under the system temp root, wiped on construction.
class TempDir {
 public:
  explicit TempDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() / ("dpdp_test_" + name)) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace dpdp::testing
