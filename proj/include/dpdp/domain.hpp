#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpdp/util.hpp"

namespace dpdp {

using FactoryId = std::string;
using VehicleId = std::string;
using OrderId = std::string;
using ItemId = std::string;

// Cargo amounts are kept in quarter-pallet units (1 box = 1 unit) so that
// all demand arithmetic stays exact.
using Quarters = std::int32_t;

inline double quarters_to_pallets(Quarters q) { return double(q) / 4.0; }

enum class PalletType { Standard, Small, Box };

Quarters pallet_quarters(PalletType t);  // Standard=4, Small=2, Box=1
std::string_view pallet_type_name(PalletType t);
PalletType pallet_type_from_name(std::string_view name);

struct PalletQuantity {
  std::int32_t standard = 0;
  std::int32_t small = 0;
  std::int32_t box = 0;

  bool valid() const { return standard >= 0 && small >= 0 && box >= 0 && total_count() > 0; }
  std::int32_t total_count() const { return standard + small + box; }
  Quarters demand_quarters() const { return Quarters(4 * standard + 2 * small + box); }
  double demand() const { return quarters_to_pallets(demand_quarters()); }

  bool operator==(const PalletQuantity&) const = default;
};

enum class ItemStatus : int {
  Initialized = 0,
  Generated = 1,
  Loaded = 2,
  Delivered = 3,
};

struct Order {
  OrderId id;
  FactoryId pickup_factory;
  FactoryId delivery_factory;
  PalletQuantity quantity;
  Sec creation_time = 0;
  Sec committed_completion_time = 0;
  // Order-level handling times as carried by the orders table. Informational:
  // per-item times are derived from the handling rate.
  Sec load_time = 0;
  Sec unload_time = 0;

  bool operator==(const Order&) const = default;
};

struct OrderItem {
  ItemId id;
  OrderId order_id;
  PalletType pallet_type = PalletType::Standard;
  Sec load_time = 0;
  Sec unload_time = 0;
  ItemStatus status = ItemStatus::Generated;

  Quarters demand_quarters() const { return pallet_quarters(pallet_type); }
  double demand() const { return quarters_to_pallets(demand_quarters()); }
};

struct Vehicle {
  VehicleId id;
  Quarters capacity = 0;  // quarter-pallet units
  std::int32_t operation_hours = 24;
  std::string gps_id;

  bool operator==(const Vehicle&) const = default;
};

struct Factory {
  FactoryId id;
  double longitude = 0;  // carried opaquely for the output schemas
  double latitude = 0;
  std::int32_t dock_count = 1;

  bool operator==(const Factory&) const = default;
};

struct RouteLeg {
  double distance_km = 0;
  Sec travel_time = 0;

  bool operator==(const RouteLeg&) const = default;
};

// Complete directed graph over factories; lookup of any ordered pair of known
// factories never fails (same-factory legs are zero).
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Factory> factories, std::map<std::pair<FactoryId, FactoryId>, RouteLeg> edges);

  const std::vector<Factory>& factories() const { return factories_; }
  const Factory* factory(const FactoryId& id) const;
  bool has_factory(const FactoryId& id) const { return factory(id) != nullptr; }
  RouteLeg leg(const FactoryId& from, const FactoryId& to) const;
  const std::map<std::pair<FactoryId, FactoryId>, RouteLeg>& edges() const { return edges_; }

  bool operator==(const RoadNetwork&) const = default;

 private:
  std::vector<Factory> factories_;
  std::map<FactoryId, std::size_t> index_;
  std::map<std::pair<FactoryId, FactoryId>, RouteLeg> edges_;
};

// Per-item handling time: rate * demand, rounded half-up to whole seconds.
Sec item_handling_time(Quarters item_quarters, Sec rate_seconds_per_pallet);

// One item per physical pallet/box, standard first, then small, then box.
// Item ids are "<order_id>-<NNN>"; every item starts Generated.
std::vector<OrderItem> explode_order(const Order& order, Sec rate_seconds_per_pallet);

// Minimum status over the order's items. Throws std::invalid_argument on an
// empty list or mixed order ids.
ItemStatus order_status(const std::vector<OrderItem>& items);

enum class SplitVerdict { Legal, Violation };

// Order-split rule: an order that fits in one vehicle must stay whole; an
// order that exceeds capacity must be divided into parts that each fit.
// `part_quarters` holds the total demand of every non-empty part.
SplitVerdict split_legality(Quarters order_quarters, Quarters capacity,
                            const std::vector<Quarters>& part_quarters);

// Structural wrapper over item subsets: verifies the parts exactly partition
// `items` (throws std::invalid_argument otherwise), then applies the rule.
SplitVerdict split_legality(const Order& order, Quarters capacity,
                            const std::vector<std::vector<ItemId>>& proposed_parts,
                            const std::vector<OrderItem>& items);

}  // namespace dpdp
