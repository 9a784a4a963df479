#include "dpdp/domain.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace dpdp {

Quarters pallet_quarters(PalletType t) {
  switch (t) {
    case PalletType::Standard: return 4;
    case PalletType::Small: return 2;
    case PalletType::Box: return 1;
  }
  throw std::invalid_argument("unknown pallet type");
}

std::string_view pallet_type_name(PalletType t) {
  switch (t) {
    case PalletType::Standard: return "PALLET";
    case PalletType::Small: return "HALF_PALLET";
    case PalletType::Box: return "BOX";
  }
  throw std::invalid_argument("unknown pallet type");
}

PalletType pallet_type_from_name(std::string_view name) {
  if (name == "PALLET") return PalletType::Standard;
  if (name == "HALF_PALLET") return PalletType::Small;
  if (name == "BOX") return PalletType::Box;
  throw ParseError("unknown pallet type name: " + std::string(name));
}

RoadNetwork::RoadNetwork(std::vector<Factory> factories,
                         std::map<std::pair<FactoryId, FactoryId>, RouteLeg> edges)
    : factories_(std::move(factories)), edges_(std::move(edges)) {
  for (std::size_t i = 0; i < factories_.size(); ++i) {
    auto [it, inserted] = index_.emplace(factories_[i].id, i);
    if (!inserted) throw std::invalid_argument("duplicate factory id: " + factories_[i].id);
  }
  for (const auto& [key, leg] : edges_) {
    if (!index_.count(key.first) || !index_.count(key.second))
      throw std::invalid_argument("route edge references unknown factory: " + key.first + " -> " + key.second);
    if (leg.distance_km < 0 || leg.travel_time < 0)
      throw std::invalid_argument("negative route leg: " + key.first + " -> " + key.second);
  }
}

const Factory* RoadNetwork::factory(const FactoryId& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &factories_[it->second];
}

RouteLeg RoadNetwork::leg(const FactoryId& from, const FactoryId& to) const {
  if (!has_factory(from)) throw std::invalid_argument("unknown factory: " + from);
  if (!has_factory(to)) throw std::invalid_argument("unknown factory: " + to);
  if (from == to) return RouteLeg{0.0, 0};
  auto it = edges_.find({from, to});
  if (it == edges_.end()) throw std::invalid_argument("missing route leg: " + from + " -> " + to);
  return it->second;
}

Sec item_handling_time(Quarters item_quarters, Sec rate_seconds_per_pallet) {
  // rate * quarters/4, rounded half-up, in integer arithmetic.
  return (rate_seconds_per_pallet * item_quarters + 2) / 4;
}

std::vector<OrderItem> explode_order(const Order& order, Sec rate_seconds_per_pallet) {
  if (!order.quantity.valid())
    throw std::invalid_argument("order " + order.id + " has no cargo");
  std::vector<OrderItem> items;
  items.reserve(std::size_t(order.quantity.total_count()));
  int seq = 0;
  auto emit = [&](PalletType type, std::int32_t count) {
    for (std::int32_t i = 0; i < count; ++i) {
      OrderItem item;
      ++seq;
      char suffix[16];
      std::snprintf(suffix, sizeof suffix, "-%03d", seq);
      item.id = order.id + suffix;
      item.order_id = order.id;
      item.pallet_type = type;
      item.load_time = item_handling_time(pallet_quarters(type), rate_seconds_per_pallet);
      item.unload_time = item.load_time;
      item.status = ItemStatus::Generated;
      items.push_back(std::move(item));
    }
  };
  emit(PalletType::Standard, order.quantity.standard);
  emit(PalletType::Small, order.quantity.small);
  emit(PalletType::Box, order.quantity.box);
  return items;
}

ItemStatus order_status(const std::vector<OrderItem>& items) {
  if (items.empty()) throw std::invalid_argument("order_status over empty item list");
  ItemStatus lo = items.front().status;
  for (const auto& item : items) {
    if (item.order_id != items.front().order_id)
      throw std::invalid_argument("order_status over mixed orders");
    lo = std::min(lo, item.status);
  }
  return lo;
}

SplitVerdict split_legality(Quarters order_quarters, Quarters capacity,
                            const std::vector<Quarters>& part_quarters) {
  if (part_quarters.empty()) return SplitVerdict::Violation;
  if (order_quarters <= capacity)
    return part_quarters.size() == 1 ? SplitVerdict::Legal : SplitVerdict::Violation;
  for (Quarters part : part_quarters)
    if (part > capacity) return SplitVerdict::Violation;
  return SplitVerdict::Legal;
}

SplitVerdict split_legality(const Order& order, Quarters capacity,
                            const std::vector<std::vector<ItemId>>& proposed_parts,
                            const std::vector<OrderItem>& items) {
  std::map<ItemId, Quarters> pool;
  for (const auto& item : items) {
    if (item.order_id != order.id)
      throw std::invalid_argument("split_legality: item " + item.id + " is not from order " + order.id);
    if (!pool.emplace(item.id, item.demand_quarters()).second)
      throw std::invalid_argument("split_legality: duplicate item " + item.id);
  }
  std::set<ItemId> seen;
  std::vector<Quarters> part_quarters;
  for (const auto& part : proposed_parts) {
    if (part.empty()) throw std::invalid_argument("split_legality: empty part");
    Quarters sum = 0;
    for (const auto& id : part) {
      auto it = pool.find(id);
      if (it == pool.end())
        throw std::invalid_argument("split_legality: unknown item " + id);
      if (!seen.insert(id).second)
        throw std::invalid_argument("split_legality: item " + id + " appears in two parts");
      sum += it->second;
    }
    part_quarters.push_back(sum);
  }
  if (seen.size() != pool.size())
    throw std::invalid_argument("split_legality: parts do not cover the order");
  return split_legality(order.quantity.demand_quarters(), capacity, part_quarters);
}

}  // namespace dpdp
