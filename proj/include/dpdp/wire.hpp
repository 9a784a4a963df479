#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dpdp/config.hpp"
#include "dpdp/domain.hpp"

namespace dpdp {

// One planned factory visit. arrive_time/leave_time are advisory estimates;
// the engine recomputes them and never trusts plan-supplied values.
struct Stop {
  FactoryId factory_id;
  double lng = 0;
  double lat = 0;
  std::vector<ItemId> delivery_item_list;  // unloaded at this stop
  std::vector<ItemId> pickup_item_list;    // loaded at this stop
  Sec arrive_time = 0;
  Sec leave_time = 0;

  bool empty_service() const { return delivery_item_list.empty() && pickup_item_list.empty(); }
  bool operator==(const Stop&) const = default;
};

struct VehicleCommand {
  std::optional<Stop> destination;  // next stop; absent = stay parked
  std::vector<Stop> route;          // stops after the destination

  bool operator==(const VehicleCommand&) const = default;
};

struct DispatchPlan {
  std::map<VehicleId, VehicleCommand> commands;

  const VehicleCommand* command(const VehicleId& v) const {
    auto it = commands.find(v);
    return it == commands.end() ? nullptr : &it->second;
  }
  bool operator==(const DispatchPlan&) const = default;
};

// Exactly the per-item content of the order-items documents.
struct ItemView {
  ItemId id;
  PalletType type = PalletType::Standard;
  OrderId order_id;
  double demand = 0;  // the whole order's demand, standard pallets
  FactoryId pickup_factory_id;
  FactoryId delivery_factory_id;
  Sec creation_time = 0;
  Sec committed_completion_time = 0;
  Sec load_time = 0;
  Sec unload_time = 0;
  int delivery_state = 1;

  Quarters demand_quarters() const { return pallet_quarters(type); }
  bool operator==(const ItemView&) const = default;
};

// Exactly the per-vehicle content of the vehicle-info document.
struct VehicleView {
  VehicleId id;
  std::int32_t operation_hours = 24;
  Quarters capacity = 0;
  Sec update_time = 0;
  FactoryId cur_factory_id;  // "" while in transit
  Sec arrive_time_at_current_factory = 0;
  Sec leave_time_at_current_factory = 0;  // 0 while unknown (queued / parked)
  std::vector<ItemId> carrying_items;     // in the order of loading
  std::optional<Stop> destination;        // absent when parked with no plan

  bool operator==(const VehicleView&) const = default;
};

// Everything a dispatch policy may look at, embedded or over the file
// protocol: the information content of the three input documents.
struct PolicyView {
  Sec now = 0;
  std::vector<VehicleView> vehicles;         // fleet order
  std::vector<ItemView> unallocated_items;   // sorted by (creation, order, id)
  std::vector<ItemView> ongoing_items;       // same ordering

  const VehicleView* vehicle(const VehicleId& id) const;
  const ItemView* item(const ItemId& id) const;  // searches both lists
  bool operator==(const PolicyView&) const = default;
};

// Document renderers/parsers. Unix timestamps in the files equal internal
// seconds plus config.horizon_epoch.
std::string vehicle_info_to_json(const PolicyView& view, const SimConfig& cfg);
std::string items_to_json(const std::vector<ItemView>& items, const SimConfig& cfg);
std::string destination_doc_to_json(const DispatchPlan& plan,
                                    const std::vector<VehicleId>& fleet_order,
                                    const SimConfig& cfg);
std::string route_doc_to_json(const DispatchPlan& plan,
                              const std::vector<VehicleId>& fleet_order, const SimConfig& cfg);

std::vector<VehicleView> vehicle_info_from_json(const std::string& text, const SimConfig& cfg);
std::vector<ItemView> items_from_json(const std::string& text, const SimConfig& cfg,
                                      const std::string& doc_name);
// Builds the plan from both output documents; vehicles missing from the
// destination document get a null command.
DispatchPlan dispatch_from_json(const std::string& destination_text, const std::string& route_text,
                                const SimConfig& cfg);

// Interaction directory round-trips (file names are part of the protocol).
extern const char* const kVehicleInfoFile;          // vehicle_info.json
extern const char* const kUnallocatedItemsFile;     // unallocated_order_items.json
extern const char* const kOngoingItemsFile;         // ongoing_order_items.json
extern const char* const kOutputDestinationFile;    // output_destination.json
extern const char* const kOutputRouteFile;          // output_route.json

void write_policy_view(const PolicyView& view, const SimConfig& cfg,
                       const std::filesystem::path& dir);
PolicyView read_policy_view(const std::filesystem::path& dir, const SimConfig& cfg);
void write_dispatch(const DispatchPlan& plan, const std::vector<VehicleId>& fleet_order,
                    const SimConfig& cfg, const std::filesystem::path& dir);
DispatchPlan read_dispatch(const std::filesystem::path& dir, const SimConfig& cfg);

}  // namespace dpdp
