#include "dpdp/wire.hpp"

#include <stdexcept>

#include "json.hpp"

namespace dpdp {

using json = nlohmann::ordered_json;

const char* const kVehicleInfoFile = "vehicle_info.json";
const char* const kUnallocatedItemsFile = "unallocated_order_items.json";
const char* const kOngoingItemsFile = "ongoing_order_items.json";
const char* const kOutputDestinationFile = "output_destination.json";
const char* const kOutputRouteFile = "output_route.json";

const VehicleView* PolicyView::vehicle(const VehicleId& id) const {
  for (const auto& v : vehicles)
    if (v.id == id) return &v;
  return nullptr;
}

const ItemView* PolicyView::item(const ItemId& id) const {
  for (const auto& i : unallocated_items)
    if (i.id == id) return &i;
  for (const auto& i : ongoing_items)
    if (i.id == id) return &i;
  return nullptr;
}

namespace {

std::int64_t to_unix(Sec t, const SimConfig& cfg) { return t + cfg.horizon_epoch; }
Sec from_unix(std::int64_t t, const SimConfig& cfg) { return t - cfg.horizon_epoch; }

json capacity_to_json(Quarters q) {
  if (q % 4 == 0) return json(q / 4);
  return json(quarters_to_pallets(q));
}

json stop_to_json(const Stop& s, const SimConfig& cfg) {
  json j;
  j["factory_id"] = s.factory_id;
  j["lng"] = s.lng;
  j["lat"] = s.lat;
  j["delivery_item_list"] = s.delivery_item_list;
  j["pickup_item_list"] = s.pickup_item_list;
  j["arrive_time"] = to_unix(s.arrive_time, cfg);
  j["leave_time"] = to_unix(s.leave_time, cfg);
  return j;
}

Stop stop_from_json(const json& j, const SimConfig& cfg, const std::string& locus) {
  if (!j.is_object()) throw ParseError(locus + ": stop is not an object");
  Stop s;
  try {
    s.factory_id = j.at("factory_id").get<std::string>();
    s.lng = j.at("lng").get<double>();
    s.lat = j.at("lat").get<double>();
    s.delivery_item_list = j.at("delivery_item_list").get<std::vector<std::string>>();
    s.pickup_item_list = j.at("pickup_item_list").get<std::vector<std::string>>();
    s.arrive_time = from_unix(j.at("arrive_time").get<std::int64_t>(), cfg);
    s.leave_time = from_unix(j.at("leave_time").get<std::int64_t>(), cfg);
  } catch (const json::exception& e) {
    throw ParseError(locus + ": malformed stop: " + e.what());
  }
  return s;
}

json item_to_json(const ItemView& it, const SimConfig& cfg) {
  json j;
  j["id"] = it.id;
  j["type"] = std::string(pallet_type_name(it.type));
  j["order_id"] = it.order_id;
  j["demand"] = it.demand;
  j["pickup_factory_id"] = it.pickup_factory_id;
  j["delivery_factory_id"] = it.delivery_factory_id;
  j["creation_time"] = to_unix(it.creation_time, cfg);
  j["committed_completion_time"] = to_unix(it.committed_completion_time, cfg);
  j["load_time"] = it.load_time;
  j["unload_time"] = it.unload_time;
  j["delivery_state"] = it.delivery_state;
  return j;
}

ItemView item_from_json(const json& j, const SimConfig& cfg, const std::string& locus) {
  ItemView it;
  try {
    it.id = j.at("id").get<std::string>();
    it.type = pallet_type_from_name(j.at("type").get<std::string>());
    it.order_id = j.at("order_id").get<std::string>();
    it.demand = j.at("demand").get<double>();
    it.pickup_factory_id = j.at("pickup_factory_id").get<std::string>();
    it.delivery_factory_id = j.at("delivery_factory_id").get<std::string>();
    it.creation_time = from_unix(j.at("creation_time").get<std::int64_t>(), cfg);
    it.committed_completion_time = from_unix(j.at("committed_completion_time").get<std::int64_t>(), cfg);
    it.load_time = j.at("load_time").get<Sec>();
    it.unload_time = j.at("unload_time").get<Sec>();
    it.delivery_state = j.at("delivery_state").get<int>();
  } catch (const json::exception& e) {
    throw ParseError(locus + ": malformed item: " + e.what());
  }
  return it;
}

}  // namespace

std::string vehicle_info_to_json(const PolicyView& view, const SimConfig& cfg) {
  json arr = json::array();
  for (const auto& v : view.vehicles) {
    json j;
    j["id"] = v.id;
    j["operation_time"] = v.operation_hours;
    j["capacity"] = capacity_to_json(v.capacity);
    j["update_time"] = to_unix(v.update_time, cfg);
    j["cur_factory_id"] = v.cur_factory_id;
    j["arrive_time_at_current_factory"] = to_unix(v.arrive_time_at_current_factory, cfg);
    j["leave_time_at_current_factory"] = to_unix(v.leave_time_at_current_factory, cfg);
    j["carrying_items"] = v.carrying_items;
    j["destination"] = v.destination ? stop_to_json(*v.destination, cfg) : json(nullptr);
    arr.push_back(std::move(j));
  }
  return arr.dump(2) + "\n";
}

std::string items_to_json(const std::vector<ItemView>& items, const SimConfig& cfg) {
  json arr = json::array();
  for (const auto& it : items) arr.push_back(item_to_json(it, cfg));
  return arr.dump(2) + "\n";
}

std::vector<VehicleView> vehicle_info_from_json(const std::string& text, const SimConfig& cfg) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string(kVehicleInfoFile) + ": " + e.what());
  }
  if (!arr.is_array()) throw ParseError(std::string(kVehicleInfoFile) + ": expected an array");
  std::vector<VehicleView> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& j = arr[i];
    std::string locus = std::string(kVehicleInfoFile) + "[" + std::to_string(i) + "]";
    VehicleView v;
    try {
      v.id = j.at("id").get<std::string>();
      v.operation_hours = j.at("operation_time").get<std::int32_t>();
      double cap = j.at("capacity").get<double>();
      v.capacity = Quarters(cap * 4.0);
      v.update_time = from_unix(j.at("update_time").get<std::int64_t>(), cfg);
      v.cur_factory_id = j.at("cur_factory_id").get<std::string>();
      v.arrive_time_at_current_factory =
          from_unix(j.at("arrive_time_at_current_factory").get<std::int64_t>(), cfg);
      v.leave_time_at_current_factory =
          from_unix(j.at("leave_time_at_current_factory").get<std::int64_t>(), cfg);
      v.carrying_items = j.at("carrying_items").get<std::vector<std::string>>();
      if (!j.at("destination").is_null()) v.destination = stop_from_json(j.at("destination"), cfg, locus);
    } catch (const json::exception& e) {
      throw ParseError(locus + ": " + e.what());
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<ItemView> items_from_json(const std::string& text, const SimConfig& cfg,
                                      const std::string& doc_name) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(doc_name + ": " + e.what());
  }
  if (!arr.is_array()) throw ParseError(doc_name + ": expected an array");
  std::vector<ItemView> out;
  for (std::size_t i = 0; i < arr.size(); ++i)
    out.push_back(item_from_json(arr[i], cfg, doc_name + "[" + std::to_string(i) + "]"));
  return out;
}

std::string destination_doc_to_json(const DispatchPlan& plan,
                                    const std::vector<VehicleId>& fleet_order,
                                    const SimConfig& cfg) {
  json j = json::object();
  for (const auto& vid : fleet_order) {
    const VehicleCommand* cmd = plan.command(vid);
    if (cmd && cmd->destination)
      j[vid] = stop_to_json(*cmd->destination, cfg);
    else
      j[vid] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string route_doc_to_json(const DispatchPlan& plan, const std::vector<VehicleId>& fleet_order,
                              const SimConfig& cfg) {
  json j = json::object();
  for (const auto& vid : fleet_order) {
    json arr = json::array();
    if (const VehicleCommand* cmd = plan.command(vid))
      for (const auto& s : cmd->route) arr.push_back(stop_to_json(s, cfg));
    j[vid] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

DispatchPlan dispatch_from_json(const std::string& destination_text, const std::string& route_text,
                                const SimConfig& cfg) {
  json dest, route;
  try {
    dest = json::parse(destination_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string(kOutputDestinationFile) + ": " + e.what());
  }
  try {
    route = json::parse(route_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string(kOutputRouteFile) + ": " + e.what());
  }
  if (!dest.is_object()) throw ParseError(std::string(kOutputDestinationFile) + ": expected an object");
  if (!route.is_object()) throw ParseError(std::string(kOutputRouteFile) + ": expected an object");
  DispatchPlan plan;
  for (auto it = dest.begin(); it != dest.end(); ++it) {
    VehicleCommand cmd;
    if (!it.value().is_null())
      cmd.destination = stop_from_json(it.value(), cfg,
                                       std::string(kOutputDestinationFile) + "." + it.key());
    plan.commands[it.key()] = std::move(cmd);
  }
  for (auto it = route.begin(); it != route.end(); ++it) {
    if (!it.value().is_array())
      throw ParseError(std::string(kOutputRouteFile) + "." + it.key() + ": expected an array");
    auto& cmd = plan.commands[it.key()];  // vehicle with route but no destination entry: null dest
    std::size_t idx = 0;
    for (const auto& s : it.value()) {
      cmd.route.push_back(stop_from_json(
          s, cfg, std::string(kOutputRouteFile) + "." + it.key() + "[" + std::to_string(idx) + "]"));
      ++idx;
    }
  }
  return plan;
}

void write_policy_view(const PolicyView& view, const SimConfig& cfg,
                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / kVehicleInfoFile, vehicle_info_to_json(view, cfg));
  write_text_file(dir / kUnallocatedItemsFile, items_to_json(view.unallocated_items, cfg));
  write_text_file(dir / kOngoingItemsFile, items_to_json(view.ongoing_items, cfg));
}

PolicyView read_policy_view(const std::filesystem::path& dir, const SimConfig& cfg) {
  PolicyView view;
  view.vehicles = vehicle_info_from_json(read_text_file(dir / kVehicleInfoFile), cfg);
  view.unallocated_items =
      items_from_json(read_text_file(dir / kUnallocatedItemsFile), cfg, kUnallocatedItemsFile);
  view.ongoing_items =
      items_from_json(read_text_file(dir / kOngoingItemsFile), cfg, kOngoingItemsFile);
  if (view.vehicles.empty()) throw ParseError(std::string(kVehicleInfoFile) + ": no vehicles");
  view.now = view.vehicles.front().update_time;
  return view;
}

void write_dispatch(const DispatchPlan& plan, const std::vector<VehicleId>& fleet_order,
                    const SimConfig& cfg, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / kOutputDestinationFile, destination_doc_to_json(plan, fleet_order, cfg));
  write_text_file(dir / kOutputRouteFile, route_doc_to_json(plan, fleet_order, cfg));
}

DispatchPlan read_dispatch(const std::filesystem::path& dir, const SimConfig& cfg) {
  return dispatch_from_json(read_text_file(dir / kOutputDestinationFile),
                            read_text_file(dir / kOutputRouteFile), cfg);
}

}  // namespace dpdp
