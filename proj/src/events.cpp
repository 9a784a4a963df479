#include "dpdp/events.hpp"

#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "dpdp/util.hpp"

namespace dpdp {

using json = nlohmann::ordered_json;

std::string_view event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::OrderReleased: return "ORDER_RELEASED";
    case EventKind::VehicleArrived: return "VEHICLE_ARRIVED";
    case EventKind::DockAllocated: return "DOCK_ALLOCATED";
    case EventKind::ServiceDone: return "SERVICE_DONE";
    case EventKind::VehicleDeparted: return "VEHICLE_DEPARTED";
    case EventKind::ItemLoaded: return "ITEM_LOADED";
    case EventKind::ItemDelivered: return "ITEM_DELIVERED";
    case EventKind::EpochBoundary: return "EPOCH_BOUNDARY";
  }
  throw std::invalid_argument("unknown event kind");
}

EventKind event_kind_from_name(std::string_view name) {
  if (name == "ORDER_RELEASED") return EventKind::OrderReleased;
  if (name == "VEHICLE_ARRIVED") return EventKind::VehicleArrived;
  if (name == "DOCK_ALLOCATED") return EventKind::DockAllocated;
  if (name == "SERVICE_DONE") return EventKind::ServiceDone;
  if (name == "VEHICLE_DEPARTED") return EventKind::VehicleDeparted;
  if (name == "ITEM_LOADED") return EventKind::ItemLoaded;
  if (name == "ITEM_DELIVERED") return EventKind::ItemDelivered;
  if (name == "EPOCH_BOUNDARY") return EventKind::EpochBoundary;
  throw ParseError("unknown event kind: " + std::string(name));
}

std::string event_to_json_line(const SimEvent& e) {
  json j;
  j["t"] = e.t;
  j["kind"] = std::string(event_kind_name(e.kind));
  if (!e.vehicle.empty()) j["vehicle"] = e.vehicle;
  if (!e.factory.empty()) j["factory"] = e.factory;
  if (!e.item.empty()) j["item"] = e.item;
  if (!e.order.empty()) j["order"] = e.order;
  if (e.epoch >= 0) j["epoch"] = e.epoch;
  if (e.empty_stop) j["empty_stop"] = true;
  return j.dump();
}

SimEvent event_from_json_line(const std::string& line, const std::string& locus) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& ex) {
    throw ParseError(locus + ": " + ex.what());
  }
  SimEvent e;
  try {
    e.t = j.at("t").get<Sec>();
    e.kind = event_kind_from_name(j.at("kind").get<std::string>());
    if (j.contains("vehicle")) e.vehicle = j.at("vehicle").get<std::string>();
    if (j.contains("factory")) e.factory = j.at("factory").get<std::string>();
    if (j.contains("item")) e.item = j.at("item").get<std::string>();
    if (j.contains("order")) e.order = j.at("order").get<std::string>();
    if (j.contains("epoch")) e.epoch = j.at("epoch").get<std::int64_t>();
    if (j.contains("empty_stop")) e.empty_stop = j.at("empty_stop").get<bool>();
  } catch (const json::exception& ex) {
    throw ParseError(locus + ": " + ex.what());
  }
  return e;
}

std::string log_to_jsonl(const EventLog& log) {
  std::ostringstream out;
  for (const auto& e : log) out << event_to_json_line(e) << '\n';
  return out.str();
}

EventLog log_from_jsonl(const std::string& text) {
  EventLog log;
  std::size_t line_no = 0;
  for (const auto& line : split(text, '\n')) {
    ++line_no;
    if (trim(line).empty()) continue;
    log.push_back(event_from_json_line(line, "event log line " + std::to_string(line_no)));
  }
  return log;
}

void save_log(const EventLog& log, const std::filesystem::path& path) {
  write_text_file(path, log_to_jsonl(log));
}

EventLog load_log(const std::filesystem::path& path) {
  return log_from_jsonl(read_text_file(path));
}

}  // namespace dpdp
