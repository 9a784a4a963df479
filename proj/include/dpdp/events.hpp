#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dpdp/domain.hpp"

namespace dpdp {

enum class EventKind {
  OrderReleased,
  VehicleArrived,
  DockAllocated,
  ServiceDone,
  VehicleDeparted,
  ItemLoaded,
  ItemDelivered,
  EpochBoundary,
};

std::string_view event_kind_name(EventKind k);
EventKind event_kind_from_name(std::string_view name);

// Audit-trail record; unused fields stay empty / -1 and are omitted from the
// serialized form.
struct SimEvent {
  Sec t = 0;
  EventKind kind = EventKind::EpochBoundary;
  VehicleId vehicle;
  FactoryId factory;
  ItemId item;
  OrderId order;
  std::int64_t epoch = -1;     // EpochBoundary only
  bool empty_stop = false;     // VehicleDeparted: stop had no pickups/deliveries

  bool operator==(const SimEvent&) const = default;
};

using EventLog = std::vector<SimEvent>;

std::string event_to_json_line(const SimEvent& e);
SimEvent event_from_json_line(const std::string& line, const std::string& locus);

std::string log_to_jsonl(const EventLog& log);
EventLog log_from_jsonl(const std::string& text);

void save_log(const EventLog& log, const std::filesystem::path& path);
EventLog load_log(const std::filesystem::path& path);

}  // namespace dpdp
