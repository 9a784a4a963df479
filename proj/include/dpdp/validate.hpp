#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "dpdp/wire.hpp"

namespace dpdp {

enum class ViolationCode {
  DestinationLocked,
  ListCommitted,
  CapacityExceeded,
  LifoViolation,
  IllegalSplit,
  UnknownId,
  DuplicateItem,
  OrphanedItem,
  MalformedRoute,
};

std::string_view violation_code_name(ViolationCode c);

struct Violation {
  ViolationCode code;
  std::string locus;  // vehicle id, order id, or "<vehicle>/stop <n>"
  std::string message;

  bool operator==(const Violation&) const = default;
};

// Everything the constraint checks need to know about the decision moment.
// Built from the same protocol-level view whether the plan came from an
// embedded policy or from external output documents.
struct VehicleCtx {
  enum class Mode {
    Idle,       // parked, may be sent anywhere
    Transit,    // destination factory locked, stop lists still mutable
    Committed,  // at a factory, stop lists frozen as generated
  };
  VehicleId id;
  Quarters capacity = 0;
  std::vector<ItemId> cargo;  // bottom -> top
  Mode mode = Mode::Idle;
  FactoryId locked_factory;                  // Transit / Committed
  std::vector<ItemId> committed_deliveries;  // Committed: full generated lists
  std::vector<ItemId> committed_pickups;
};

struct ItemCtx {
  ItemId id;
  OrderId order;
  Quarters quarters = 0;        // this item
  Quarters order_quarters = 0;  // the whole order
  FactoryId pickup;
  FactoryId delivery;
  int status = 1;  // 1 = awaiting pickup, 2 = loaded
};

struct ValidationContext {
  std::vector<VehicleCtx> vehicles;  // fleet order
  std::map<ItemId, ItemCtx> items;   // live (undelivered) items
  std::set<FactoryId> factories;

  const VehicleCtx* vehicle(const VehicleId& id) const;
};

ValidationContext make_validation_context(const PolicyView& view,
                                          const std::set<FactoryId>& factories);

// Checks every decision-time constraint; returns all violations (empty = ok).
// Pure function; does not mutate anything.
std::vector<Violation> validate_dispatch(const ValidationContext& ctx, const DispatchPlan& plan);

}  // namespace dpdp
