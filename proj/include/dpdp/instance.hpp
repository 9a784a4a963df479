#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dpdp/config.hpp"
#include "dpdp/domain.hpp"

namespace dpdp {

struct Instance {
  RoadNetwork network;
  std::vector<Vehicle> fleet;
  std::vector<Order> orders;  // sorted by (creation_time, id)
  SimConfig config;

  void check() const;  // throws std::invalid_argument on invariant breaches
  const Order* order(const OrderId& id) const;

  bool operator==(const Instance&) const = default;
};

struct GeneratorParams {
  std::int32_t factory_count = 10;
  std::int32_t vehicle_count = 5;
  std::int32_t order_count = 50;
  Sec horizon = 86400;
  // Order creation times are drawn uniformly from [0, creation_span];
  // negative means "use the horizon minus the committed lead time".
  Sec creation_span = -1;
  std::int32_t capacity = 15;  // standard pallets
  Sec committed_lead_time = 14400;
  std::int32_t dock_count_min = 2;
  std::int32_t dock_count_max = 6;
  double distance_min_km = 5.0;
  double distance_max_km = 80.0;
  double speed_min_kmh = 45.0;
  double speed_max_kmh = 55.0;
  std::int32_t max_standard = 3;  // per-order quantity caps
  std::int32_t max_small = 4;
  std::int32_t max_box = 4;
  std::uint64_t seed = 0;
  SimConfig sim;  // carried into the instance (rng_seed overridden by `seed`)

  void check() const;  // throws std::invalid_argument on infeasible params
};

// Deterministic function of the seed; see GeneratorParams for knobs.
Instance generate_instance(const GeneratorParams& p);

// Tabular schema I/O. An instance directory holds orders.csv, vehicles.csv,
// routes.csv, factories.csv and config.json.
Instance parse_instance(const CsvTable& orders, const CsvTable& vehicles,
                        const CsvTable& routes, const CsvTable& factories,
                        SimConfig config);
Instance load_instance(const std::filesystem::path& dir);
void save_instance(const Instance& inst, const std::filesystem::path& dir);

}  // namespace dpdp
