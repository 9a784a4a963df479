#include "dpdp/instance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace dpdp {

using json = nlohmann::ordered_json;

std::string_view completion_semantics_name(CompletionSemantics s) {
  return s == CompletionSemantics::Arrival ? "ARRIVAL" : "UNLOAD_DONE";
}

CompletionSemantics completion_semantics_from_name(std::string_view name) {
  if (name == "ARRIVAL") return CompletionSemantics::Arrival;
  if (name == "UNLOAD_DONE") return CompletionSemantics::UnloadDone;
  throw ParseError("unknown completion semantics: " + std::string(name));
}

void SimConfig::check() const {
  if (epoch_length <= 0 || dock_approach_time <= 0 || handling_rate <= 0 ||
      dispatch_deadline <= 0 || algorithm_time_limit <= 0 || epochs_per_day <= 0)
    throw std::invalid_argument("sim config: all durations must be > 0");
  if (lambda < 0) throw std::invalid_argument("sim config: lambda must be >= 0");
  if (work_shift && !(work_shift->first >= 0 && work_shift->first < work_shift->second &&
                      work_shift->second <= 86400))
    throw std::invalid_argument("sim config: work shift must satisfy 0 <= start < end <= 86400");
}

std::string config_to_json(const SimConfig& c) {
  json j;
  j["epoch_length"] = c.epoch_length;
  j["epochs_per_day"] = c.epochs_per_day;
  j["dock_approach_time"] = c.dock_approach_time;
  j["handling_rate"] = c.handling_rate;
  j["lambda"] = c.lambda;
  j["dispatch_deadline"] = c.dispatch_deadline;
  j["algorithm_time_limit"] = c.algorithm_time_limit;
  j["rng_seed"] = c.rng_seed;
  j["completion_semantics"] = std::string(completion_semantics_name(c.completion_semantics));
  j["horizon_epoch"] = c.horizon_epoch;
  if (c.work_shift)
    j["work_shift"] = json::array({c.work_shift->first, c.work_shift->second});
  else
    j["work_shift"] = nullptr;
  return j.dump(2) + "\n";
}

SimConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  SimConfig c;
  try {
    c.epoch_length = j.at("epoch_length").get<Sec>();
    c.epochs_per_day = j.at("epochs_per_day").get<std::int32_t>();
    c.dock_approach_time = j.at("dock_approach_time").get<Sec>();
    c.handling_rate = j.at("handling_rate").get<Sec>();
    c.lambda = j.at("lambda").get<double>();
    c.dispatch_deadline = j.at("dispatch_deadline").get<Sec>();
    c.algorithm_time_limit = j.at("algorithm_time_limit").get<Sec>();
    c.rng_seed = j.at("rng_seed").get<std::uint64_t>();
    c.completion_semantics =
        completion_semantics_from_name(j.at("completion_semantics").get<std::string>());
    c.horizon_epoch = j.at("horizon_epoch").get<std::int64_t>();
    if (j.contains("work_shift") && !j.at("work_shift").is_null()) {
      auto w = j.at("work_shift");
      c.work_shift = {w.at(0).get<Sec>(), w.at(1).get<Sec>()};
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  c.check();
  return c;
}

void Instance::check() const {
  config.check();
  if (fleet.empty()) throw std::invalid_argument("instance: fleet is empty");
  if (orders.empty()) throw std::invalid_argument("instance: no orders");
  const auto& fs = network.factories();
  if (fs.size() < 2) throw std::invalid_argument("instance: need at least two factories");
  for (const auto& a : fs)
    for (const auto& b : fs)
      if (a.id != b.id && !network.edges().count({a.id, b.id}))
        throw std::invalid_argument("instance: incomplete graph, missing route " + a.id + " -> " + b.id);
  for (const auto& v : fleet)
    if (v.capacity <= 0) throw std::invalid_argument("instance: vehicle " + v.id + " has no capacity");
  for (const auto& o : orders) {
    if (!network.has_factory(o.pickup_factory))
      throw std::invalid_argument("instance: order " + o.id + " references unknown factory " + o.pickup_factory);
    if (!network.has_factory(o.delivery_factory))
      throw std::invalid_argument("instance: order " + o.id + " references unknown factory " + o.delivery_factory);
    if (o.pickup_factory == o.delivery_factory)
      throw std::invalid_argument("instance: order " + o.id + " picks up and delivers at the same factory");
    if (!o.quantity.valid())
      throw std::invalid_argument("instance: order " + o.id + " has no cargo");
    if (o.committed_completion_time < o.creation_time)
      throw std::invalid_argument("instance: order " + o.id + " committed before creation");
  }
  for (std::size_t i = 1; i < orders.size(); ++i) {
    const auto& a = orders[i - 1];
    const auto& b = orders[i];
    if (b.creation_time < a.creation_time ||
        (b.creation_time == a.creation_time && b.id < a.id))
      throw std::invalid_argument("instance: orders not sorted by (creation_time, id)");
  }
}

const Order* Instance::order(const OrderId& id) const {
  for (const auto& o : orders)
    if (o.id == id) return &o;
  return nullptr;
}

namespace {

std::vector<std::string> row_fields(const CsvTable& t, std::size_t row,
                                    const std::vector<std::size_t>& cols) {
  std::vector<std::string> out;
  out.reserve(cols.size());
  for (auto c : cols) out.push_back(t.rows[row][c]);
  return out;
}

}  // namespace

Instance parse_instance(const CsvTable& orders, const CsvTable& vehicles,
                        const CsvTable& routes, const CsvTable& factories,
                        SimConfig config) {
  Instance inst;
  inst.config = config;

  // Factories (Table 4 schema).
  {
    auto cols = std::vector<std::size_t>{
        std::size_t(factories.require_column("factory_id")), std::size_t(factories.require_column("longitude")),
        std::size_t(factories.require_column("latitude")), std::size_t(factories.require_column("port_num"))};
    std::vector<Factory> fs;
    for (std::size_t r = 0; r < factories.rows.size(); ++r) {
      auto f = row_fields(factories, r, cols);
      Factory fac;
      fac.id = f[0];
      fac.longitude = parse_double(f[1], factories.locus(r));
      fac.latitude = parse_double(f[2], factories.locus(r));
      fac.dock_count = std::int32_t(parse_int(f[3], factories.locus(r)));
      if (fac.id.empty()) throw ParseError(factories.locus(r) + ": empty factory_id");
      if (fac.dock_count < 1) throw ParseError(factories.locus(r) + ": port_num must be >= 1");
      fs.push_back(std::move(fac));
    }

    // Route map (Table 3 schema).
    auto rcols = std::vector<std::size_t>{
        std::size_t(routes.require_column("start_factory_id")), std::size_t(routes.require_column("end_factory_id")),
        std::size_t(routes.require_column("distance")), std::size_t(routes.require_column("time"))};
    std::map<std::pair<FactoryId, FactoryId>, RouteLeg> edges;
    std::map<FactoryId, bool> known;
    for (const auto& fac : fs) known[fac.id] = true;
    for (std::size_t r = 0; r < routes.rows.size(); ++r) {
      auto f = row_fields(routes, r, rcols);
      if (!known.count(f[0])) throw ParseError(routes.locus(r) + ": unknown factory " + f[0]);
      if (!known.count(f[1])) throw ParseError(routes.locus(r) + ": unknown factory " + f[1]);
      RouteLeg leg;
      leg.distance_km = parse_double(f[2], routes.locus(r));
      leg.travel_time = parse_int(f[3], routes.locus(r));
      if (leg.distance_km < 0 || leg.travel_time < 0)
        throw ParseError(routes.locus(r) + ": negative distance or time");
      if (!edges.emplace(std::make_pair(f[0], f[1]), leg).second)
        throw ParseError(routes.locus(r) + ": duplicate route " + f[0] + " -> " + f[1]);
    }
    for (const auto& a : fs)
      for (const auto& b : fs)
        if (a.id != b.id && !edges.count({a.id, b.id}))
          throw ParseError(routes.path + ": incomplete graph, missing route " + a.id + " -> " + b.id);
    inst.network = RoadNetwork(std::move(fs), std::move(edges));
  }

  // Fleet (Table 2 schema).
  {
    auto cols = std::vector<std::size_t>{
        std::size_t(vehicles.require_column("car_num")), std::size_t(vehicles.require_column("capacity")),
        std::size_t(vehicles.require_column("operation_time")), std::size_t(vehicles.require_column("gps_id"))};
    std::map<VehicleId, bool> seen;
    for (std::size_t r = 0; r < vehicles.rows.size(); ++r) {
      auto f = row_fields(vehicles, r, cols);
      Vehicle v;
      v.id = f[0];
      double cap = parse_double(f[1], vehicles.locus(r));
      double q = cap * 4.0;
      if (cap <= 0 || q != std::floor(q))
        throw ParseError(vehicles.locus(r) + ": capacity must be a positive multiple of 0.25");
      v.capacity = Quarters(q);
      v.operation_hours = std::int32_t(parse_int(f[2], vehicles.locus(r)));
      v.gps_id = f[3];
      if (v.id.empty()) throw ParseError(vehicles.locus(r) + ": empty car_num");
      if (!seen.emplace(v.id, true).second)
        throw ParseError(vehicles.locus(r) + ": duplicate car_num " + v.id);
      inst.fleet.push_back(std::move(v));
    }
  }

  // Orders (Table 1 schema). The demand column is derived from the quantity
  // triple and is recomputed rather than trusted.
  {
    auto cols = std::vector<std::size_t>{
        std::size_t(orders.require_column("order_id")), std::size_t(orders.require_column("q_standard")),
        std::size_t(orders.require_column("q_small")), std::size_t(orders.require_column("q_box")),
        std::size_t(orders.require_column("creation_time")), std::size_t(orders.require_column("committed_completion_time")),
        std::size_t(orders.require_column("load_time")), std::size_t(orders.require_column("unload_time")),
        std::size_t(orders.require_column("pickup_id")), std::size_t(orders.require_column("delivery_id"))};
    std::size_t(orders.require_column("demand"));
    std::map<OrderId, bool> seen;
    for (std::size_t r = 0; r < orders.rows.size(); ++r) {
      auto f = row_fields(orders, r, cols);
      Order o;
      o.id = f[0];
      o.quantity.standard = std::int32_t(parse_int(f[1], orders.locus(r)));
      o.quantity.small = std::int32_t(parse_int(f[2], orders.locus(r)));
      o.quantity.box = std::int32_t(parse_int(f[3], orders.locus(r)));
      if (o.quantity.standard < 0 || o.quantity.small < 0 || o.quantity.box < 0)
        throw ParseError(orders.locus(r) + ": negative quantity");
      if (!o.quantity.valid()) throw ParseError(orders.locus(r) + ": order has no cargo");
      o.creation_time = parse_hms(f[4], orders.locus(r));
      Sec committed = parse_hms(f[5], orders.locus(r));
      // The schema carries time-of-day only; a committed clock earlier than
      // creation means the deadline crosses midnight.
      if (committed < o.creation_time) committed += 86400;
      o.committed_completion_time = committed;
      o.load_time = parse_int(f[6], orders.locus(r));
      o.unload_time = parse_int(f[7], orders.locus(r));
      o.pickup_factory = f[8];
      o.delivery_factory = f[9];
      if (o.id.empty()) throw ParseError(orders.locus(r) + ": empty order_id");
      if (!seen.emplace(o.id, true).second)
        throw ParseError(orders.locus(r) + ": duplicate order_id " + o.id);
      if (!inst.network.has_factory(o.pickup_factory))
        throw ParseError(orders.locus(r) + ": unknown factory " + o.pickup_factory);
      if (!inst.network.has_factory(o.delivery_factory))
        throw ParseError(orders.locus(r) + ": unknown factory " + o.delivery_factory);
      if (o.pickup_factory == o.delivery_factory)
        throw ParseError(orders.locus(r) + ": pickup and delivery factory are the same");
      inst.orders.push_back(std::move(o));
    }
  }
  std::stable_sort(inst.orders.begin(), inst.orders.end(), [](const Order& a, const Order& b) {
    return a.creation_time != b.creation_time ? a.creation_time < b.creation_time : a.id < b.id;
  });
  inst.check();
  return inst;
}

Instance load_instance(const std::filesystem::path& dir) {
  SimConfig config = config_from_json(read_text_file(dir / "config.json"));
  return parse_instance(read_csv(dir / "orders.csv"), read_csv(dir / "vehicles.csv"),
                        read_csv(dir / "routes.csv"), read_csv(dir / "factories.csv"), config);
}

void save_instance(const Instance& inst, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  CsvTable orders;
  orders.header = {"order_id", "q_standard", "q_small", "q_box", "demand",
                   "creation_time", "committed_completion_time", "load_time",
                   "unload_time", "pickup_id", "delivery_id"};
  for (const auto& o : inst.orders) {
    if (o.creation_time < 0 || o.creation_time >= 86400)
      throw std::invalid_argument("save_instance: creation_time of order " + o.id +
                                  " does not fit the time-of-day schema");
    orders.rows.push_back({o.id, std::to_string(o.quantity.standard),
                           std::to_string(o.quantity.small), std::to_string(o.quantity.box),
                           format_double(o.quantity.demand()), format_hms(o.creation_time),
                           format_hms(o.committed_completion_time % 86400),
                           std::to_string(o.load_time), std::to_string(o.unload_time),
                           o.pickup_factory, o.delivery_factory});
  }
  write_csv(dir / "orders.csv", orders);

  CsvTable vehicles;
  vehicles.header = {"car_num", "capacity", "operation_time", "gps_id"};
  for (const auto& v : inst.fleet)
    vehicles.rows.push_back({v.id, format_double(quarters_to_pallets(v.capacity)),
                             std::to_string(v.operation_hours), v.gps_id});
  write_csv(dir / "vehicles.csv", vehicles);

  CsvTable routes;
  routes.header = {"route_code", "start_factory_id", "end_factory_id", "distance", "time"};
  int seq = 0;
  for (const auto& [key, leg] : inst.network.edges()) {
    char code[16];
    std::snprintf(code, sizeof code, "R%06d", ++seq);
    routes.rows.push_back({code, key.first, key.second, format_double(leg.distance_km),
                           std::to_string(leg.travel_time)});
  }
  write_csv(dir / "routes.csv", routes);

  CsvTable factories;
  factories.header = {"factory_id", "longitude", "latitude", "port_num"};
  for (const auto& f : inst.network.factories())
    factories.rows.push_back({f.id, format_double(f.longitude), format_double(f.latitude),
                              std::to_string(f.dock_count)});
  write_csv(dir / "factories.csv", factories);

  write_text_file(dir / "config.json", config_to_json(inst.config));
}

void GeneratorParams::check() const {
  if (factory_count < 2) throw std::invalid_argument("generator: need at least two factories");
  if (vehicle_count < 1) throw std::invalid_argument("generator: need at least one vehicle");
  if (order_count < 1) throw std::invalid_argument("generator: need at least one order");
  if (capacity < 1) throw std::invalid_argument("generator: capacity must be >= 1");
  if (horizon <= 0) throw std::invalid_argument("generator: horizon must be > 0");
  if (committed_lead_time <= 0 || committed_lead_time >= 86400)
    throw std::invalid_argument("generator: committed lead time must be in (0, 86400)");
  if (creation_span >= 86400 || (creation_span < 0 && horizon > 86400))
    throw std::invalid_argument("generator: creation times must fall within one day");
  if (dock_count_min < 1 || dock_count_max < dock_count_min)
    throw std::invalid_argument("generator: bad dock count range");
  if (distance_min_km <= 0 || distance_max_km < distance_min_km)
    throw std::invalid_argument("generator: bad distance range");
  if (speed_min_kmh <= 0 || speed_max_kmh < speed_min_kmh)
    throw std::invalid_argument("generator: bad speed range");
  if (max_standard < 0 || max_small < 0 || max_box < 0)
    throw std::invalid_argument("generator: negative quantity caps");
}

Instance generate_instance(const GeneratorParams& p) {
  p.check();
  std::mt19937_64 rng(p.seed);
  auto uniform_int = [&rng](std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
  };
  auto uniform_real = [&rng](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  Instance inst;
  inst.config = p.sim;
  inst.config.rng_seed = p.seed;

  // Factories: opaque display coordinates plus hidden plane positions that
  // drive a metric (triangle-respecting) distance matrix.
  const int M = p.factory_count;
  std::vector<Factory> fs;
  fs.resize(std::size_t(M));
  std::vector<std::pair<double, double>> plane;
  plane.resize(std::size_t(M));
  for (int i = 0; i < M; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "F%04d", i + 1);
    fs[std::size_t(i)].id = id;
    fs[std::size_t(i)].longitude = std::round(uniform_real(116.0, 117.0) * 10000.0) / 10000.0;
    fs[std::size_t(i)].latitude = std::round(uniform_real(40.0, 41.0) * 10000.0) / 10000.0;
    fs[std::size_t(i)].dock_count = std::int32_t(uniform_int(p.dock_count_min, p.dock_count_max));
    plane[std::size_t(i)] = {uniform_real(0.0, 1.0), uniform_real(0.0, 1.0)};
  }
  double raw_min = 1e300, raw_max = 0.0;
  std::vector<std::vector<double>> raw(std::size_t(M), std::vector<double>(std::size_t(M), 0.0));
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      double dx = plane[std::size_t(i)].first - plane[std::size_t(j)].first;
      double dy = plane[std::size_t(i)].second - plane[std::size_t(j)].second;
      double d = std::sqrt(dx * dx + dy * dy);
      raw[std::size_t(i)][std::size_t(j)] = raw[std::size_t(j)][std::size_t(i)] = d;
      raw_min = std::min(raw_min, d);
      raw_max = std::max(raw_max, d);
    }
  // Affine map of raw distances into [distance_min, distance_max]; the
  // positive offset keeps the triangle inequality intact.
  double scale = 0.0, offset = (p.distance_min_km + p.distance_max_km) / 2.0;
  if (raw_max > raw_min) {
    scale = (p.distance_max_km - p.distance_min_km) / (raw_max - raw_min);
    offset = p.distance_min_km - scale * raw_min;
  }
  std::map<std::pair<FactoryId, FactoryId>, RouteLeg> edges;
  for (int i = 0; i < M; ++i)
    for (int j = i + 1; j < M; ++j) {
      double km = std::round((scale * raw[std::size_t(i)][std::size_t(j)] + offset) * 10.0) / 10.0;
      Sec t_ij = std::max<Sec>(1, Sec(std::llround(3600.0 * km / uniform_real(p.speed_min_kmh, p.speed_max_kmh))));
      Sec t_ji = std::max<Sec>(1, Sec(std::llround(3600.0 * km / uniform_real(p.speed_min_kmh, p.speed_max_kmh))));
      edges[{fs[std::size_t(i)].id, fs[std::size_t(j)].id}] = {km, t_ij};
      edges[{fs[std::size_t(j)].id, fs[std::size_t(i)].id}] = {km, t_ji};
    }
  inst.network = RoadNetwork(fs, std::move(edges));

  for (int k = 0; k < p.vehicle_count; ++k) {
    Vehicle v;
    v.id = "V_" + std::to_string(k + 1);
    v.capacity = Quarters(4 * p.capacity);
    v.operation_hours = 24;
    v.gps_id = "G_" + std::to_string(k + 1);
    inst.fleet.push_back(std::move(v));
  }

  Sec span = p.creation_span >= 0 ? p.creation_span
                                  : std::max<Sec>(0, p.horizon - p.committed_lead_time);
  struct Draft {
    Sec creation;
    PalletQuantity q;
    int pickup;
    int delivery;
  };
  std::vector<Draft> drafts;
  drafts.reserve(std::size_t(p.order_count));
  for (int i = 0; i < p.order_count; ++i) {
    Draft d;
    d.creation = uniform_int(0, span);
    d.q.standard = std::int32_t(uniform_int(0, p.max_standard));
    d.q.small = std::int32_t(uniform_int(0, p.max_small));
    d.q.box = std::int32_t(uniform_int(0, p.max_box));
    if (d.q.total_count() == 0) d.q.box = 1;
    d.pickup = int(uniform_int(0, M - 1));
    d.delivery = int((d.pickup + 1 + uniform_int(0, M - 2)) % M);
    drafts.push_back(d);
  }
  std::stable_sort(drafts.begin(), drafts.end(),
                   [](const Draft& a, const Draft& b) { return a.creation < b.creation; });
  Sec prev_creation = -1;
  int seq = 0;
  for (const auto& d : drafts) {
    seq = d.creation == prev_creation ? seq + 1 : 1;
    prev_creation = d.creation;
    Order o;
    char id[24];
    Sec tod = d.creation % 86400;
    std::snprintf(id, sizeof id, "%02d%02d%02d%04d", int(tod / 3600), int(tod / 60 % 60),
                  int(tod % 60), seq);
    o.id = id;
    o.quantity = d.q;
    o.creation_time = d.creation;
    o.committed_completion_time = d.creation + p.committed_lead_time;
    o.load_time = item_handling_time(d.q.demand_quarters(), inst.config.handling_rate);
    o.unload_time = o.load_time;
    o.pickup_factory = fs[std::size_t(d.pickup)].id;
    o.delivery_factory = fs[std::size_t(d.delivery)].id;
    inst.orders.push_back(std::move(o));
  }
  inst.check();
  return inst;
}

}  // namespace dpdp
