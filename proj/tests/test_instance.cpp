#include <filesystem>
#include <stdexcept>

#include "doctest.h"
#include "dpdp/instance.hpp"
#include "helpers.hpp"

using namespace dpdp;
using dpdp::testing::TempDir;
using dpdp::testing::WorldBuilder;

namespace {

GeneratorParams small_params(std::uint64_t seed) {
  GeneratorParams p;
  p.factory_count = 4;
  p.vehicle_count = 3;
  p.order_count = 12;
  p.seed = seed;
  return p;
}

std::string slurp_dir(const std::filesystem::path& dir) {
  std::string all;
  for (const char* name :
       {"orders.csv", "vehicles.csv", "routes.csv", "factories.csv", "config.json"})
    all += read_text_file(dir / name) + "\n---\n";
  return all;
}

}  // namespace

TEST_CASE("[DERIVED] instance: generation is a pure function of the seed") {
  Instance a = generate_instance(small_params(7));
  Instance b = generate_instance(small_params(7));
  CHECK(a == b);
  Instance c = generate_instance(small_params(8));
  CHECK(a != c);

  TempDir tmp("gen_det");
  save_instance(a, tmp.path() / "a");
  save_instance(b, tmp.path() / "b");
  CHECK(slurp_dir(tmp.path() / "a") == slurp_dir(tmp.path() / "b"));
}

TEST_CASE("[DERIVED] instance: generated instances honor the requested shape") {
  GeneratorParams p = small_params(3);
  p.dock_count_min = 2;
  p.dock_count_max = 5;
  p.capacity = 15;
  Instance inst = generate_instance(p);
  CHECK(inst.network.factories().size() == 4);
  CHECK(inst.fleet.size() == 3);
  CHECK(inst.orders.size() == 12);
  CHECK(inst.config.rng_seed == 3);
  for (const auto& f : inst.network.factories()) {
    CHECK(f.dock_count >= 2);
    CHECK(f.dock_count <= 5);
  }
  for (const auto& v : inst.fleet) CHECK(v.capacity == 60);  // 15 pallets
  for (const auto& o : inst.orders) {
    CHECK(o.creation_time >= 0);
    CHECK(o.committed_completion_time == o.creation_time + p.committed_lead_time);
    CHECK(o.quantity.standard <= p.max_standard);
    CHECK(o.quantity.small <= p.max_small);
    CHECK(o.quantity.box <= p.max_box);
    CHECK(o.quantity.valid());
    CHECK(o.pickup_factory != o.delivery_factory);
  }
  for (const auto& [key, leg] : inst.network.edges()) {
    CHECK(leg.distance_km >= p.distance_min_km - 0.051);
    CHECK(leg.distance_km <= p.distance_max_km + 0.051);
    CHECK(leg.travel_time >= 1);
  }
  CHECK_THROWS_AS(generate_instance([] {
                    GeneratorParams bad;
                    bad.order_count = 0;
                    return bad;
                  }()),
                  std::invalid_argument);
  CHECK_THROWS_AS(generate_instance([] {
                    GeneratorParams bad;
                    bad.factory_count = 1;
                    return bad;
                  }()),
                  std::invalid_argument);
}

TEST_CASE("[DERIVED] instance: save/load round-trip is exact") {
  Instance inst = generate_instance(small_params(11));
  TempDir tmp("roundtrip");
  save_instance(inst, tmp.path());
  Instance back = load_instance(tmp.path());
  CHECK(back == inst);

  // Saving the reloaded instance reproduces the directory byte-for-byte.
  TempDir tmp2("roundtrip2");
  save_instance(back, tmp2.path());
  CHECK(slurp_dir(tmp.path()) == slurp_dir(tmp2.path()));
}

TEST_CASE("[DERIVED] instance: the demand column is required but recomputed") {
  Instance inst = generate_instance(small_params(5));
  TempDir tmp("demand_col");
  save_instance(inst, tmp.path());

  // Tamper with every demand cell: the loaded instance must not change.
  CsvTable orders = read_csv(tmp.path() / "orders.csv");
  int demand_col = orders.require_column("demand");
  for (auto& row : orders.rows) row[std::size_t(demand_col)] = "999.75";
  write_csv(tmp.path() / "orders.csv", orders);
  CHECK(load_instance(tmp.path()) == inst);

  // Removing the column entirely is a schema error.
  CsvTable stripped;
  stripped.path = orders.path;
  for (std::size_t c = 0; c < orders.header.size(); ++c) {
    if (int(c) == demand_col) continue;
    stripped.header.push_back(orders.header[c]);
  }
  for (const auto& row : orders.rows) {
    std::vector<std::string> out;
    for (std::size_t c = 0; c < row.size(); ++c)
      if (int(c) != demand_col) out.push_back(row[c]);
    stripped.rows.push_back(std::move(out));
  }
  write_csv(tmp.path() / "orders.csv", stripped);
  CHECK_THROWS_AS(load_instance(tmp.path()), ParseError);
}

TEST_CASE("[DERIVED] instance: committed clock earlier than creation wraps past midnight") {
  Instance inst = generate_instance(small_params(2));
  TempDir tmp("midnight");
  save_instance(inst, tmp.path());
  CsvTable orders = read_csv(tmp.path() / "orders.csv");
  auto creation = std::size_t(orders.require_column("creation_time"));
  auto committed = std::size_t(orders.require_column("committed_completion_time"));
  orders.rows[0][creation] = "23:00:00";
  orders.rows[0][committed] = "01:00:00";
  write_csv(tmp.path() / "orders.csv", orders);
  Instance back = load_instance(tmp.path());
  const OrderId oid = orders.rows[0][std::size_t(orders.require_column("order_id"))];
  const Order* o = back.order(oid);
  REQUIRE(o != nullptr);
  CHECK(o->creation_time == 82800);
  CHECK(o->committed_completion_time == 86400 + 3600);
}

TEST_CASE("[DERIVED] instance: malformed tables are rejected with the offending locus") {
  Instance inst = generate_instance(small_params(4));
  TempDir tmp("malformed");
  save_instance(inst, tmp.path());

  SUBCASE("pickup equals delivery") {
    CsvTable orders = read_csv(tmp.path() / "orders.csv");
    auto pk = std::size_t(orders.require_column("pickup_id"));
    auto dl = std::size_t(orders.require_column("delivery_id"));
    orders.rows[0][dl] = orders.rows[0][pk];
    write_csv(tmp.path() / "orders.csv", orders);
    CHECK_THROWS_AS(load_instance(tmp.path()), ParseError);
  }
  SUBCASE("unparseable creation time") {
    CsvTable orders = read_csv(tmp.path() / "orders.csv");
    auto cr = std::size_t(orders.require_column("creation_time"));
    orders.rows[1][cr] = "25:99:99";
    write_csv(tmp.path() / "orders.csv", orders);
    try {
      load_instance(tmp.path());
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("orders.csv") != std::string::npos);
    }
  }
  SUBCASE("missing route edge breaks graph completeness") {
    CsvTable routes = read_csv(tmp.path() / "routes.csv");
    routes.rows.pop_back();
    write_csv(tmp.path() / "routes.csv", routes);
    CHECK_THROWS_AS(load_instance(tmp.path()), ParseError);
  }
  SUBCASE("fractional vehicle capacity that is not a quarter multiple") {
    CsvTable vehicles = read_csv(tmp.path() / "vehicles.csv");
    auto cap = std::size_t(vehicles.require_column("capacity"));
    vehicles.rows[0][cap] = "15.1";
    write_csv(tmp.path() / "vehicles.csv", vehicles);
    CHECK_THROWS_AS(load_instance(tmp.path()), ParseError);
  }
  SUBCASE("missing file") {
    std::filesystem::remove(tmp.path() / "factories.csv");
    CHECK_THROWS_AS(load_instance(tmp.path()), ParseError);
  }
}

TEST_CASE("[DERIVED] instance: structural invariants are enforced") {
  WorldBuilder base;
  base.factory("A").factory("B").leg("A", "B", 10.0, 1000).vehicle("V1", 15);
  base.order("O1", "A", "B", 0, 7200, 1);
  CHECK_NOTHROW(base.build());

  // Same pickup and delivery factory.
  Instance bad = base.build();
  bad.orders[0].delivery_factory = "A";
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);

  // Committed before creation.
  bad = base.build();
  bad.orders[0].committed_completion_time = -1;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);

  // Vehicle without capacity.
  bad = base.build();
  bad.fleet[0].capacity = 0;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);

  // Orders out of (creation, id) order.
  bad = base.build();
  Order o2 = bad.orders[0];
  o2.id = "O0";
  o2.creation_time = 600;
  bad.orders.push_back(o2);
  bad.orders[0].creation_time = 1200;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);

  // No orders at all.
  bad = base.build();
  bad.orders.clear();
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}

TEST_CASE("[DERIVED] instance: config json round-trips every field") {
  SimConfig c;
  c.epoch_length = 300;
  c.epochs_per_day = 288;
  c.dock_approach_time = 900;
  c.handling_rate = 120;
  c.lambda = 5000.0;
  c.dispatch_deadline = 10800;
  c.algorithm_time_limit = 30;
  c.rng_seed = 42;
  c.completion_semantics = CompletionSemantics::Arrival;
  c.horizon_epoch = 1600000000;
  c.work_shift = std::make_pair<Sec, Sec>(28800, 64800);
  SimConfig back = config_from_json(config_to_json(c));
  CHECK(back == c);

  SimConfig d;  // defaults, no work shift
  CHECK(config_from_json(config_to_json(d)) == d);
  CHECK_FALSE(config_from_json(config_to_json(d)).work_shift.has_value());

  CHECK(completion_semantics_from_name("ARRIVAL") == CompletionSemantics::Arrival);
  CHECK(completion_semantics_from_name("UNLOAD_DONE") == CompletionSemantics::UnloadDone);
  CHECK_THROWS(completion_semantics_from_name("NEITHER"));

  SimConfig bad;
  bad.epoch_length = 0;
  CHECK_THROWS_AS(bad.check(), std::invalid_argument);
}
