#include <cstdint>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "dpdp/harness.hpp"
#include "dpdp/instance.hpp"
#include "dpdp/score.hpp"
#include "dpdp/solvers.hpp"
#include "dpdp/util.hpp"
#include "dpdp/wire.hpp"

namespace {

using namespace dpdp;

// Simulation-parameter overrides shared by several subcommands; only flags
// the user actually set are copied onto the instance configuration.
struct SimFlags {
  CLI::App* sub = nullptr;
  std::uint64_t seed = 0;
  Sec epoch_length = 600;
  double lambda = 10000.0;
  Sec dock_approach = 1800;
  Sec deadline = 14400;
  std::string completion;
  std::int64_t horizon_epoch = 0;
  Sec shift_start = 0;
  Sec shift_end = 0;

  void add(CLI::App* s) {
    sub = s;
    s->add_option("--seed", seed, "Simulation RNG seed (vehicle placement, tie-breaking)");
    s->add_option("--epoch-length", epoch_length, "Decision epoch length, seconds");
    s->add_option("--lambda", lambda, "Weight of total timeout in the combined objective");
    s->add_option("--dock-approach", dock_approach, "Dock approaching time, seconds");
    s->add_option("--deadline", deadline, "Dispatch deadline, seconds");
    s->add_option("--completion", completion, "Completion semantics: ARRIVAL or UNLOAD_DONE")
        ->check(CLI::IsMember({"ARRIVAL", "UNLOAD_DONE"}));
    s->add_option("--horizon-epoch", horizon_epoch,
                  "Unix-timestamp offset used in interaction documents");
    s->add_option("--shift-start", shift_start, "Work shift opening, seconds of day");
    s->add_option("--shift-end", shift_end, "Work shift closing, seconds of day");
  }

  void apply(SimConfig& cfg) const {
    if (sub->count("--seed")) cfg.rng_seed = seed;
    if (sub->count("--epoch-length")) cfg.epoch_length = epoch_length;
    if (sub->count("--lambda")) cfg.lambda = lambda;
    if (sub->count("--dock-approach")) cfg.dock_approach_time = dock_approach;
    if (sub->count("--deadline")) cfg.dispatch_deadline = deadline;
    if (sub->count("--completion"))
      cfg.completion_semantics = completion_semantics_from_name(completion);
    if (sub->count("--horizon-epoch")) cfg.horizon_epoch = horizon_epoch;
    if (sub->count("--shift-start") || sub->count("--shift-end")) {
      if (!sub->count("--shift-start") || !sub->count("--shift-end"))
        throw CLI::ValidationError("--shift-start and --shift-end must be given together");
      cfg.work_shift = std::make_pair(shift_start, shift_end);
    }
    cfg.check();
  }
};

// Embedded-policy selection and parameters.
struct PolicyFlags {
  std::string policy = "greedy";
  Sec time_threshold = 7200;
  double fill_threshold = 0.8;
  std::int64_t vns_iterations = 1000;
  std::int64_t vns_evals = 200000;
  double vns_time = 0;
  std::uint64_t vns_seed = 0;
  double vns_mu = 0;
  std::string vns_neighborhoods;

  CLI::Option* add(CLI::App* s) {
    CLI::Option* p = s->add_option("--policy", policy, "Embedded policy")
                         ->check(CLI::IsMember({"greedy", "threshold", "vns"}))
                         ->capture_default_str();
    s->add_option("--time-threshold", time_threshold,
                  "threshold: release when committed time is this close, seconds");
    s->add_option("--fill-threshold", fill_threshold,
                  "threshold: release a factory when held demand reaches this fleet-max share");
    s->add_option("--vns-iterations", vns_iterations, "vns: improvement passes (0 = seed only)");
    s->add_option("--vns-evals", vns_evals, "vns: candidate evaluation budget");
    s->add_option("--vns-time", vns_time, "vns: wall-clock budget per round, seconds (0 = off)");
    s->add_option("--vns-seed", vns_seed, "vns: shuffle seed (0 = deterministic order)");
    s->add_option("--vns-mu", vns_mu, "vns: dock-contention weight in the internal cost");
    s->add_option("--vns-neighborhoods", vns_neighborhoods,
                  "vns: comma-separated neighborhood order");
    return p;
  }

  std::unique_ptr<Policy> build(const Instance& inst) const {
    if (policy == "threshold") {
      ThresholdParams p;
      p.time_threshold = time_threshold;
      p.fill_threshold = fill_threshold;
      return std::make_unique<ThresholdPolicy>(inst, p);
    }
    if (policy == "vns") {
      VnsConfig c;
      c.max_iterations = vns_iterations;
      c.max_evaluations = vns_evals;
      c.time_budget = vns_time;
      c.rng_seed = vns_seed;
      c.mu = vns_mu;
      if (!vns_neighborhoods.empty()) {
        c.neighborhoods.clear();
        for (const auto& n : split(vns_neighborhoods, ','))
          c.neighborhoods.push_back(std::string(trim(n)));
      }
      return std::make_unique<VnsPolicy>(inst, c);
    }
    return std::make_unique<GreedyPolicy>(inst);
  }
};

std::string report_with_violations(const HarnessResult& hr) {
  std::string text = report_to_json(hr.report);
  if (hr.violations.empty()) return text;
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(text);
  auto arr = nlohmann::ordered_json::array();
  for (const auto& v : hr.violations) {
    nlohmann::ordered_json jv;
    jv["code"] = std::string(violation_code_name(v.code));
    jv["locus"] = v.locus;
    jv["message"] = v.message;
    arr.push_back(std::move(jv));
  }
  j["violations"] = std::move(arr);
  return j.dump(2) + "\n";
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty())
    std::cout << text;
  else
    write_text_file(path, text);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpdp: dynamic pickup-and-delivery benchmark toolkit"};
  app.require_subcommand(1);
  int rc = kExitOk;

  // ---- generate ----------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "Generate a random instance directory");
  struct {
    std::string out;
    GeneratorParams p;
  } g;
  gen->add_option("--out", g.out, "Instance directory to write")->required();
  gen->add_option("--factories", g.p.factory_count, "Number of factories");
  gen->add_option("--vehicles", g.p.vehicle_count, "Fleet size");
  gen->add_option("--orders", g.p.order_count, "Number of orders");
  gen->add_option("--horizon", g.p.horizon, "Planning horizon, seconds");
  gen->add_option("--creation-span", g.p.creation_span,
                  "Order creation times span [0, s] (negative: horizon minus lead)");
  gen->add_option("--capacity", g.p.capacity, "Vehicle capacity, standard pallets");
  gen->add_option("--lead", g.p.committed_lead_time, "Committed lead time, seconds");
  gen->add_option("--docks-min", g.p.dock_count_min, "Minimum docks per factory");
  gen->add_option("--docks-max", g.p.dock_count_max, "Maximum docks per factory");
  gen->add_option("--dist-min", g.p.distance_min_km, "Minimum leg distance, km");
  gen->add_option("--dist-max", g.p.distance_max_km, "Maximum leg distance, km");
  gen->add_option("--speed-min", g.p.speed_min_kmh, "Minimum leg speed, km/h");
  gen->add_option("--speed-max", g.p.speed_max_kmh, "Maximum leg speed, km/h");
  gen->add_option("--max-standard", g.p.max_standard, "Per-order standard pallet cap");
  gen->add_option("--max-small", g.p.max_small, "Per-order small pallet cap");
  gen->add_option("--max-box", g.p.max_box, "Per-order box cap");
  gen->add_option("--gen-seed", g.p.seed, "Generator seed");
  SimFlags gen_sim;
  gen_sim.add(gen);
  gen->callback([&] {
    gen_sim.apply(g.p.sim);
    g.p.check();
    Instance inst = generate_instance(g.p);
    save_instance(inst, g.out);
    std::cout << "wrote " << g.out << ": " << inst.network.factories().size() << " factories, "
              << inst.fleet.size() << " vehicles, " << inst.orders.size() << " orders\n";
  });

  // ---- validate ----------------------------------------------------------
  auto* val = app.add_subcommand("validate", "Check an instance directory's files");
  struct {
    std::string instance;
  } v;
  val->add_option("--instance", v.instance, "Instance directory")->required();
  val->callback([&] {
    try {
      Instance inst = load_instance(v.instance);
      inst.check();
      std::cout << "ok: " << inst.network.factories().size() << " factories, "
                << inst.fleet.size() << " vehicles, " << inst.orders.size() << " orders\n";
    } catch (const std::exception& e) {
      std::cerr << "invalid instance: " << e.what() << "\n";
      rc = kExitValidation;
    }
  });

  // ---- simulate ----------------------------------------------------------
  auto* sim = app.add_subcommand("simulate", "Run a full simulated horizon");
  struct {
    std::string instance;
    std::string external;
    bool persistent = false;
    std::string interaction = "interaction";
    double limit = 600.0;
    std::string report;
    std::string log;
  } s;
  sim->add_option("--instance", s.instance, "Instance directory")->required();
  PolicyFlags sim_pol;
  CLI::Option* pol_opt = sim_pol.add(sim);
  CLI::Option* ext_opt =
      sim->add_option("--external", s.external,
                      "External algorithm command (file protocol) instead of an embedded policy");
  pol_opt->excludes(ext_opt);
  sim->add_flag("--persistent", s.persistent,
                "Keep one external process alive across rounds (ROUND lines on stdin)");
  sim->add_option("--interaction", s.interaction, "Interaction directory for the file protocol")
      ->envname("DPDP_INTERACTION_DIR")
      ->capture_default_str();
  sim->add_option("--limit", s.limit, "Per-round wall-clock limit, seconds")
      ->capture_default_str();
  sim->add_option("--report", s.report, "Write the score report here (default: stdout)");
  sim->add_option("--log", s.log, "Write the event log here (JSON lines)");
  SimFlags sim_sim;
  sim_sim.add(sim);
  sim->callback([&] {
    Instance inst = load_instance(s.instance);
    sim_sim.apply(inst.config);
    HarnessResult hr;
    if (!s.external.empty()) {
      hr = run_external(inst, s.external, s.interaction, s.limit, s.persistent);
    } else {
      auto pol = sim_pol.build(inst);
      hr = run_embedded(inst, *pol, s.limit);
    }
    emit(report_with_violations(hr), s.report);
    if (!s.log.empty()) save_log(hr.log, s.log);
    if (!s.report.empty())
      std::cout << "status=" << hr.report.status << " f=" << format_double(hr.report.f)
                << " rounds=" << hr.rounds << " exit=" << hr.exit_code << "\n";
    if (hr.exit_code != kExitOk && !hr.error.empty()) std::cerr << "dpdp: " << hr.error << "\n";
    for (const auto& viol : hr.violations)
      std::cerr << violation_code_name(viol.code) << " " << viol.locus << ": " << viol.message
                << "\n";
    rc = hr.exit_code;
  });

  // ---- score -------------------------------------------------------------
  auto* sco = app.add_subcommand("score", "Recompute a score report from an event log");
  struct {
    std::string log;
    std::string instance;
    double lambda = 10000.0;
    std::string out;
    std::string expect;
  } c;
  sco->add_option("--log", c.log, "Event log file (JSON lines)")->required();
  sco->add_option("--instance", c.instance, "Instance directory")->required();
  CLI::Option* lam_opt = sco->add_option("--lambda", c.lambda, "Override the objective weight");
  sco->add_option("--out", c.out, "Write the report here (default: stdout)");
  sco->add_option("--expect", c.expect,
                  "Compare against this report (status ignored); mismatch exits nonzero");
  sco->callback([&] {
    Instance inst = load_instance(c.instance);
    if (*lam_opt) inst.config.lambda = c.lambda;
    EventLog log = load_log(c.log);
    auto problems = verify_event_log(log, inst);
    if (!problems.empty()) {
      for (const auto& p : problems) std::cerr << "log inconsistency: " << p << "\n";
      rc = kExitValidation;
      return;
    }
    ScoreReport rep = replay_score(log, inst);
    emit(report_to_json(rep), c.out);
    if (!c.expect.empty()) {
      ScoreReport expect = report_from_json(read_text_file(c.expect));
      if (!reports_equal_ignoring_status(rep, expect)) {
        std::cerr << "score mismatch: replay disagrees with " << c.expect << "\n";
        rc = kExitValidation;
      }
    }
  });

  // ---- bench -------------------------------------------------------------
  auto* ben = app.add_subcommand("bench", "Run an instance x policy matrix");
  struct {
    std::vector<std::string> instances;
    std::vector<std::string> policies{"greedy", "threshold", "vns"};
    std::string out;
    bool wall = false;
  } b;
  ben->add_option("--instance", b.instances, "Instance directory (repeatable)")->required();
  ben->add_option("--policy", b.policies, "Embedded policy (repeatable)")
      ->check(CLI::IsMember({"greedy", "threshold", "vns"}));
  ben->add_option("--out", b.out, "Write the CSV here (default: stdout)");
  ben->add_flag("--wall", b.wall, "Add a wall-clock column (breaks byte-reproducibility)");
  ben->callback([&] {
    std::vector<std::filesystem::path> dirs(b.instances.begin(), b.instances.end());
    emit(run_bench(dirs, b.policies, b.wall), b.out);
  });

  // ---- solve-round -------------------------------------------------------
  auto* sol = app.add_subcommand(
      "solve-round", "One round of an embedded policy over the file protocol (external mode)");
  struct {
    std::string instance;
    std::string interaction = "interaction";
  } r;
  sol->add_option("--instance", r.instance, "Instance directory")->required();
  sol->add_option("--interaction", r.interaction, "Interaction directory")
      ->envname("DPDP_INTERACTION_DIR")
      ->capture_default_str();
  PolicyFlags sol_pol;
  sol_pol.add(sol);
  SimFlags sol_sim;
  sol_sim.add(sol);
  sol->callback([&] {
    try {
      Instance inst = load_instance(r.instance);
      sol_sim.apply(inst.config);
      const std::filesystem::path dir = r.interaction;
      Snapshot snap;
      snap.view = read_policy_view(dir, inst.config);
      snap.now = snap.view.now;
      snap.epoch_index = inst.config.epoch_length > 0 ? snap.now / inst.config.epoch_length : 0;
      auto pol = sol_pol.build(inst);
      // The previous round's output documents are this process's plan memory.
      if (std::filesystem::exists(dir / kOutputDestinationFile) &&
          std::filesystem::exists(dir / kOutputRouteFile))
        pol->set_book(read_dispatch(dir, inst.config));
      DispatchPlan plan = pol->decide(snap);
      std::vector<VehicleId> fleet;
      for (const auto& veh : inst.fleet) fleet.push_back(veh.id);
      write_dispatch(plan, fleet, inst.config, dir);
      std::cout << "SUCCESS" << std::endl;
    } catch (const std::exception& e) {
      std::cerr << "solve-round: " << e.what() << "\n";
      rc = kExitProtocol;
    }
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "dpdp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "dpdp: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "dpdp: " << e.what() << "\n";
    return kExitFailure;
  }
  return rc;
}
