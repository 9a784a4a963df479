#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "dpdp/sim.hpp"

namespace dpdp {

// Carries the previous round's plan forward against a fresh snapshot: echoes
// every live destination verbatim and keeps the not-yet-executed suffix of the
// remembered route. The result is always a valid "do nothing new" plan.
DispatchPlan reconcile_book(const DispatchPlan& book, const PolicyView& view);

// Plan cost forecast used by VNS acceptance (and exposed for benchmarks).
// Exact whenever no dock queueing occurs and no frozen stop is mid-service;
// frozen in-progress stops contribute the same constant to every candidate.
struct PlanEstimate {
  double cost = 0;           // lambda * f1 + f2 + mu * dock_overflow
  double f1 = 0;             // predicted timeout seconds (future portion)
  double f2 = 0;             // future travel km / fleet size
  double dock_overflow = 0;  // vehicle-seconds of predicted dock contention
};
struct EstimateParams {
  double lambda = -1;  // < 0: take SimConfig.lambda
  double mu = 0;       // weight of the dock-contention term
};
PlanEstimate estimate_plan_cost(const PolicyView& view, const DispatchPlan& plan,
                                const RoadNetwork& net, const SimConfig& cfg,
                                const EstimateParams& params = {});

// Stateful dispatch policy: one instance per simulation run. The book is the
// plan returned last round; a fresh-process wrapper may restore it from the
// previous round's output documents before calling decide.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual DispatchPlan decide(const Snapshot& snap) = 0;
  void set_book(DispatchPlan b) { book_ = std::move(b); }
  const DispatchPlan& book() const { return book_; }

 protected:
  DispatchPlan book_;
};

// Assigns every open order immediately: splits what exceeds the largest
// vehicle, then appends each shipment (pickup -> delivery pair, merging into
// an equal-factory mutable tail stop) to the vehicle with the least added
// travel time. Ties go to the lowest vehicle id.
class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(const Instance& inst) : inst_(&inst) {}
  DispatchPlan decide(const Snapshot& snap) override;

 private:
  const Instance* inst_;
};

struct ThresholdParams {
  Sec time_threshold = 7200;    // release when committed - now <= this
  double fill_threshold = 0.8;  // ... or held same-factory demand >= this * Q
};

// Holds orders back until a time or accumulation threshold fires, releasing
// co-located order groups as one batch; orders whose age reaches
// dispatch_deadline - epoch_length are always released, and an order whose
// pickup factory is already a vehicle's mutable tail stop hitches that ride.
class ThresholdPolicy : public Policy {
 public:
  ThresholdPolicy(const Instance& inst, const ThresholdParams& params)
      : inst_(&inst), params_(params) {}
  DispatchPlan decide(const Snapshot& snap) override;

 private:
  const Instance* inst_;
  ThresholdParams params_;
};

struct VnsConfig {
  std::int64_t max_iterations = 1000;    // improvement passes; 0 = return input
  std::int64_t max_evaluations = 200000; // candidate validations+estimates
  double time_budget = 0;                // wall seconds; 0 disables the clock
  std::vector<std::string> neighborhoods = {"INTER_ROUTE_SWAP", "INTRA_ROUTE_RELOCATE"};
  std::uint64_t rng_seed = 0;            // 0 = enumerate candidates in plan order
  double lambda = -1;                    // internal cost weight; < 0: config value
  double mu = 0;                         // dock-contention weight
};

// First-improvement descent over the uncommitted parts of the plan.
// INTER_ROUTE_SWAP transfers or exchanges pickup-delivery units between
// vehicles; INTRA_ROUTE_RELOCATE reinserts a unit at another position of its
// own route. Restarts from the first neighborhood after every accepted move;
// stops at a local optimum of all neighborhoods or at budget exhaustion.
// Throws std::invalid_argument when the initial plan fails validation.
DispatchPlan vns_improve(const PolicyView& view, const RoadNetwork& net, const SimConfig& cfg,
                         DispatchPlan initial, const VnsConfig& vcfg);

// Greedy seeding followed by vns_improve, with its own plan memory.
class VnsPolicy : public Policy {
 public:
  VnsPolicy(const Instance& inst, const VnsConfig& cfg) : inst_(&inst), cfg_(cfg) {}
  DispatchPlan decide(const Snapshot& snap) override;

 private:
  const Instance* inst_;
  VnsConfig cfg_;
};

// name: "greedy" | "threshold" | "vns" (default parameters).
std::unique_ptr<Policy> make_policy(const std::string& name, const Instance& inst);

}  // namespace dpdp
