#pragma once

#include <map>
#include <string>
#include <vector>

#include "dpdp/config.hpp"
#include "dpdp/events.hpp"
#include "dpdp/instance.hpp"

namespace dpdp {

enum class RunStatus { Running, Finished, DeadlineAborted, Stalled };

std::string_view run_status_name(RunStatus s);

struct ScoreReport {
  std::string status;  // FINISHED / ABORTED_DISPATCH_DEADLINE / ABORTED_STALLED / INCOMPLETE
  Sec f1 = 0;          // total order timeout, seconds
  double f2 = 0;       // mean per-vehicle distance, km
  double lambda = 0;
  double f = 0;  // lambda * f1 + f2
  std::int64_t orders_completed = 0;
  std::int64_t orders_total = 0;
  std::map<OrderId, Sec> per_order_timeout;        // completed orders only
  std::map<VehicleId, double> per_vehicle_distance;  // whole fleet

  bool operator==(const ScoreReport&) const = default;
};

// Assembles a report from engine-tracked completion times and distances.
// Summation runs in instance order / fleet order so that the replay scorer
// can reproduce the exact same floating-point results.
ScoreReport make_score_report(const std::string& status,
                              const std::map<OrderId, Sec>& completion,
                              const std::map<VehicleId, double>& distance,
                              const Instance& inst);

// Independent oracle: recomputes the report from the raw event log alone
// (shadow stacks, separate time accounting). Equals the engine report
// field-for-field on finished runs; status is FINISHED or INCOMPLETE.
ScoreReport replay_score(const EventLog& log, const Instance& inst);

// Invariant suite over a log: LIFO pops, capacity, dock occupancy, item
// lifecycle, monotone time, exact transit durations, service durations and
// release times. Returns human-readable problems; empty means the log is
// internally consistent with the instance.
std::vector<std::string> verify_event_log(const EventLog& log, const Instance& inst);

std::string report_to_json(const ScoreReport& r);
ScoreReport report_from_json(const std::string& text);

// Field-for-field equality except the status string (used when comparing a
// replay against a persisted report that may carry an abort status).
bool reports_equal_ignoring_status(const ScoreReport& a, const ScoreReport& b);

}  // namespace dpdp
