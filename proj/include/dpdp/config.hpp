#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "dpdp/util.hpp"

namespace dpdp {

// Which instant counts as an order's completion when accruing timeout:
// the vehicle's arrival at the delivery factory, or the end of the last
// item's unload (the default; committed times include handling).
enum class CompletionSemantics { Arrival, UnloadDone };

std::string_view completion_semantics_name(CompletionSemantics s);
CompletionSemantics completion_semantics_from_name(std::string_view name);

struct SimConfig {
  Sec epoch_length = 600;
  std::int32_t epochs_per_day = 144;
  Sec dock_approach_time = 1800;
  Sec handling_rate = 180;  // seconds per standard pallet, load and unload
  double lambda = 10000.0;  // weight of total timeout in the combined objective
  Sec dispatch_deadline = 14400;
  Sec algorithm_time_limit = 600;  // per-round decision budget
  std::uint64_t rng_seed = 0;
  CompletionSemantics completion_semantics = CompletionSemantics::UnloadDone;
  // Offset added to internal seconds to produce the Unix timestamps that
  // appear in the interaction documents.
  std::int64_t horizon_epoch = 0;
  // Optional daily work-shift window [start, end) in seconds-of-day gating
  // dock allocation and service (driving is never gated). Disabled when empty.
  std::optional<std::pair<Sec, Sec>> work_shift;

  void check() const;  // throws std::invalid_argument on bad durations

  bool operator==(const SimConfig&) const = default;
};

// config.json round-trip (instance directories carry one per instance).
std::string config_to_json(const SimConfig& c);
SimConfig config_from_json(const std::string& text);

}  // namespace dpdp
