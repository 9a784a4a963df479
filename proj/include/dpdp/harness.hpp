#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "dpdp/score.hpp"
#include "dpdp/sim.hpp"
#include "dpdp/solvers.hpp"

namespace dpdp {

// Fixed, documented exit-code table (scriptability contract).
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,      // unclassified failure (e.g. engine stall cap)
  kExitUsage = 2,        // bad flags or malformed inputs at startup
  kExitDeadline = 10,    // aborted: an order sat undispatched past the deadline
  kExitTimeout = 11,     // a round exceeded the per-round wall-clock limit
  kExitValidation = 12,  // dispatch rejected by the validator / oracle mismatch
  kExitProtocol = 13,    // external process broke the file/token protocol
};

enum class RoundOutcome { Plan, Timeout, ProtocolError };

struct RoundResult {
  RoundOutcome outcome = RoundOutcome::Plan;
  DispatchPlan plan;
  std::string error;  // detail for Timeout / ProtocolError
};

// Supervises an external algorithm over the interaction-directory protocol.
// Each round the three input documents are written, the algorithm runs, and
// the round succeeds when the exact line "SUCCESS" appears on its stdout
// within the limit; the two output documents are then read back. Fresh mode
// launches the command anew every round; persistent mode keeps one process
// alive and feeds it "ROUND <k>" lines on stdin. Output documents are
// removed before round 0 only, so a fresh-mode algorithm can recover its
// own previous plan from them.
class ExternalRunner {
 public:
  ExternalRunner(std::string command, std::filesystem::path dir, const SimConfig& cfg,
                 double limit_seconds, bool persistent);
  ~ExternalRunner();
  ExternalRunner(const ExternalRunner&) = delete;
  ExternalRunner& operator=(const ExternalRunner&) = delete;

  RoundResult run_round(const PolicyView& view, std::int64_t round);

 private:
  bool spawn(std::string* error);
  void kill_child();
  bool await_token(bool* timed_out, std::string* error);

  std::string command_;
  std::filesystem::path dir_;
  SimConfig cfg_;
  double limit_;
  bool persistent_;
  int pid_ = -1;
  int child_stdout_ = -1;
  int child_stdin_ = -1;
  std::string pending_;  // partial stdout line carried across reads
};

struct HarnessResult {
  int exit_code = kExitOk;
  RunStatus sim_status = RunStatus::Running;
  ScoreReport report;  // always populated; status reflects the outcome
  EventLog log;
  std::vector<Violation> violations;  // nonempty iff kExitValidation
  std::string error;                  // human-readable detail for nonzero exits
  std::int64_t rounds = 0;
};

// Runs a full simulation with an in-process policy. A positive round limit is
// enforced after the fact (the decision cannot be pre-empted mid-call).
HarnessResult run_embedded(const Instance& inst, Policy& policy, double round_limit_seconds);

// Runs a full simulation against an external command via ExternalRunner.
HarnessResult run_external(const Instance& inst, const std::string& command,
                           const std::filesystem::path& interaction_dir,
                           double round_limit_seconds, bool persistent);

// (instance x policy) matrix of embedded runs. Data rows appear in the given
// instance-major order, then one MEAN row per policy. The epochs column is
// the deterministic runtime measure; wall_ms opts into a wall-clock column
// at the price of byte-reproducibility.
std::string run_bench(const std::vector<std::filesystem::path>& instance_dirs,
                      const std::vector<std::string>& policies, bool wall_ms);

}  // namespace dpdp
