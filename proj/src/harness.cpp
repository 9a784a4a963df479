#include "dpdp/harness.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "dpdp/util.hpp"
#include "dpdp/wire.hpp"

namespace dpdp {

ExternalRunner::ExternalRunner(std::string command, std::filesystem::path dir,
                               const SimConfig& cfg, double limit_seconds, bool persistent)
    : command_(std::move(command)),
      dir_(std::filesystem::absolute(dir)),
      cfg_(cfg),
      limit_(limit_seconds),
      persistent_(persistent) {
  if (limit_ <= 0) throw std::invalid_argument("per-round limit must be positive");
}

ExternalRunner::~ExternalRunner() { kill_child(); }

bool ExternalRunner::spawn(std::string* error) {
  ::signal(SIGPIPE, SIG_IGN);  // dead children surface as write errors instead
  int outp[2] = {-1, -1};
  int inp[2] = {-1, -1};
  if (::pipe(outp) != 0) {
    *error = std::string("pipe: ") + std::strerror(errno);
    return false;
  }
  if (persistent_ && ::pipe(inp) != 0) {
    *error = std::string("pipe: ") + std::strerror(errno);
    ::close(outp[0]);
    ::close(outp[1]);
    return false;
  }
  const pid_t pid = ::fork();
  if (pid < 0) {
    *error = std::string("fork: ") + std::strerror(errno);
    ::close(outp[0]);
    ::close(outp[1]);
    if (persistent_) {
      ::close(inp[0]);
      ::close(inp[1]);
    }
    return false;
  }
  if (pid == 0) {
    ::setpgid(0, 0);  // own process group so the whole command tree is killable
    if (persistent_) {
      ::dup2(inp[0], 0);
    } else {
      int devnull = ::open("/dev/null", O_RDONLY);
      if (devnull >= 0) ::dup2(devnull, 0);
      if (devnull > 2) ::close(devnull);
    }
    ::dup2(outp[1], 1);
    ::close(outp[0]);
    ::close(outp[1]);
    if (persistent_) {
      ::close(inp[0]);
      ::close(inp[1]);
    }
    if (::chdir(dir_.c_str()) != 0) _exit(126);
    ::setenv("DPDP_INTERACTION_DIR", dir_.c_str(), 1);
    ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
    _exit(127);
  }
  pid_ = pid;
  ::close(outp[1]);
  child_stdout_ = outp[0];
  if (persistent_) {
    ::close(inp[0]);
    child_stdin_ = inp[1];
  }
  return true;
}

void ExternalRunner::kill_child() {
  if (pid_ > 0) {
    ::kill(-pid_, SIGKILL);
    ::kill(pid_, SIGKILL);
    int st = 0;
    ::waitpid(pid_, &st, 0);
    pid_ = -1;
  }
  if (child_stdout_ >= 0) {
    ::close(child_stdout_);
    child_stdout_ = -1;
  }
  if (child_stdin_ >= 0) {
    ::close(child_stdin_);
    child_stdin_ = -1;
  }
}

bool ExternalRunner::await_token(bool* timed_out, std::string* error) {
  *timed_out = false;
  const auto deadline = std::chrono::steady_clock::now() +
                        std::chrono::duration<double>(limit_);
  auto take_line = [&](std::string* line) {
    const auto nl = pending_.find('\n');
    if (nl == std::string::npos) return false;
    *line = pending_.substr(0, nl);
    pending_.erase(0, nl + 1);
    if (!line->empty() && line->back() == '\r') line->pop_back();
    return true;
  };
  std::string line;
  for (;;) {
    while (take_line(&line))
      if (line == "SUCCESS") return true;
    const auto now = std::chrono::steady_clock::now();
    if (now >= deadline) {
      *timed_out = true;
      return false;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
    struct pollfd pfd = {child_stdout_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, int(left.count()) + 1);
    if (pr < 0) {
      if (errno == EINTR) continue;
      *error = std::string("poll: ") + std::strerror(errno);
      return false;
    }
    if (pr == 0) {
      *timed_out = true;
      return false;
    }
    char buf[4096];
    const ssize_t n = ::read(child_stdout_, buf, sizeof buf);
    if (n > 0) {
      pending_.append(buf, std::size_t(n));
    } else if (n == 0) {
      // EOF: the process closed stdout; accept a final unterminated token.
      while (take_line(&line))
        if (line == "SUCCESS") return true;
      if (pending_ == "SUCCESS") {
        pending_.clear();
        return true;
      }
      *error = "process exited without printing SUCCESS";
      return false;
    } else if (errno != EINTR) {
      *error = std::string("read: ") + std::strerror(errno);
      return false;
    }
  }
}

RoundResult ExternalRunner::run_round(const PolicyView& view, std::int64_t round) {
  RoundResult rr;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (round == 0) {
    // Only the very first round starts clean: later rounds intentionally
    // leave the previous output documents as the algorithm's plan memory.
    std::filesystem::remove(dir_ / kOutputDestinationFile, ec);
    std::filesystem::remove(dir_ / kOutputRouteFile, ec);
  }
  write_policy_view(view, cfg_, dir_);
  if (!(read_policy_view(dir_, cfg_) == view))
    throw std::logic_error("interaction documents failed the round-trip schema check");

  if (persistent_) {
    if (pid_ < 0 && !spawn(&rr.error)) {
      rr.outcome = RoundOutcome::ProtocolError;
      return rr;
    }
    const std::string req = "ROUND " + std::to_string(round) + "\n";
    if (::write(child_stdin_, req.data(), req.size()) != ssize_t(req.size())) {
      rr.outcome = RoundOutcome::ProtocolError;
      rr.error = "persistent process is not accepting round requests";
      kill_child();
      return rr;
    }
  } else {
    pending_.clear();
    if (!spawn(&rr.error)) {
      rr.outcome = RoundOutcome::ProtocolError;
      return rr;
    }
  }

  bool timed_out = false;
  std::string err;
  const bool got_token = await_token(&timed_out, &err);
  if (!got_token) {
    kill_child();
    rr.outcome = timed_out ? RoundOutcome::Timeout : RoundOutcome::ProtocolError;
    rr.error = timed_out ? "no SUCCESS within the per-round limit"
                         : (err.empty() ? "protocol failure" : err);
    return rr;
  }
  if (!persistent_) kill_child();  // the token ends the process's role this round

  for (const char* f : {kOutputDestinationFile, kOutputRouteFile}) {
    if (!std::filesystem::exists(dir_ / f)) {
      rr.outcome = RoundOutcome::ProtocolError;
      rr.error = std::string("missing output document: ") + f;
      return rr;
    }
  }
  try {
    rr.plan = read_dispatch(dir_, cfg_);
  } catch (const std::exception& e) {
    rr.outcome = RoundOutcome::ProtocolError;
    rr.error = e.what();
  }
  return rr;
}

namespace {

void finalize(HarnessResult& hr) {
  if (hr.exit_code == kExitOk) {
    switch (hr.sim_status) {
      case RunStatus::Finished:
        break;
      case RunStatus::DeadlineAborted:
        hr.exit_code = kExitDeadline;
        break;
      case RunStatus::Stalled:
        hr.exit_code = kExitFailure;
        hr.error = "simulation hit the epoch safety cap without finishing";
        break;
      case RunStatus::Running:
        hr.exit_code = kExitFailure;
        hr.error = "simulation did not run to completion";
        break;
    }
  } else if (hr.exit_code == kExitValidation) {
    hr.report.status = "ABORTED_INVALID_DISPATCH";
  } else if (hr.exit_code == kExitTimeout) {
    hr.report.status = "ABORTED_TIMEOUT";
  } else if (hr.exit_code == kExitProtocol) {
    hr.report.status = "ABORTED_PROTOCOL";
  }
}

}  // namespace

HarnessResult run_embedded(const Instance& inst, Policy& policy, double round_limit_seconds) {
  HarnessResult hr;
  Simulation sim(inst);
  while (sim.status() == RunStatus::Running) {
    Snapshot snap = sim.snapshot();
    const auto t0 = std::chrono::steady_clock::now();
    DispatchPlan plan = policy.decide(snap);
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    ++hr.rounds;
    if (round_limit_seconds > 0 && dt.count() > round_limit_seconds) {
      hr.exit_code = kExitTimeout;
      hr.error = "policy exceeded the per-round limit at round " + std::to_string(hr.rounds - 1);
      break;
    }
    hr.violations = sim.apply_dispatch(plan);
    if (!hr.violations.empty()) {
      hr.exit_code = kExitValidation;
      hr.error = "dispatch rejected by the validator";
      break;
    }
    sim.advance_epoch();
  }
  hr.sim_status = sim.status();
  hr.report = sim.report();
  hr.log = sim.log();
  finalize(hr);
  return hr;
}

HarnessResult run_external(const Instance& inst, const std::string& command,
                           const std::filesystem::path& interaction_dir,
                           double round_limit_seconds, bool persistent) {
  HarnessResult hr;
  Simulation sim(inst);
  ExternalRunner runner(command, interaction_dir, inst.config, round_limit_seconds, persistent);
  std::int64_t round = 0;
  while (sim.status() == RunStatus::Running) {
    Snapshot snap = sim.snapshot();
    RoundResult rr = runner.run_round(snap.view, round);
    ++hr.rounds;
    ++round;
    if (rr.outcome == RoundOutcome::Timeout) {
      hr.exit_code = kExitTimeout;
      hr.error = rr.error;
      break;
    }
    if (rr.outcome == RoundOutcome::ProtocolError) {
      hr.exit_code = kExitProtocol;
      hr.error = rr.error;
      break;
    }
    hr.violations = sim.apply_dispatch(rr.plan);
    if (!hr.violations.empty()) {
      hr.exit_code = kExitValidation;
      hr.error = "dispatch rejected by the validator";
      break;
    }
    sim.advance_epoch();
  }
  hr.sim_status = sim.status();
  hr.report = sim.report();
  hr.log = sim.log();
  finalize(hr);
  return hr;
}

std::string run_bench(const std::vector<std::filesystem::path>& instance_dirs,
                      const std::vector<std::string>& policies, bool wall_ms) {
  std::ostringstream csv;
  csv << "instance,policy,status,f1,f2,f,orders_completed,orders_total,epochs";
  if (wall_ms) csv << ",wall_ms";
  csv << '\n';
  std::map<std::string, std::array<double, 3>> sums;
  std::map<std::string, int> counts;
  for (const auto& dir : instance_dirs) {
    const Instance inst = load_instance(dir);
    for (const auto& pname : policies) {
      auto pol = make_policy(pname, inst);
      const auto t0 = std::chrono::steady_clock::now();
      HarnessResult hr = run_embedded(inst, *pol, 0);
      const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                          std::chrono::steady_clock::now() - t0)
                          .count();
      const ScoreReport& r = hr.report;
      csv << dir.generic_string() << ',' << pname << ',' << r.status << ',' << r.f1 << ','
          << format_double(r.f2) << ',' << format_double(r.f) << ',' << r.orders_completed << ','
          << r.orders_total << ',' << hr.rounds;
      if (wall_ms) csv << ',' << ms;
      csv << '\n';
      auto& s = sums[pname];
      s[0] += double(r.f1);
      s[1] += r.f2;
      s[2] += r.f;
      ++counts[pname];
    }
  }
  for (const auto& pname : policies) {
    const int n = std::max(1, counts[pname]);
    csv << "MEAN," << pname << ",," << format_double(sums[pname][0] / n) << ','
        << format_double(sums[pname][1] / n) << ',' << format_double(sums[pname][2] / n)
        << ",,,";
    if (wall_ms) csv << ',';
    csv << '\n';
  }
  return csv.str();
}

}  // namespace dpdp
