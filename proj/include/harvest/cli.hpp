#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace harvest {

/// One CLI invocation. Exactly one of `scenario` (a path) and `fixture` (a
/// built-in name) names the problem.
struct CommandRequest {
  std::string command;  // simulate | optimize | grad-check | export
  std::string scenario;
  std::string fixture;
  std::string params;  // optional parameter file
  std::string out = ".";
  std::optional<std::uint64_t> seed;
  std::string mode = "paper";
  std::optional<std::size_t> replications;
  std::optional<std::size_t> max_iters;
  std::vector<std::string> overrides;  // key=value
  double fd_step = 1e-4;
  std::size_t threads = 0;
};

/// Exit statuses. Every failure writes one line "E<status> <Kind>: <message>".
enum ExitStatus : int { kOk = 0, kFailure = 1, kScenarioError = 2, kNumericalError = 3 };

/// Runs the command and writes its files under req.out:
///   simulate    trace.csv, events.csv, cost.json
///   optimize    history.csv, params.json, trace.csv, events.csv, summary.json
///   grad-check  grad_check.csv
///   export      scenario.json, params.json
/// Progress goes to `log`, the diagnostic line to `err`.
int run_command(const CommandRequest& req, std::ostream& log, std::ostream& err);

/// The single-line diagnostic for an exit status.
std::string diagnostic(int status, const std::string& kind, const std::string& message);

}  // namespace harvest
