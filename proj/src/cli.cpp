#include "harvest/cli.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "harvest/errors.hpp"
#include "harvest/fixtures.hpp"
#include "harvest/gradcheck.hpp"
#include "harvest/hybridsim.hpp"
#include "harvest/ipa.hpp"
#include "harvest/optimizer.hpp"
#include "harvest/scenario.hpp"

namespace harvest {

namespace {

using nlohmann::json;

// Request problems that are the caller's fault, reported like scenario errors.
class RequestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Loaded {
  Scenario sc;
  TrajectorySet traj;
};

Loaded load(const CommandRequest& req) {
  if (req.scenario.empty() == req.fixture.empty()) throw RequestError("give exactly one of --scenario and --fixture");
  json doc;
  if (!req.fixture.empty()) {
    try {
      doc = fixture(req.fixture).config;
    } catch (const std::invalid_argument& e) {
      throw RequestError(e.what());
    }
  } else {
    if (!std::filesystem::exists(req.scenario)) throw RequestError("scenario file not found: " + req.scenario);
    try {
      doc = json::parse(read_text_file(req.scenario));
    } catch (const json::parse_error& e) {
      throw ConfigError("", std::string("invalid JSON: ") + e.what());
    }
  }
  for (const auto& o : req.overrides) apply_override(doc, o);
  if (req.seed) doc["sim"]["seed"] = *req.seed;
  Loaded out{load_scenario(doc.dump()), {}};
  if (!req.params.empty()) {
    if (!std::filesystem::exists(req.params)) throw RequestError("parameter file not found: " + req.params);
    out.sc.initial = load_params_file(req.params, out.sc.system.base);
    std::vector<std::string> msgs;
    for (const auto& v : validate_scenario(out.sc)) msgs.push_back(v.code + ": " + v.message);
    if (!msgs.empty()) throw ValidationError(msgs);
  }
  out.traj = initial_trajectories(out.sc);
  return out;
}

std::filesystem::path out_dir(const CommandRequest& req) {
  std::filesystem::path dir(req.out);
  std::filesystem::create_directories(dir);
  return dir;
}

template <class Fn>
void write_file(const std::filesystem::path& path, Fn&& fn) {
  std::ostringstream os;
  fn(os);
  write_text_file(path.string(), os.str());
}

json cost_json(const CostBreakdown& c) {
  return {{"J", c.total}, {"J1", c.J1}, {"J2", c.J2}, {"J3", c.J3}, {"Jf", c.Jf}, {"penalty", c.penalty}};
}

void write_trace_files(const std::filesystem::path& dir, const Trace& tr) {
  write_file(dir / "trace.csv", [&](std::ostream& os) { write_trace_csv(tr, os); });
  write_file(dir / "events.csv", [&](std::ostream& os) { write_events_csv(tr, os); });
}

int simulate_cmd(const CommandRequest& req, std::ostream& log) {
  const Loaded L = load(req);
  const Trace tr = simulate(L.sc, L.traj, L.sc.seed);
  const CostBreakdown cost = sample_cost(tr, L.sc.system);
  const auto dir = out_dir(req);
  write_trace_files(dir, tr);
  json doc = cost_json(cost);
  doc["events"] = tr.events.size();
  doc["warnings"] = tr.warnings;
  doc["conservation_residual"] = conservation_residual(tr);
  write_text_file((dir / "cost.json").string(), doc.dump(2) + "\n");
  log << "simulated " << tr.sample_count() << " samples, " << tr.events.size() << " events, J = " << cost.total
      << "\n";
  return kOk;
}

int optimize_cmd(const CommandRequest& req, std::ostream& log) {
  const Loaded L = load(req);
  OptimizerConfig cfg;
  cfg.mode = ipa_mode_from_string(req.mode);
  cfg.seed = L.sc.seed;
  cfg.threads = req.threads;
  if (req.replications) cfg.replications = *req.replications;
  if (req.max_iters) cfg.max_iters = *req.max_iters;
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw RequestError(e.what());
  }
  const auto hist = optimize(L.sc, L.traj, cfg, [&](const IterationRecord& r, const TrajectorySet&) {
    log << "iteration " << r.l << ": J = " << r.cost.total << ", |grad| = " << r.grad_norm << ", step = " << r.step
        << (r.skipped ? " (skipped)" : "") << "\n";
  });
  const auto dir = out_dir(req);
  write_file(dir / "history.csv", [&](std::ostream& os) { write_history_csv(hist, os); });
  write_text_file((dir / "params.json").string(), export_params(hist.final).dump(2) + "\n");
  write_trace_files(dir, simulate(L.sc, hist.final, L.sc.seed));
  json summary = {{"stop_reason", hist.stop_reason},
                  {"iterations", hist.iterations.size()},
                  {"skipped", hist.skipped},
                  {"mode", to_string(cfg.mode)},
                  {"final", cost_json(hist.final_cost)}};
  if (L.sc.agent_spec.family == Family::Ellipse)
    summary["constraint_violation"] = constraint_violation(hist.final, L.sc.system.base);
  write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
  log << "stopped (" << hist.stop_reason << ") with J = " << hist.final_cost.total << "\n";
  return kOk;
}

int grad_check_cmd(const CommandRequest& req, std::ostream& log) {
  const Loaded L = load(req);
  if (!(req.fd_step > 0)) throw RequestError("--fd-step must be positive");
  const auto rep = grad_check(L.sc.system, realize_arrivals(L.sc, L.sc.seed), L.traj, req.fd_step);
  const auto dir = out_dir(req);
  write_file(dir / "grad_check.csv", [&](std::ostream& os) { write_grad_check_csv(rep, os); });
  log << "max rel. err: paper " << rep.max_rel_paper << ", augmented " << rep.max_rel_augmented << "\n";
  return kOk;
}

int export_cmd(const CommandRequest& req, std::ostream& log) {
  const Loaded L = load(req);
  const auto dir = out_dir(req);
  write_text_file((dir / "scenario.json").string(), export_scenario(L.sc).dump(2) + "\n");
  write_text_file((dir / "params.json").string(), export_params(L.traj).dump(2) + "\n");
  log << "exported to " << dir.string() << "\n";
  return kOk;
}

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

std::string diagnostic(int status, const std::string& kind, const std::string& message) {
  return "E" + std::to_string(status) + " " + kind + ": " + one_line(message);
}

int run_command(const CommandRequest& req, std::ostream& log, std::ostream& err) {
  auto fail = [&](int status, const char* kind, const std::string& msg) {
    err << diagnostic(status, kind, msg) << "\n";
    return status;
  };
  try {
    if (req.command == "simulate") return simulate_cmd(req, log);
    if (req.command == "optimize") return optimize_cmd(req, log);
    if (req.command == "grad-check") return grad_check_cmd(req, log);
    if (req.command == "export") return export_cmd(req, log);
    return fail(kScenarioError, "RequestError", "unknown command '" + req.command + "'");
  } catch (const ConfigError& e) {
    return fail(kScenarioError, "ConfigError", e.what());
  } catch (const ValidationError& e) {
    return fail(kScenarioError, "ValidationError", e.what());
  } catch (const RequestError& e) {
    return fail(kScenarioError, "RequestError", e.what());
  } catch (const TangentialCrossing& e) {
    return fail(kNumericalError, "TangentialCrossing", e.what());
  } catch (const DegenerateTrajectory& e) {
    return fail(kNumericalError, "DegenerateTrajectory", e.what());
  } catch (const NumericalError& e) {
    return fail(kNumericalError, "NumericalError", e.what());
  } catch (const std::exception& e) {
    return fail(kFailure, "Error", e.what());
  }
}

}  // namespace harvest
