#include <iostream>

#include <CLI11.hpp>

#include "harvest/cli.hpp"

int main(int argc, char** argv) {
  using harvest::CommandRequest;
  CommandRequest req;
  std::uint64_t seed = 0;
  std::size_t replications = 0, max_iters = 0;
  bool quiet = false;

  CLI::App app{"Multi-agent data harvesting: simulation, IPA gradients and trajectory optimization"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* sub) {
    sub->add_option("--scenario", req.scenario, "Scenario config file");
    sub->add_option("--fixture", req.fixture, "Built-in fixture instead of a scenario file");
    sub->add_option("--params", req.params, "Trajectory parameter file");
    sub->add_option("--out", req.out, "Output directory")->capture_default_str();
    sub->add_option("--seed", seed, "Master seed (overrides sim.seed)");
    sub->add_option("--set", req.overrides, "Scenario override key=value (repeatable)");
    sub->add_flag("--quiet", quiet, "No progress output");
  };
  CLI::App* sim = app.add_subcommand("simulate", "Simulate one sample path");
  CLI::App* opt = app.add_subcommand("optimize", "Optimize the trajectory parameters");
  CLI::App* gc = app.add_subcommand("grad-check", "Compare IPA gradients with central differences");
  CLI::App* ex = app.add_subcommand("export", "Re-serialize a scenario and its parameters");
  for (CLI::App* sub : {sim, opt, gc, ex}) common(sub);
  opt->add_option("--mode", req.mode, "IPA mode")->check(CLI::IsMember({"paper", "augmented"}))->capture_default_str();
  opt->add_option("--replications", replications, "Sample paths per iteration")->check(CLI::PositiveNumber);
  opt->add_option("--max-iters", max_iters, "Iteration budget");
  opt->add_option("--threads", req.threads, "Worker threads (0: hardware)");
  gc->add_option("--fd-step", req.fd_step, "Central-difference step")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << harvest::diagnostic(harvest::kScenarioError, "UsageError", e.what()) << "\n";
    return harvest::kScenarioError;
  }

  req.command = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  if (sub->count("--seed")) req.seed = seed;
  if (sub == opt && opt->count("--replications")) req.replications = replications;
  if (sub == opt && opt->count("--max-iters")) req.max_iters = max_iters;

  std::ostream null(nullptr);
  return harvest::run_command(req, quiet ? null : std::cerr, std::cerr);
}
