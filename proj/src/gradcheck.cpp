#include "harvest/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "harvest/hybridsim.hpp"

namespace harvest {

double relative_error(double a, double fd, double scale) {
  return std::abs(a - fd) / std::max(std::abs(fd), 1e-3 * scale + 1e-8);
}

std::vector<std::string> event_signature(const Trace& trace) {
  std::vector<std::string> out;
  out.reserve(trace.events.size());
  for (const auto& e : trace.events)
    out.push_back(std::string(to_string(e.kind)) + ":" + std::to_string(e.target) + ":" + std::to_string(e.agent));
  return out;
}

GradCheckReport grad_check(const SystemParams& sys, const std::vector<ArrivalSchedule>& arrivals,
                           const TrajectorySet& traj, double h) {
  GradCheckReport rep;
  rep.h = h;
  const Trace base = simulate(sys, arrivals, traj);
  rep.cost = sample_cost(base, sys).total;
  const Vector paper = sample_gradient(base, run_ipa(base, sys, IpaMode::Paper), sys).total;
  const Vector aug = sample_gradient(base, run_ipa(base, sys, IpaMode::Augmented), sys).total;

  const Vector theta = traj.flatten();
  const auto names = traj.parameter_names();
  rep.rows.resize(names.size());
  for (std::size_t k = 0; k < names.size(); ++k) {
    Vector tp = theta, tm = theta;
    tp[k] += h;
    tm[k] -= h;
    const Trace up = simulate(sys, arrivals, traj.with_values(tp));
    const Trace dn = simulate(sys, arrivals, traj.with_values(tm));
    GradCheckRow& r = rep.rows[k];
    r.name = names[k];
    r.paper = paper[k];
    r.augmented = aug[k];
    r.fd = (sample_cost(up, sys).total - sample_cost(dn, sys).total) / (2 * h);
    r.topology_change = event_signature(up) != event_signature(dn);
  }
  double scale = 0.0;
  for (const auto& r : rep.rows) scale = std::max(scale, std::abs(r.fd));
  for (auto& r : rep.rows) {
    r.rel_paper = relative_error(r.paper, r.fd, scale);
    r.rel_augmented = relative_error(r.augmented, r.fd, scale);
    if (r.topology_change) continue;
    rep.max_rel_paper = std::max(rep.max_rel_paper, r.rel_paper);
    rep.max_rel_augmented = std::max(rep.max_rel_augmented, r.rel_augmented);
  }
  return rep;
}

void write_grad_check_csv(const GradCheckReport& rep, std::ostream& out) {
  out << "parameter,ipa_paper,ipa_augmented,fd,rel_err_paper,rel_err_augmented,mode_gap,note\n";
  char buf[256];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%s,%.10g,%.10g,%.10g,%.4g,%.4g,%.10g,%s\n", r.name.c_str(), r.paper, r.augmented,
                  r.fd, r.rel_paper, r.rel_augmented, r.augmented - r.paper,
                  r.topology_change ? "event-topology change" : "");
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "# h=%g cost=%.10g max_rel_err_paper=%.4g max_rel_err_augmented=%.4g\n", rep.h,
                rep.cost, rep.max_rel_paper, rep.max_rel_augmented);
  out << buf;
}

}  // namespace harvest
