#include "harvest/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "harvest/errors.hpp"

namespace harvest {

using nlohmann::json;

namespace {

const json& need(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(path.empty() ? key : path + "." + key, "missing required key");
  return *it;
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  return v.get<double>();
}

double number(const json& obj, const std::string& key, const std::string& path) {
  return as_number(need(obj, key, path), path.empty() ? key : path + "." + key);
}

double number_or(const json& obj, const std::string& key, const std::string& path, double fallback) {
  if (!obj.contains(key)) return fallback;
  return as_number(obj[key], path + "." + key);
}

std::size_t count_or(const json& obj, const std::string& key, const std::string& path, std::size_t fallback) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj[key];
  if (!v.is_number_integer() || v.get<long long>() < 0)
    throw ConfigError(path + "." + key, "expected a nonnegative integer");
  return v.get<std::size_t>();
}

// Scalar broadcast to M x N, or an explicit M x N nested list.
Matrix pair_matrix(const json& v, std::size_t m, std::size_t n, const std::string& path) {
  if (v.is_number()) return Matrix::Constant(m, n, v.get<double>());
  if (!v.is_array() || v.size() != m) throw ConfigError(path, "expected a number or an M x N list");
  Matrix out(m, n);
  for (std::size_t i = 0; i < m; ++i) {
    if (!v[i].is_array() || v[i].size() != n) throw ConfigError(path, "row " + std::to_string(i) + " must have N entries");
    for (std::size_t j = 0; j < n; ++j) out(i, j) = as_number(v[i][j], path);
  }
  return out;
}

Vector agent_vector(const json& v, std::size_t n, const std::string& path) {
  if (v.is_number()) return Vector::Constant(n, v.get<double>());
  if (!v.is_array() || v.size() != n) throw ConfigError(path, "expected a number or a list of N entries");
  Vector out(n);
  for (std::size_t j = 0; j < n; ++j) out[j] = as_number(v[j], path);
  return out;
}

json matrix_json(const Matrix& m) {
  if (m.size() > 0 && (m.array() == m(0, 0)).all()) return m(0, 0);
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Vector& v) {
  if (v.size() > 0 && (v.array() == v[0]).all()) return v[0];
  json out = json::array();
  for (double x : v) out.push_back(x);
  return out;
}

ArrivalProcess parse_arrival(const json& a, const std::string& path) {
  const json& kind = need(a, "kind", path);
  if (!kind.is_string()) throw ConfigError(path + ".kind", "expected a string");
  const auto k = kind.get<std::string>();
  if (k == "constant") return ArrivalProcess::constant(number(a, "rate", path));
  if (k == "uniform")
    return ArrivalProcess::uniform(number(a, "lo", path), number(a, "hi", path),
                                   number_or(a, "interval", path, 1.0));
  if (k == "piecewise") {
    const json& bp = need(a, "breakpoints", path);
    if (!bp.is_array()) throw ConfigError(path + ".breakpoints", "expected a list of [time, rate]");
    std::vector<std::pair<double, double>> points;
    for (const auto& p : bp) {
      if (!p.is_array() || p.size() != 2) throw ConfigError(path + ".breakpoints", "expected [time, rate] pairs");
      points.emplace_back(as_number(p[0], path + ".breakpoints"), as_number(p[1], path + ".breakpoints"));
    }
    return ArrivalProcess::piecewise(std::move(points));
  }
  throw ConfigError(path + ".kind", "unknown arrival kind '" + k + "'");
}

json arrival_json(const ArrivalProcess& a) {
  switch (a.kind) {
    case ArrivalProcess::Kind::Constant:
      return {{"kind", "constant"}, {"rate", a.rate}};
    case ArrivalProcess::Kind::Uniform:
      return {{"kind", "uniform"}, {"lo", a.lo}, {"hi", a.hi}, {"interval", a.resample_interval}};
    case ArrivalProcess::Kind::Piecewise: {
      json bp = json::array();
      for (const auto& [t, r] : a.breakpoints) bp.push_back({t, r});
      return {{"kind", "piecewise"}, {"breakpoints", bp}};
    }
  }
  return {};
}

std::vector<double> number_list(const json& obj, const std::string& key, const std::string& path) {
  const json& v = need(obj, key, path);
  if (!v.is_array()) throw ConfigError(path + "." + key, "expected a list of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, path + "." + key));
  return out;
}

Curve parse_curve(const json& seg, Family family, const Vec2& base, const std::string& path) {
  if (family == Family::Ellipse)
    return EllipseParams{number(seg, "A", path), number(seg, "B", path), number(seg, "a", path),
                         number(seg, "b", path), number(seg, "phi", path)};
  FourierParams f;
  f.fx = number(seg, "fx", path);
  f.ax = number_list(seg, "a", path);
  f.by = number_list(seg, "b", path);
  f.phix = number_list(seg, "phix", path);
  f.phiy = number_list(seg, "phiy", path);
  if (f.phix.size() != f.ax.size() || f.phiy.size() != f.by.size())
    throw ConfigError(path, "each amplitude needs a matching phase");
  f.anchor = base;
  return f;
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

std::vector<Violation> validate_scenario(const Scenario& sc) {
  std::vector<Violation> out;
  auto add = [&](std::string code, std::string msg) { out.push_back({std::move(code), std::move(msg)}); };
  const SystemParams& s = sc.system;
  const std::size_t m = s.target_count(), n = s.agent_count();

  if (m == 0) add("NoTargets", "M must be >= 1");
  if (n == 0) add("NoAgents", "N must be >= 1");
  if (!(s.l1 > 0 && s.l2 > 0)) add("NonPositiveExtent", "mission extents must be positive");
  if (s.q.size() != m) add("DimensionMismatch", "one weight q per target required");
  if (sc.arrivals.size() != m) add("DimensionMismatch", "one arrival process per target required");
  const auto shape_ok = [&](const Matrix& x) {
    return x.rows() == static_cast<Eigen::Index>(m) && x.cols() == static_cast<Eigen::Index>(n);
  };
  const bool shapes = shape_ok(s.range) && shape_ok(s.mu) && shape_ok(s.beta) &&
                      s.base_range.size() == static_cast<Eigen::Index>(n);
  if (!shapes) add("DimensionMismatch", "rate and range tables must be M x N (base ranges N)");

  for (std::size_t i = 0; i < m; ++i) {
    const Vec2& w = s.targets[i];
    if (!(w.x() >= 0 && w.x() <= s.l1 && w.y() >= 0 && w.y() <= s.l2))
      add("TargetOutsideMission", "target " + std::to_string(i + 1) + " lies outside the mission rectangle");
    if (i < s.q.size() && !finite_nonneg(s.q[i]))
      add("NegativeWeight", "target " + std::to_string(i + 1) + " has a negative weight q");
  }
  for (std::size_t i = 0; i < sc.arrivals.size(); ++i) {
    const ArrivalProcess& a = sc.arrivals[i];
    const std::string who = "target " + std::to_string(i + 1);
    switch (a.kind) {
      case ArrivalProcess::Kind::Constant:
        if (!finite_nonneg(a.rate)) add("InvalidArrival", who + ": arrival rate must be >= 0");
        break;
      case ArrivalProcess::Kind::Uniform:
        if (!finite_nonneg(a.lo) || !std::isfinite(a.hi) || a.lo > a.hi)
          add("InvalidArrival", who + ": uniform bounds need 0 <= lo <= hi");
        if (!(a.resample_interval > 0)) add("InvalidArrival", who + ": resample interval must be positive");
        break;
      case ArrivalProcess::Kind::Piecewise:
        for (std::size_t k = 0; k < a.breakpoints.size(); ++k) {
          if (!finite_nonneg(a.breakpoints[k].second))
            add("InvalidArrival", who + ": breakpoint rates must be >= 0");
          if (k > 0 && !(a.breakpoints[k].first > a.breakpoints[k - 1].first))
            add("InvalidArrival", who + ": breakpoint times must be strictly increasing");
        }
        break;
    }
  }
  if (shapes) {
    if (!(s.mu.array() > 0).all() || !(s.beta.array() > 0).all())
      add("NonPositiveRate", "collection and delivery rates must be positive");
    if (!(s.range.array() > 0).all() || !(s.base_range.array() > 0).all())
      add("NonPositiveRange", "collection and base ranges must be positive");
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (!((s.targets[i] - s.base).norm() > s.range(i, j) + s.base_range[j]))
          add("CollectDeliverOverlap", "target " + std::to_string(i + 1) + " and agent " + std::to_string(j + 1) +
                                           ": an agent could collect and deliver at the same time "
                                           "(target-base distance must exceed r + r_base)");
  }
  if (!(s.alpha >= 0 && s.alpha <= 1)) add("WeightOutOfRange", "alpha must lie in [0, 1]");
  if (!finite_nonneg(s.m_idle) || !finite_nonneg(s.m_constraint))
    add("NegativeMultiplier", "m_idle and m_constraint must be >= 0");
  if (!(s.horizon > 0)) add("NonPositiveHorizon", "horizon must be positive");
  if (!(s.step > 0)) add("NonPositiveStep", "integration step must be positive");
  if (!(s.event_tol > 0)) add("NonPositiveTolerance", "event tolerance must be positive");

  const AgentSpec& spec = sc.agent_spec;
  if (spec.segments < 1) add("InvalidAgentSpec", "segments must be >= 1");
  if (spec.family == Family::Fourier && spec.segments != 1)
    add("InvalidAgentSpec", "Fourier trajectories use a single segment");
  if (spec.family == Family::Fourier && spec.harmonics < 1) add("InvalidAgentSpec", "harmonics must be >= 1");
  if (sc.initial) {
    const TrajectorySet& t = *sc.initial;
    if (t.family != spec.family || t.agents.size() != n)
      add("InitialParamsMismatch", "initial parameters must cover every agent with the scenario's family");
    for (const auto& a : t.agents)
      for (const auto& c : a.segments) {
        if (const auto* e = std::get_if<EllipseParams>(&c); e && !(e->a > 0 && e->b > 0))
          add("InitialParamsMismatch", "ellipse semi-axes must be positive");
        if (const auto* f = std::get_if<FourierParams>(&c); f && (f->ax.empty() || f->by.empty()))
          add("InitialParamsMismatch", "Fourier curves need at least one harmonic per axis");
      }
  }
  return out;
}

Scenario parse_scenario(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "scenario must be a JSON object");
  Scenario sc;
  SystemParams& s = sc.system;

  const json& mission = need(doc, "mission", "");
  s.l1 = number(mission, "l1", "mission");
  s.l2 = number(mission, "l2", "mission");
  const json& base = need(doc, "base", "");
  s.base = Vec2(number(base, "x", "base"), number(base, "y", "base"));

  const json& targets = need(doc, "targets", "");
  if (!targets.is_array()) throw ConfigError("targets", "expected a list");
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const std::string path = "targets." + std::to_string(i);
    const json& t = targets[i];
    s.targets.emplace_back(number(t, "x", path), number(t, "y", path));
    s.q.push_back(number_or(t, "q", path, 1.0));
    sc.arrivals.push_back(parse_arrival(need(t, "arrival", path), path + ".arrival"));
  }

  const json& agents = need(doc, "agents", "");
  const json& count = need(agents, "count", "agents");
  if (!count.is_number_integer() || count.get<long long>() < 0)
    throw ConfigError("agents.count", "expected a nonnegative integer");
  s.agents = count.get<std::size_t>();
  const json& family = need(agents, "family", "agents");
  if (!family.is_string()) throw ConfigError("agents.family", "expected a string");
  try {
    sc.agent_spec.family = family_from_string(family.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("agents.family", e.what());
  }
  sc.agent_spec.segments = count_or(agents, "segments", "agents", 1);
  sc.agent_spec.harmonics = count_or(agents, "harmonics", "agents", 5);

  const std::size_t m = s.targets.size(), n = s.agents;
  const json& rates = need(doc, "rates", "");
  s.mu = pair_matrix(need(rates, "mu", "rates"), m, n, "rates.mu");
  s.beta = pair_matrix(need(rates, "beta", "rates"), m, n, "rates.beta");
  const json& ranges = need(doc, "ranges", "");
  s.range = pair_matrix(need(ranges, "r", "ranges"), m, n, "ranges.r");
  s.base_range = agent_vector(need(ranges, "r_base", "ranges"), n, "ranges.r_base");

  const json& weights = need(doc, "weights", "");
  s.alpha = number(weights, "alpha", "weights");
  s.m_idle = number(weights, "m_idle", "weights");
  s.m_constraint = number_or(weights, "m_constraint", "weights", 1e3);

  const json& sim = need(doc, "sim", "");
  s.horizon = number(sim, "horizon", "sim");
  s.step = number_or(sim, "step", "sim", 1e-3);
  s.event_tol = number_or(sim, "event_tol", "sim", 1e-9);
  if (sim.contains("seed")) {
    if (!sim["seed"].is_number_unsigned()) throw ConfigError("sim.seed", "expected a nonnegative integer");
    sc.seed = sim["seed"].get<std::uint64_t>();
  }

  if (agents.contains("params")) sc.initial = parse_params(agents["params"], s.base);
  return sc;
}

Scenario load_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  Scenario sc = parse_scenario(doc);
  const auto violations = validate_scenario(sc);
  if (!violations.empty()) {
    std::vector<std::string> msgs;
    for (const auto& v : violations) msgs.push_back(v.code + ": " + v.message);
    throw ValidationError(std::move(msgs));
  }
  return sc;
}

Scenario load_scenario_file(const std::string& path) { return load_scenario(read_text_file(path)); }

json export_scenario(const Scenario& sc) {
  const SystemParams& s = sc.system;
  json targets = json::array();
  for (std::size_t i = 0; i < s.targets.size(); ++i)
    targets.push_back({{"x", s.targets[i].x()},
                       {"y", s.targets[i].y()},
                       {"q", i < s.q.size() ? s.q[i] : 1.0},
                       {"arrival", i < sc.arrivals.size() ? arrival_json(sc.arrivals[i]) : json::object()}});
  json agents = {{"count", s.agents},
                 {"family", to_string(sc.agent_spec.family)},
                 {"segments", sc.agent_spec.segments},
                 {"harmonics", sc.agent_spec.harmonics}};
  if (sc.initial) agents["params"] = export_params(*sc.initial);
  return {{"mission", {{"l1", s.l1}, {"l2", s.l2}}},
          {"base", {{"x", s.base.x()}, {"y", s.base.y()}}},
          {"targets", targets},
          {"agents", agents},
          {"rates", {{"mu", matrix_json(s.mu)}, {"beta", matrix_json(s.beta)}}},
          {"ranges", {{"r", matrix_json(s.range)}, {"r_base", vector_json(s.base_range)}}},
          {"weights", {{"alpha", s.alpha}, {"m_idle", s.m_idle}, {"m_constraint", s.m_constraint}}},
          {"sim", {{"horizon", s.horizon}, {"step", s.step}, {"event_tol", s.event_tol}, {"seed", sc.seed}}}};
}

bool same_fields(const Scenario& a, const Scenario& b) {
  const SystemParams &x = a.system, &y = b.system;
  return x.l1 == y.l1 && x.l2 == y.l2 && x.base == y.base && x.targets == y.targets && x.q == y.q &&
         x.agents == y.agents && x.range == y.range && x.base_range == y.base_range && x.mu == y.mu &&
         x.beta == y.beta && x.alpha == y.alpha && x.m_idle == y.m_idle && x.m_constraint == y.m_constraint &&
         x.horizon == y.horizon && x.step == y.step && x.event_tol == y.event_tol && a.arrivals == b.arrivals &&
         a.agent_spec == b.agent_spec && a.seed == b.seed && a.initial == b.initial;
}

void apply_override(json& doc, const std::string& assignment) {
  static const std::set<std::string> kLeaves = {
      "mission.l1", "mission.l2", "base.x", "base.y", "agents.count", "agents.family", "agents.segments",
      "agents.harmonics", "rates.mu", "rates.beta", "ranges.r", "ranges.r_base", "weights.alpha",
      "weights.m_idle", "weights.m_constraint", "sim.horizon", "sim.step", "sim.event_tol", "sim.seed",
      "targets.#.x", "targets.#.y", "targets.#.q", "targets.#.arrival.kind", "targets.#.arrival.rate",
      "targets.#.arrival.lo", "targets.#.arrival.hi", "targets.#.arrival.interval",
      "targets.#.arrival.breakpoints"};

  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  std::stringstream ss(key);
  for (std::string p; std::getline(ss, p, '.');) parts.push_back(p);
  std::string pattern;
  for (const auto& p : parts) {
    const bool index = !p.empty() && p.find_first_not_of("0123456789") == std::string::npos;
    pattern += (pattern.empty() ? "" : ".") + (index ? std::string("#") : p);
  }
  if (!kLeaves.count(pattern)) throw ConfigError(key, "not a scenario key");

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;
  }
  json* node = &doc;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const std::string& p = parts[k];
    const bool last = k + 1 == parts.size();
    if (node->is_array()) {
      const auto idx = std::stoul(p);
      if (idx >= node->size()) throw ConfigError(key, "index out of range");
      node = &(*node)[idx];
    } else {
      if (!node->is_object()) throw ConfigError(key, "path does not match the document");
      if (last) {
        (*node)[p] = value;
        return;
      }
      node = &(*node)[p];
    }
  }
  *node = value;
}

json export_params(const TrajectorySet& set) {
  json agents = json::array();
  for (const auto& a : set.agents) {
    json segs = json::array();
    for (const auto& c : a.segments) {
      if (const auto* e = std::get_if<EllipseParams>(&c)) {
        segs.push_back({{"A", e->A}, {"B", e->B}, {"a", e->a}, {"b", e->b}, {"phi", e->phi}});
      } else {
        const auto& f = std::get<FourierParams>(c);
        segs.push_back({{"fx", f.fx}, {"a", f.ax}, {"b", f.by}, {"phix", f.phix}, {"phiy", f.phiy}});
      }
    }
    agents.push_back({{"segments", segs}});
  }
  return {{"family", to_string(set.family)}, {"agents", agents}};
}

TrajectorySet parse_params(const json& doc, const Vec2& base) {
  TrajectorySet set;
  const json& family = need(doc, "family", "params");
  if (!family.is_string()) throw ConfigError("params.family", "expected a string");
  try {
    set.family = family_from_string(family.get<std::string>());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("params.family", e.what());
  }
  const json& agents = need(doc, "agents", "params");
  if (!agents.is_array()) throw ConfigError("params.agents", "expected a list");
  for (std::size_t j = 0; j < agents.size(); ++j) {
    const std::string path = "params.agents." + std::to_string(j);
    const json& segs = need(agents[j], "segments", path);
    if (!segs.is_array() || segs.empty()) throw ConfigError(path + ".segments", "expected a non-empty list");
    SegmentedTrajectory traj;
    for (std::size_t k = 0; k < segs.size(); ++k)
      traj.segments.push_back(parse_curve(segs[k], set.family, base, path + ".segments." + std::to_string(k)));
    set.agents.push_back(std::move(traj));
  }
  return set;
}

TrajectorySet load_params_file(const std::string& path, const Vec2& base) {
  const std::string text = read_text_file(path);
  try {
    return parse_params(json::parse(text), base);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON in parameter file: ") + e.what());
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

}  // namespace harvest
