#include "harvest/fixtures.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>

namespace harvest {

namespace {

using nlohmann::json;

json constant_rate(double r) { return {{"kind", "constant"}, {"rate", r}}; }

json target(double x, double y, json arrival) { return {{"x", x}, {"y", y}, {"arrival", std::move(arrival)}}; }

struct Layout {
  double l1 = 10, l2 = 10;
  Vec2 base{2, 5};
  json targets = json::array();
  std::size_t agents = 1;
  std::string family = "ellipse";
  json mu = 50, beta = 500, r = 1, r_base = 1;
  double alpha = 0.5, m_idle = 1, m_constraint = 1e3, horizon = 10;
  json params;  // optional initial parameters
  std::size_t segments = 1, harmonics = 5;
  std::uint64_t seed = 0;
};

json document(const Layout& L) {
  json agents = {{"count", L.agents}, {"family", L.family}};
  if (L.family == "ellipse") agents["segments"] = L.segments;
  else agents["harmonics"] = L.harmonics;
  if (!L.params.is_null()) agents["params"] = L.params;
  return {{"mission", {{"l1", L.l1}, {"l2", L.l2}}},
          {"base", {{"x", L.base.x()}, {"y", L.base.y()}}},
          {"targets", L.targets},
          {"agents", agents},
          {"rates", {{"mu", L.mu}, {"beta", L.beta}}},
          {"ranges", {{"r", L.r}, {"r_base", L.r_base}}},
          {"weights", {{"alpha", L.alpha}, {"m_idle", L.m_idle}, {"m_constraint", L.m_constraint}}},
          {"sim", {{"horizon", L.horizon}, {"step", 1e-3}, {"event_tol", 1e-9}, {"seed", L.seed}}}};
}

json ellipses(std::initializer_list<std::initializer_list<EllipseParams>> agents) {
  json out = {{"family", "ellipse"}, {"agents", json::array()}};
  for (const auto& a : agents) {
    json segs = json::array();
    for (const auto& e : a) segs.push_back({{"A", e.A}, {"B", e.B}, {"a", e.a}, {"b", e.b}, {"phi", e.phi}});
    out["agents"].push_back({{"segments", segs}});
  }
  return out;
}

// Eight targets on a circle of radius 4 around a central base in a 10 x 10
// mission. The published figures show a symmetric layout of this kind; the
// exact coordinates are not given.
Layout paper_layout(json arrival) {
  Layout L;
  L.base = Vec2(5, 5);
  for (int i = 0; i < 8; ++i) {
    const double a = kTwoPi * i / 8.0;
    L.targets.push_back(target(5 + 4 * std::cos(a), 5 + 4 * std::sin(a), arrival));
  }
  L.agents = 2;
  L.family = "fourier";
  L.harmonics = 5;
  L.horizon = 100;
  return L;
}

std::vector<ReferenceValue> paper_references() {
  return {{"J* ellipse, two segments", -50.9, false},
          {"J* Fourier, five harmonics", -50.18, false},
          {"average target queue: two-point boundary solution", 52.13, false},
          {"average target queue: ellipse", 49.23, false},
          {"average target queue: Fourier", 62.03, false},
          {"average throughput: two-point boundary solution", 3.76, false},
          {"average throughput: ellipse", 4.2, false},
          {"average throughput: Fourier", 3.56, false}};
}

// One target at (8, 5), base at (2, 5). Most desk ellipses miss the base, so
// the base-passing penalty is off to keep it from swamping the queue terms.
Layout desk_layout(double horizon) {
  Layout L;
  L.m_constraint = 0;
  L.targets.push_back(target(8, 5, constant_rate(0.5)));
  L.horizon = horizon;
  return L;
}

json piecewise(std::initializer_list<std::pair<double, double>> points) {
  json bp = json::array();
  for (const auto& [t, r] : points) bp.push_back({t, r});
  return {{"kind", "piecewise"}, {"breakpoints", bp}};
}

// One-harmonic Fourier loop of radius R through the base, centred at
// base + R (cos psi, sin psi).
json fourier_loop(const Vec2& base, double R, double psi) {
  const Vec2 u = -R * Vec2(std::cos(psi), std::sin(psi));
  const double px = std::atan2(u.x(), u.y());
  return {{"family", "fourier"},
          {"agents", {{{"segments", {{{"fx", 1.0}, {"a", {R}}, {"b", {R}}, {"phix", {px}}, {"phiy", {px + kPi / 2}}}}}}}}};
}

struct Entry {
  std::string description;
  std::function<Layout()> build;
  std::vector<ReferenceValue> refs;
};

const std::map<std::string, Entry>& registry() {
  static const std::map<std::string, Entry> reg = [] {
    std::map<std::string, Entry> r;
    r["paper-8t2a-det"] = {"8 targets, 2 agents, constant sigma = 0.5, T = 100",
                           [] { return paper_layout(constant_rate(0.5)); }, paper_references()};
    r["paper-8t2a-stoch"] = {"8 targets, 2 agents, sigma ~ U[0.1, 0.9] redrawn every time unit, T = 100",
                             [] {
                               Layout L = paper_layout({{"kind", "uniform"}, {"lo", 0.1}, {"hi", 0.9}, {"interval", 1.0}});
                               L.seed = 2024;
                               return L;
                             },
                             {{"J* Fourier, stochastic arrivals", -48.05, false}}};
    r["one-target-crossing"] = {"1 target, 1 agent on an ellipse through the target range and the base range",
                                [] {
                                  Layout L = desk_layout(20);
                                  L.params = ellipses({{{5, 5.2, 3.3, 1.5, 0.1}}});
                                  return L;
                                },
                                {}};
    r["one-target-stoch"] = {"1 target, 1 agent, sigma ~ U[0.1, 0.9] redrawn every time unit",
                             [] {
                               Layout L = desk_layout(20);
                               L.targets[0]["arrival"] = {{"kind", "uniform"}, {"lo", 0.1}, {"hi", 0.9}, {"interval", 1.0}};
                               L.params = ellipses({{{5, 5.2, 3.3, 1.5, 0.1}}});
                               L.seed = 7;
                               return L;
                             },
                             {}};

    // Desk scenarios: one or two targets, a handful of events each.
    const double down = 1.5 * kPi;
    r["desk-enter-drain"] = {"enters the target range and empties the queue",
                             [=] {
                               Layout L = desk_layout(3);
                               L.params = ellipses({{{6, 5, 1.5, 1.5, down}}});
                               return L;
                             },
                             {}};
    r["desk-pass-through"] = {"crosses the target range without emptying the queue",
                              [] {
                                Layout L = desk_layout(10);
                                L.mu = 1;
                                L.params = ellipses({{{6, 3.5, 2, 2, kPi}}});
                                return L;
                              },
                              {}};
    r["desk-exit-xiplus"] = {"starts on the target and leaves its range",
                             [] {
                               Layout L = desk_layout(4);
                               L.params = ellipses({{{7, 5, 1, 1, 0}}});
                               return L;
                             },
                             {}};
    r["desk-deliver"] = {"carries data from the target to the base and empties it there",
                         [] {
                           Layout L = desk_layout(4.5);
                           L.targets[0]["x"] = 6;
                           L.mu = 0.4;
                           L.params = ellipses({{{4, 5, 2, 0.5, 0}}});
                           return L;
                         },
                         {}};
    r["desk-slow-delivery"] = {"carries data to the base and is still unloading at T",
                               [] {
                                 Layout L = desk_layout(4.5);
                                 L.targets[0]["x"] = 6;
                                 L.mu = 0.4;
                                 L.beta = 0.02;
                                 L.params = ellipses({{{4, 5, 2, 0.5, 0}}});
                                 return L;
                               },
                               {}};
    r["desk-base-pass"] = {"passes through the base range with nothing on board",
                           [=] {
                             Layout L = desk_layout(6);
                             L.params = ellipses({{{2, 3.5, 1.2, 1.2, down}}});
                             return L;
                           },
                           {}};
    r["desk-kappa"] = {"circles inside the range while the arrival rate steps up and down",
                       [] {
                         Layout L = desk_layout(6);
                         L.mu = 1;
                         L.targets[0]["arrival"] = piecewise({{0, 0.3}, {2, 0.9}, {4, 0.2}});
                         L.params = ellipses({{{8, 5, 0.5, 0.5, 0}}});
                         return L;
                       },
                       {}};
    r["desk-handover"] = {"the connected agent leaves while a second one circles inside the range",
                          [] {
                            Layout L = desk_layout(4);
                            L.agents = 2;
                            L.params = ellipses({{{7, 5, 1, 1, 0}}, {{8, 5, 0.6, 0.6, 0}}});
                            return L;
                          },
                          {}};
    r["desk-switch"] = {"finishes a small first ellipse and enters the target range on the second",
                        [] {
                          Layout L = desk_layout(5.5);
                          L.segments = 2;
                          L.params = ellipses({{{4, 7.5, 0.5, 0.5, 0}, {7.5, 5, 1, 1, kPi}}});
                          return L;
                        },
                        {}};
    r["desk-fourier"] = {"Fourier loop leaving the base and reaching the target",
                         [] {
                           Layout L = desk_layout(4.7);
                           L.targets[0]["x"] = 5.5;
                           L.family = "fourier";
                           L.harmonics = 1;
                           L.params = fourier_loop(L.base, 1.5, 0);
                           return L;
                         },
                         {}};
    r["desk-never"] = {"stays out of every range",
                       [] {
                         Layout L = desk_layout(3);
                         L.params = ellipses({{{5, 8.5, 0.7, 0.7, 0}}});
                         return L;
                       },
                       {}};
    r["desk-two-targets"] = {"crosses one target range and enters a second",
                             [] {
                               Layout L = desk_layout(10);
                               L.targets.push_back(target(4, 7.5, constant_rate(0.5)));
                               L.mu = 1;
                               L.params = ellipses({{{6, 5, 2.6, 2.6, 1.5 * kPi}}});
                               return L;
                             },
                             {}};
    return r;
  }();
  return reg;
}

}  // namespace

std::vector<std::string> fixture_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry()) out.push_back(k);
  return out;
}

std::vector<std::string> desk_fixture_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : registry())
    if (k.rfind("desk-", 0) == 0) out.push_back(k);
  return out;
}

Fixture fixture(const std::string& name) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw std::invalid_argument("unknown fixture '" + name + "'");
  Fixture f;
  f.name = name;
  f.description = it->second.description;
  f.config = document(it->second.build());
  f.scenario = load_scenario(f.config.dump());
  f.references = it->second.refs;
  return f;
}

}  // namespace harvest
