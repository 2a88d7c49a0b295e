#include "harvest/flowdyn.hpp"

#include <algorithm>

namespace harvest {

HybridState HybridState::zero(std::size_t m, std::size_t n) {
  HybridState st;
  st.X = Vector::Zero(m);
  st.Z = Matrix::Zero(m, n);
  st.Y = Vector::Zero(m);
  st.s.assign(n, Vec2::Zero());
  st.rho = Vector::Zero(n);
  st.segment.assign(n, 0);
  st.sigma = Vector::Zero(m);
  return st;
}

double proximity_rate(const Vec2& w, const Vec2& s, double r) { return std::max(0.0, 1.0 - (w - s).norm() / r); }

ConnectionMap assign_connections(const HybridState& state, const SystemParams& sys, const ConnectionMap& prev) {
  const std::size_t m = sys.target_count(), n = sys.agent_count();
  ConnectionMap conn;
  conn.target_agent.assign(m, kNoAgent);
  conn.at_base.assign(n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    auto in_range = [&](std::size_t j) { return (sys.targets[i] - state.s[j]).norm() < sys.range(i, j); };
    const int kept = i < prev.target_agent.size() ? prev.target_agent[i] : kNoAgent;
    if (kept != kNoAgent && in_range(static_cast<std::size_t>(kept))) {
      conn.target_agent[i] = kept;
      continue;
    }
    for (std::size_t j = 0; j < n; ++j)
      if (in_range(j)) {
        conn.target_agent[i] = static_cast<int>(j);
        break;
      }
  }
  for (std::size_t j = 0; j < n; ++j) conn.at_base[j] = (sys.base - state.s[j]).norm() < sys.base_range[j];
  return conn;
}

namespace {

double collect_rate(const HybridState& st, const SystemParams& sys, std::size_t i, std::size_t j) {
  return sys.mu(i, j) * sys.proximity->rate((sys.targets[i] - st.s[j]).norm(), sys.range(i, j));
}

Modes modes_from_state(const HybridState& state, const SystemParams& sys, ConnectionMap conn) {
  const std::size_t m = sys.target_count(), n = sys.agent_count();
  Modes md;
  md.conn = std::move(conn);
  md.in_range.assign(m * n, 0);
  md.x_free.assign(m, 0);
  md.z_free.assign(m * n, 0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      md.in_range[pair_index(i, j, n)] = (sys.targets[i] - state.s[j]).norm() < sys.range(i, j);
      md.z_free[pair_index(i, j, n)] = state.Z(i, j) > 0.0;
    }
    const int j = md.conn.target_agent[i];
    const double service = j == kNoAgent ? 0.0 : collect_rate(state, sys, i, static_cast<std::size_t>(j));
    md.x_free[i] = state.X[i] > 0.0 || state.sigma[i] > service;
  }
  return md;
}

}  // namespace

Modes classify(const HybridState& state, const SystemParams& sys, const ConnectionMap& prev) {
  return modes_from_state(state, sys, assign_connections(state, sys, prev));
}

FlowRates queue_flow_rates(const HybridState& st, const Modes& md, const SystemParams& sys) {
  const std::size_t m = sys.target_count(), n = sys.agent_count();
  FlowRates f{Vector::Zero(m), Matrix::Zero(m, n), Vector::Zero(m)};
  for (std::size_t i = 0; i < m; ++i) {
    const int jc = md.conn.target_agent[i];
    if (jc == kNoAgent) {
      f.X[i] = md.x_free[i] ? st.sigma[i] : 0.0;
      continue;
    }
    const auto j = static_cast<std::size_t>(jc);
    const double service = collect_rate(st, sys, i, j);
    if (md.x_free[i]) {
      f.X[i] = st.sigma[i] - service;
      f.Z(i, j) += service;
    } else {
      f.Z(i, j) += st.sigma[i];
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (!md.conn.at_base[j]) continue;
    const double drain = sys.proximity->rate((sys.base - st.s[j]).norm(), sys.base_range[j]);
    for (std::size_t i = 0; i < m; ++i) {
      if (!md.z_free[pair_index(i, j, n)]) continue;
      const double rate = sys.beta(i, j) * drain;
      f.Z(i, j) -= rate;
      f.Y[i] += rate;
    }
  }
  return f;
}

FlowRates queue_flow_rates(const HybridState& st, const ConnectionMap& conn, const SystemParams& sys) {
  Modes md = modes_from_state(st, sys, conn);
  // An empty onboard queue that is being filled is not pinned.
  for (std::size_t i = 0; i < sys.target_count(); ++i)
    if (conn.target_agent[i] != kNoAgent)
      md.z_free[pair_index(i, static_cast<std::size_t>(conn.target_agent[i]), sys.agent_count())] = 1;
  return queue_flow_rates(st, md, sys);
}

}  // namespace harvest
