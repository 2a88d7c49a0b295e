#ifndef HARVEST_ARRIVAL_HPP_
#define HARVEST_ARRIVAL_HPP_

#include <cstdint>
#include <utility>
#include <vector>

namespace harvest {

/// Data generation process at one target. Every kind yields a piecewise-constant
/// rate; the instants where a new value takes effect are exogenous events.
struct ArrivalProcess {
  enum class Kind { Constant, Uniform, Piecewise };

  Kind kind = Kind::Constant;
  double rate = 0.0;                                 // Constant
  double lo = 0.0, hi = 0.0, resample_interval = 1.0;  // Uniform
  std::vector<std::pair<double, double>> breakpoints;  // Piecewise: (time, rate)

  static ArrivalProcess constant(double rate);
  static ArrivalProcess uniform(double lo, double hi, double resample_interval = 1.0);
  static ArrivalProcess piecewise(std::vector<std::pair<double, double>> breakpoints);

  bool operator==(const ArrivalProcess&) const = default;
};

/// One realization of an ArrivalProcess over [0, horizon].
class ArrivalSchedule {
 public:
  ArrivalSchedule() = default;
  /// `starts` strictly increasing with starts[0] == 0.
  ArrivalSchedule(std::vector<double> starts, std::vector<double> rates);

  double rate_at(double t) const;
  /// Integral of the rate over [0, t].
  double cumulative(double t) const;
  /// Times > 0 at which a new rate takes effect.
  std::vector<double> jump_times() const;

  const std::vector<double>& starts() const { return starts_; }
  const std::vector<double>& rates() const { return rates_; }

 private:
  std::size_t piece(double t) const;
  std::vector<double> starts_{0.0};
  std::vector<double> rates_{0.0};
  std::vector<double> cum_{0.0};
};

/// Draws one realization. Deterministic in `seed`; Constant and Piecewise ignore it.
ArrivalSchedule realize(const ArrivalProcess& process, double horizon, std::uint64_t seed);

}  // namespace harvest

#endif  // HARVEST_ARRIVAL_HPP_
