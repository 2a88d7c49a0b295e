#include "harvest/arrival.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "harvest/seeding.hpp"

namespace harvest {

ArrivalProcess ArrivalProcess::constant(double rate) {
  ArrivalProcess p;
  p.kind = Kind::Constant;
  p.rate = rate;
  return p;
}

ArrivalProcess ArrivalProcess::uniform(double lo, double hi, double resample_interval) {
  ArrivalProcess p;
  p.kind = Kind::Uniform;
  p.lo = lo;
  p.hi = hi;
  p.resample_interval = resample_interval;
  return p;
}

ArrivalProcess ArrivalProcess::piecewise(std::vector<std::pair<double, double>> breakpoints) {
  ArrivalProcess p;
  p.kind = Kind::Piecewise;
  p.breakpoints = std::move(breakpoints);
  return p;
}

ArrivalSchedule::ArrivalSchedule(std::vector<double> starts, std::vector<double> rates)
    : starts_(std::move(starts)), rates_(std::move(rates)) {
  if (starts_.empty() || starts_.size() != rates_.size() || starts_.front() != 0.0)
    throw std::invalid_argument("arrival schedule must start at t=0 with one rate per piece");
  cum_.assign(starts_.size(), 0.0);
  for (std::size_t k = 1; k < starts_.size(); ++k) {
    if (!(starts_[k] > starts_[k - 1]))
      throw std::invalid_argument("arrival schedule times must be strictly increasing");
    cum_[k] = cum_[k - 1] + rates_[k - 1] * (starts_[k] - starts_[k - 1]);
  }
}

std::size_t ArrivalSchedule::piece(double t) const {
  auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
  return it == starts_.begin() ? 0 : static_cast<std::size_t>(it - starts_.begin()) - 1;
}

double ArrivalSchedule::rate_at(double t) const { return rates_[piece(t)]; }

double ArrivalSchedule::cumulative(double t) const {
  if (t <= 0.0) return 0.0;
  const auto k = piece(t);
  return cum_[k] + rates_[k] * (t - starts_[k]);
}

std::vector<double> ArrivalSchedule::jump_times() const {
  return {starts_.begin() + 1, starts_.end()};
}

ArrivalSchedule realize(const ArrivalProcess& process, double horizon, std::uint64_t seed) {
  switch (process.kind) {
    case ArrivalProcess::Kind::Constant:
      return ArrivalSchedule({0.0}, {process.rate});
    case ArrivalProcess::Kind::Piecewise: {
      std::vector<double> starts{0.0};
      std::vector<double> rates{0.0};
      for (const auto& [t, r] : process.breakpoints) {
        if (t >= horizon) break;
        if (t <= 0.0) {
          rates.back() = r;
        } else {
          starts.push_back(t);
          rates.push_back(r);
        }
      }
      return ArrivalSchedule(std::move(starts), std::move(rates));
    }
    case ArrivalProcess::Kind::Uniform: {
      std::mt19937_64 gen(seed);
      std::vector<double> starts;
      std::vector<double> rates;
      const double dt = process.resample_interval;
      for (std::size_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * dt;
        if (k > 0 && t >= horizon) break;
        starts.push_back(t);
        rates.push_back(process.lo + (process.hi - process.lo) * unit_uniform(gen));
      }
      return ArrivalSchedule(std::move(starts), std::move(rates));
    }
  }
  throw std::logic_error("unknown arrival kind");
}

}  // namespace harvest
