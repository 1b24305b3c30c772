#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "decaylab/errors.hpp"

namespace decaylab {

/// Strictly increasing list of evaluation times.
struct TimeGrid {
  std::vector<double> points;

  static TimeGrid linear(double start, double stop, int count) {
    if (count < 1) throw DomainError("time grid: count must be >= 1");
    if (!(start <= stop)) throw DomainError("time grid: start must not exceed stop");
    TimeGrid g;
    g.points.reserve(count);
    if (count == 1) {
      g.points.push_back(start);
      return g;
    }
    for (int i = 0; i < count; ++i)
      g.points.push_back(start + (stop - start) * i / (count - 1));
    g.points.back() = stop;
    return g;
  }

  static TimeGrid geometric(double start, double stop, int count) {
    if (count < 1) throw DomainError("time grid: count must be >= 1");
    if (!(start > 0.0)) throw DomainError("time grid: geometric spacing needs start > 0");
    if (!(start <= stop)) throw DomainError("time grid: start must not exceed stop");
    TimeGrid g;
    g.points.reserve(count);
    if (count == 1) {
      g.points.push_back(start);
      return g;
    }
    const double step = std::log(stop / start) / (count - 1);
    for (int i = 0; i < count; ++i) g.points.push_back(start * std::exp(step * i));
    g.points.front() = start;
    g.points.back() = stop;
    return g;
  }

  void ensure_valid() const {
    if (points.empty()) throw DomainError("time grid: empty");
    double prev = -std::numeric_limits<double>::infinity();
    for (double t : points) {
      if (!std::isfinite(t)) throw DomainError("time grid: nonfinite entry");
      if (!(t > prev)) throw DomainError("time grid: entries must be strictly increasing");
      prev = t;
    }
  }
};

}  // namespace decaylab
