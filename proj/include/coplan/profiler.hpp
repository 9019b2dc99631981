#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coplan/errors.hpp"

namespace coplan::profiler {

// One measured execution of a service on some input size.
struct Observation {
  std::string service;
  double size_mb = 0.0;
  double time_s = 0.0;
  double energy_j = 0.0;
};

// Straight-line model of cost against input size. The slope is the per-MB
// rate handed to the planner; the intercept is the fixed per-delegation
// overhead and is reported separately rather than folded into the rate.
struct RegressionModel {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t sample_count = 0;
  double residual_sse = 0.0;

  double predict(double size_mb) const;  // never returns a negative cost
};

class ObservationStore {
 public:
  // Throws Error(Config) for non-positive sizes or negative costs.
  void record(const Observation& obs);

  std::size_t size() const { return observations_.size(); }
  const std::vector<Observation>& all() const { return observations_; }

 private:
  std::vector<Observation> observations_;
};

struct ServiceModels {
  RegressionModel time;    // seconds against MB
  RegressionModel energy;  // joules against MB
};

// Ordinary least squares over the store's observations for one service.
// Needs at least two observations with at least two distinct sizes; throws
// Error(Config) otherwise. Insertion order never affects the result.
ServiceModels fit(const ObservationStore& store, const std::string& service);

}  // namespace coplan::profiler
