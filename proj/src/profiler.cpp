#include "coplan/profiler.hpp"

#include <algorithm>
#include <cmath>

namespace coplan::profiler {

double RegressionModel::predict(double size_mb) const {
  return std::max(0.0, slope * size_mb + intercept);
}

void ObservationStore::record(const Observation& obs) {
  if (obs.service.empty()) {
    fail(ErrorCode::Config, "observation needs a service name");
  }
  if (!(obs.size_mb > 0.0) || !std::isfinite(obs.size_mb)) {
    fail(ErrorCode::Config,
         "observation for '" + obs.service + "': size must be positive");
  }
  if (obs.time_s < 0.0 || !std::isfinite(obs.time_s)) {
    fail(ErrorCode::Config,
         "observation for '" + obs.service + "': time must be >= 0");
  }
  if (obs.energy_j < 0.0 || !std::isfinite(obs.energy_j)) {
    fail(ErrorCode::Config,
         "observation for '" + obs.service + "': energy must be >= 0");
  }
  observations_.push_back(obs);
}

namespace {

// Closed-form least squares through centred sums. Centring keeps the
// arithmetic well conditioned for the small sample counts profiling yields.
RegressionModel fit_line(const std::vector<double>& xs,
                         const std::vector<double>& ys) {
  const std::size_t n = xs.size();
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mean_x += xs[i];
    mean_y += ys[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);

  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - mean_x;
    sxx += dx * dx;
    sxy += dx * (ys[i] - mean_y);
  }

  RegressionModel model;
  model.sample_count = n;
  model.slope = sxy / sxx;
  model.intercept = mean_y - model.slope * mean_x;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - (model.slope * xs[i] + model.intercept);
    model.residual_sse += r * r;
  }
  return model;
}

}  // namespace

ServiceModels fit(const ObservationStore& store, const std::string& service) {
  std::vector<double> sizes;
  std::vector<double> times;
  std::vector<double> energies;
  for (const Observation& obs : store.all()) {
    if (obs.service != service) continue;
    sizes.push_back(obs.size_mb);
    times.push_back(obs.time_s);
    energies.push_back(obs.energy_j);
  }
  if (sizes.size() < 2) {
    fail(ErrorCode::Config, "service '" + service + "': need at least two " +
                                "observations to fit a model, have " +
                                std::to_string(sizes.size()));
  }
  const double min_size = *std::min_element(sizes.begin(), sizes.end());
  const double max_size = *std::max_element(sizes.begin(), sizes.end());
  if (!(max_size > min_size)) {
    fail(ErrorCode::Config, "service '" + service +
                                "': observations cover a single input size; "
                                "a line fit needs at least two distinct sizes");
  }

  ServiceModels models;
  models.time = fit_line(sizes, times);
  models.energy = fit_line(sizes, energies);
  return models;
}

}  // namespace coplan::profiler
