#pragma once

// Deterministic point sampling and a small index-ordered parallel map.

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "finsler/metric.hpp"

namespace finsler {

struct SamplerConfig {
  std::uint64_t seed = 42;
  int count = 20;
  std::vector<std::array<double, 2>> x_box;  // per-axis [lo, hi]; empty means [-0.5, 0.5]^n
  double y_radius = 1.0;
  double max_parallel_cos = 0.99;  // reject |cos(x, y)| above this
  double min_x_norm = 1e-3;
  int min_points = 5;
  int max_attempts_per_point = 1000;
};

struct SampleSet {
  std::vector<SamplePoint> points;
  int attempts = 0;
  int rejected_domain = 0;
  int rejected_parallel = 0;
};

/// x uniform in the box, kept only where validate_point() passes; y uniform
/// on the sphere of radius y_radius. Throws InsufficientSamplesError when
/// fewer than min_points survive the attempt budget.
SampleSet sample_points(const MetricSpec& spec, const SamplerConfig& cfg);

/// Worker count from FINSLER_WORKERS, else the hardware concurrency.
int worker_count();

/// Runs fn(0..count-1) on a pool; results are indexed, so the output order
/// never depends on scheduling. The first exception is rethrown.
void parallel_for(int count, const std::function<void(int)>& fn, int workers = 0);

}  // namespace finsler
