#include "finsler/sampling.hpp"

#include <atomic>
#include <cmath>
#include <algorithm>
#include <cstdlib>
#include <exception>
#include <random>
#include <string>
#include <thread>

#include "finsler/errors.hpp"

namespace finsler {

SampleSet sample_points(const MetricSpec& spec, const SamplerConfig& cfg) {
  const int n = metric_dim(spec);
  if (cfg.count <= 0) throw ConfigError("sampler count must be positive");
  if (!(cfg.y_radius > 0)) throw ConfigError("sampler y_radius must be positive");
  auto box = cfg.x_box;
  if (box.empty()) box.assign(static_cast<std::size_t>(n), {-0.5, 0.5});
  if (static_cast<int>(box.size()) != n) throw ConfigError("sampler x_box must have one interval per axis");
  for (const auto& b : box)
    if (!(b[0] <= b[1])) throw ConfigError("sampler x_box interval has lo > hi");

  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  SampleSet out;
  const int budget = cfg.count * cfg.max_attempts_per_point;
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  while (static_cast<int>(out.points.size()) < cfg.count && out.attempts < budget) {
    ++out.attempts;
    double xx = 0.0, yy = 0.0, xy = 0.0;
    for (int i = 0; i < n; ++i) {
      x[i] = box[i][0] + (box[i][1] - box[i][0]) * unit(rng);
      y[i] = gauss(rng);
    }
    for (int i = 0; i < n; ++i) yy += y[i] * y[i];
    const double scale = cfg.y_radius / std::sqrt(yy);
    for (int i = 0; i < n; ++i) {
      y[i] *= scale;
      xx += x[i] * x[i];
      xy += x[i] * y[i];
    }
    if (std::sqrt(xx) < cfg.min_x_norm ||
        std::abs(xy) > cfg.max_parallel_cos * std::sqrt(xx) * cfg.y_radius) {
      ++out.rejected_parallel;
      continue;
    }
    if (validate_point(spec, x, y).status != PointStatus::ok) {
      ++out.rejected_domain;
      continue;
    }
    out.points.push_back({x, y});
  }
  if (static_cast<int>(out.points.size()) < cfg.min_points)
    throw InsufficientSamplesError("only " + std::to_string(out.points.size()) +
                                   " valid sample points after " + std::to_string(out.attempts) +
                                   " attempts (need " + std::to_string(cfg.min_points) + ")");
  return out;
}

int worker_count() {
  if (const char* env = std::getenv("FINSLER_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int count, const std::function<void(int)>& fn, int workers) {
  if (workers <= 0) workers = worker_count();
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto work = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  // lowest index wins so the reported failure does not depend on scheduling
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace finsler
