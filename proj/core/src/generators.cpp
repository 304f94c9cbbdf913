#include "sfn/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sfn/error.hpp"
#include "sfn/random.hpp"

namespace sfn {
namespace {

Dataset grid_dataset(const GridAxis& axis) {
  Dataset data;
  data.inputs = Matrix(0, 2);
  for (std::size_t i = 0; i < axis.count; ++i) {
    for (std::size_t j = 0; j < axis.count; ++j) {
      const double point[2] = {axis.at(i), axis.at(j)};
      data.inputs.push_row(point);
      data.targets.push_back(synthetic_target(point[0], point[1]));
    }
  }
  return data;
}

}  // namespace

SyntheticData gen_synthetic_grid(const SyntheticConfig& cfg) {
  if (!(cfg.noise_std >= 0.0)) throw ConfigError("noise_std must be >= 0");
  Rng rng(cfg.seed);
  SyntheticData out;
  out.learn = grid_dataset(cfg.learn_axis);
  out.test = grid_dataset(cfg.test_axis);
  out.test_clean = out.test.targets;
  for (double& d : out.learn.targets) d += rng.normal(cfg.noise_mean, cfg.noise_std);
  for (double& d : out.test.targets) d += rng.normal(cfg.noise_mean, cfg.noise_std);
  return out;
}

std::vector<double> gen_rtt_surrogate(std::size_t length, std::uint64_t seed) {
  if (length < 100) throw DataError("RTT surrogate needs length >= 100");
  Rng rng(seed);
  std::vector<double> series;
  series.reserve(length);
  double load = 0.0;
  double burst = 0.0;
  double excite = 0.0;
  for (std::size_t t = 0; t < length; ++t) {
    load = 0.97 * load + 0.25 * rng.normal();
    const double rate = std::min(0.005 + 0.2 * excite, 0.5);
    const bool triggered = rng.uniform01() < rate;
    double jump = 0.0;
    if (triggered) jump = 1.2 - std::log(1.0 - rng.uniform01());
    burst = 0.8 * burst + jump;
    excite = 0.7 * excite + (triggered ? 1.0 : 0.0);
    const double rho = std::min(1.0 / (1.0 + std::exp(-(load + burst - 1.2))), 0.96);
    const double tt = static_cast<double>(t);
    const double drift = 3.0 * std::sin(2.0 * std::numbers::pi * tt / 1800.0) +
                         1.5 * std::sin(2.0 * std::numbers::pi * tt / 330.0);
    const double z = rng.normal();
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double z3 = rng.normal();
    const double noise = 2.5 * z / std::sqrt((z1 * z1 + z2 * z2 + z3 * z3) / 3.0);
    series.push_back(std::max(32.0 + drift + 9.0 * rho / (1.0 - rho) + noise, 1.0));
  }
  return series;
}

}  // namespace sfn
