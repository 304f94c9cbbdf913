#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "sfn/dataset.hpp"

namespace sfn {

/// Evenly spaced axis: start + i * step for i in [0, count).
struct GridAxis {
  double start = -1.0;
  double step = 0.2;
  std::size_t count = 10;

  double at(std::size_t i) const { return start + static_cast<double>(i) * step; }
};

struct SyntheticConfig {
  double noise_mean = 0.0;
  double noise_std = 0.05;
  GridAxis learn_axis{-1.0, 0.2, 10};
  GridAxis test_axis{-0.975, 0.2, 10};
  std::uint64_t seed = 1;
};

struct SyntheticData {
  Dataset learn;
  Dataset test;
  /// Noise-free targets for the test rows, same order as `test`.
  std::vector<double> test_clean;
};

/// f(x1, x2) = x1^2 x2^2 + eps on the square grids learn_axis^2 and
/// test_axis^2 (x1 outer loop, x2 inner). Noise is drawn from Rng(seed):
/// one normal per learn row in order, then one per test row.
SyntheticData gen_synthetic_grid(const SyntheticConfig& cfg);

inline double synthetic_target(double x1, double x2) { return x1 * x1 * x2 * x2; }

/// Synthetic stand-in for a 2-second-averaged round-trip-time trace, in ms.
///
/// Recipe, driven by one Rng(seed) consumed in this order per step t:
///   n_t     ~ normal                      latent load innovation
///   a_t     ~ uniform01                   burst trigger
///   j_t     ~ exponential(1) via -log(1-u) burst size (only drawn when triggered)
///   z, z1..z3 ~ normal                    Student-t(3) noise
/// State updates:
///   load_t  = 0.97 load_{t-1} + 0.25 n_t
///   rate_t  = min(0.005 + 0.2 excite_{t-1}, 0.5)
///   burst_t = 0.8 burst_{t-1} + (a_t < rate_t ? 1.2 + j_t : 0)
///   excite_t = 0.7 excite_{t-1} + (triggered ? 1 : 0)
///   rho_t   = min(logistic(load_t + burst_t - 1.2), 0.96)
///   drift_t = 3 sin(2 pi t / 1800) + 1.5 sin(2 pi t / 330)
///   rtt_t   = max(32 + drift_t + 9 rho_t / (1 - rho_t) + 2.5 z / sqrt((z1^2+z2^2+z3^2)/3), 1)
/// i.e. a queueing-delay curve over a slowly wandering, self-excited load plus
/// heavy-tailed measurement noise. Throws DataError when length < 100.
std::vector<double> gen_rtt_surrogate(std::size_t length = 13158, std::uint64_t seed = 1);

}  // namespace sfn
