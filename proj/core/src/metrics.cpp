#include "sfn/metrics.hpp"

#include <string>

#include "sfn/error.hpp"

namespace sfn {
namespace {

void check_lengths(std::span<const double> y, std::span<const double> d) {
  if (y.size() != d.size()) {
    throw DataError("length mismatch: " + std::to_string(y.size()) + " predictions vs " +
                    std::to_string(d.size()) + " targets");
  }
  if (d.empty()) throw DataError("error metric of an empty set");
}

}  // namespace

double mse(std::span<const double> y, std::span<const double> d) {
  check_lengths(y, d);
  double sum = 0.0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    const double e = y[m] - d[m];
    sum += e * e;
  }
  return sum / static_cast<double>(d.size());
}

double nmse_percent(std::span<const double> y, std::span<const double> d) {
  check_lengths(y, d);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t m = 0; m < d.size(); ++m) {
    const double e = y[m] - d[m];
    num += e * e;
    den += d[m] * d[m];
  }
  if (den == 0.0) throw DataError("NMSE undefined: all targets are zero");
  return num / den * 100.0;
}

}  // namespace sfn
