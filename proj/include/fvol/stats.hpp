#pragma once

#include <cstdint>
#include <span>

namespace fvol {

// Inverse standard normal CDF (Acklam's rational approximation with one Halley
// refinement step). p must lie in (0, 1).
double normal_quantile(double p);

// Upper nu/2 quantile, i.e. Phi^{-1}(1 - nu/2).
double upper_half_quantile(double nu);

inline double expit(double u) noexcept;

// Linear-interpolation order statistic (the "type 7" rule): the q-quantile of
// the sorted sample sits at fractional rank q * (n - 1).
double quantile_linear(std::span<const double> values, double q);

double mean(std::span<const double> values);

// Stateless 64-bit mixer used to derive independent seeds from (seed, index).
std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) noexcept;

}  // namespace fvol

#include <cmath>

inline double fvol::expit(double u) noexcept {
  if (u >= 0) return 1.0 / (1.0 + std::exp(-u));
  const double e = std::exp(u);
  return e / (1.0 + e);
}
