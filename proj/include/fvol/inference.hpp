#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fvol/kernels.hpp"

namespace fvol {

// Which small-ball ratio stands in for tau_{0,2}(u).
//   kBandwidth: F(u h) / F(h), so that tau(1) = 1 (default)
//   kLiteral:   F(u h) / F(u), taken as 0 where F(u) = 0
enum class TauDenominator { kBandwidth, kLiteral };

// Distances d(x, X_t) from one anchor curve to every sample curve, sorted.
class SmallBallProfile {
 public:
  SmallBallProfile(std::vector<double> distances, double bandwidth);

  std::span<const double> distances() const noexcept { return sorted_; }
  double bandwidth() const noexcept { return h_; }
  std::size_t size() const noexcept { return sorted_.size(); }

  // Fraction of distances <= u (right-continuous step function).
  double cdf(double u) const noexcept;

 private:
  std::vector<double> sorted_;
  double h_;
};

double empirical_small_ball(const SmallBallProfile& profile, double u);
double tau_hat(const SmallBallProfile& profile, double u, TauDenominator denom = TauDenominator::kBandwidth);

// W^j(1) - int_0^1 (W^j)'(u) tau(u) du, integrated exactly: tau is piecewise
// constant, so each piece contributes tau * (W^j(b) - W^j(a)).
double m_hat_moment(const Kernel& w, int j, const SmallBallProfile& profile,
                    TauDenominator denom = TauDenominator::kBandwidth);

struct CiPlugins {
  double u_hat = 0;
  double omega_hat = 0;
  double pi_hat = 0;
  double m1_hat = 0;
  double m2_hat = 0;
  double f_hat = 0;
  std::size_t n = 0;
};

struct Interval {
  double low = 0;
  double high = 0;
  double length() const noexcept { return high - low; }
  bool contains(double v) const noexcept { return low <= v && v <= high; }
};

// Relative half-widths: the intervals are u_hat * (1 -/+ half).
double ci_simplified_half_width(const CiPlugins& p, double nu);
double ci_imputed_half_width(const CiPlugins& p, double nu);

// u_hat (1 -/+ q sqrt(M2)/M1 sqrt(omega / (n F pi)))
Interval ci_simplified(const CiPlugins& p, double nu);
// u_hat (1 -/+ q sqrt(M2)/M1 sqrt(omega pi / (n F)))
Interval ci_imputed(const CiPlugins& p, double nu);

}  // namespace fvol
