#include "fvol/inference.hpp"

#include <algorithm>
#include <cmath>

#include "fvol/error.hpp"
#include "fvol/stats.hpp"

namespace fvol {

SmallBallProfile::SmallBallProfile(std::vector<double> distances, double bandwidth)
    : sorted_(std::move(distances)), h_(bandwidth) {
  if (!(h_ > 0)) fail(ErrorCode::kInvalidArgument, "small-ball bandwidth must be positive");
  for (double d : sorted_)
    if (!(d >= 0) || !std::isfinite(d)) fail(ErrorCode::kInvalidArgument, "distances must be finite and >= 0");
  std::sort(sorted_.begin(), sorted_.end());
}

double SmallBallProfile::cdf(double u) const noexcept {
  if (sorted_.empty()) return 0.0;
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), u);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

double empirical_small_ball(const SmallBallProfile& profile, double u) {
  if (!(u >= 0)) fail(ErrorCode::kInvalidArgument, "small-ball radius must be >= 0");
  return profile.cdf(u);
}

double tau_hat(const SmallBallProfile& profile, double u, TauDenominator denom) {
  if (!(u >= 0 && u <= 1)) fail(ErrorCode::kInvalidArgument, "tau is defined on [0, 1]");
  const double num = profile.cdf(u * profile.bandwidth());
  if (denom == TauDenominator::kBandwidth) {
    const double f_h = profile.cdf(profile.bandwidth());
    if (f_h <= 0) fail(ErrorCode::kEmptyBall, "no sample curve within the bandwidth");
    return num / f_h;
  }
  const double f_u = profile.cdf(u);
  return f_u > 0 ? num / f_u : 0.0;
}

double m_hat_moment(const Kernel& w, int j, const SmallBallProfile& profile, TauDenominator denom) {
  if (j != 1 && j != 2) fail(ErrorCode::kInvalidArgument, "moment index must be 1 or 2");
  const double h = profile.bandwidth();
  if (profile.cdf(h) <= 0) fail(ErrorCode::kEmptyBall, "no sample curve within the bandwidth");

  std::vector<double> knots{0.0, 1.0};
  for (double d : profile.distances()) {
    const double a = d / h;
    if (a > 0 && a < 1) knots.push_back(a);
    if (denom == TauDenominator::kLiteral && d > 0 && d < 1) knots.push_back(d);
  }
  std::sort(knots.begin(), knots.end());
  knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

  double integral = 0.0;
  for (std::size_t k = 0; k + 1 < knots.size(); ++k) {
    const double a = knots[k];
    const double b = knots[k + 1];
    // tau is constant on [a, b); the midpoint keeps (d / h) * h rounding off the knot.
    const double tau = tau_hat(profile, 0.5 * (a + b), denom);
    integral += tau * (w.power_on_support(j, b) - w.power_on_support(j, a));
  }
  return w.power_on_support(j, 1.0) - integral;
}

namespace {

void check_plugins(const CiPlugins& p) {
  if (!(p.u_hat >= 0) || !std::isfinite(p.u_hat)) fail(ErrorCode::kNonPositivePlugin, "u_hat must be >= 0");
  if (!(p.omega_hat >= 0) || !std::isfinite(p.omega_hat))
    fail(ErrorCode::kNonPositivePlugin, "omega_hat must be >= 0");
  if (!(p.pi_hat > 0 && p.pi_hat <= 1)) fail(ErrorCode::kNonPositivePlugin, "pi_hat must lie in (0, 1]");
  if (!(p.m1_hat > 0)) fail(ErrorCode::kNonPositivePlugin, "M1 must be positive");
  if (!(p.m2_hat > 0)) fail(ErrorCode::kNonPositivePlugin, "M2 must be positive");
  if (!(p.f_hat > 0)) fail(ErrorCode::kNonPositivePlugin, "small-ball probability must be positive");
  if (p.n < 1) fail(ErrorCode::kNonPositivePlugin, "sample size must be >= 1");
}

Interval around(double u, double half) { return {u * (1.0 - half), u * (1.0 + half)}; }

}  // namespace

double ci_simplified_half_width(const CiPlugins& p, double nu) {
  check_plugins(p);
  const double nf = static_cast<double>(p.n) * p.f_hat;
  return upper_half_quantile(nu) * std::sqrt(p.m2_hat) / p.m1_hat * std::sqrt(p.omega_hat / (nf * p.pi_hat));
}

double ci_imputed_half_width(const CiPlugins& p, double nu) {
  check_plugins(p);
  const double nf = static_cast<double>(p.n) * p.f_hat;
  return upper_half_quantile(nu) * std::sqrt(p.m2_hat) / p.m1_hat * std::sqrt(p.omega_hat * p.pi_hat / nf);
}

Interval ci_simplified(const CiPlugins& p, double nu) { return around(p.u_hat, ci_simplified_half_width(p, nu)); }

Interval ci_imputed(const CiPlugins& p, double nu) { return around(p.u_hat, ci_imputed_half_width(p, nu)); }

}  // namespace fvol
