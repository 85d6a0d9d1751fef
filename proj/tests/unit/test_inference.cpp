#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "fvol/error.hpp"
#include "fvol/inference.hpp"
#include "fvol/stats.hpp"
#include "oracle.hpp"

using namespace fvol;
using Catch::Matchers::WithinAbs;

namespace {

CiPlugins example_plugins() {
  CiPlugins p;
  p.u_hat = 2.0;
  p.omega_hat = 1.0;
  p.pi_hat = 0.5;
  p.m1_hat = 1.5;
  p.m2_hat = 2.25;
  p.f_hat = 1.0;
  p.n = 100;
  return p;
}

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::vector<double> random_distances(std::mt19937_64& rng, std::size_t n) {
  std::gamma_distribution<double> g(2.0, 0.5);
  std::vector<double> d(n);
  for (double& v : d) v = g(rng);
  return d;
}

}  // namespace

TEST_CASE("empirical_small_ball examples", "[inference][small_ball]") {
  const SmallBallProfile p({0.3, 0.1, 0.2}, 0.25);
  CHECK_THAT(empirical_small_ball(p, 0.25), WithinAbs(2.0 / 3.0, 1e-15));
  CHECK(empirical_small_ball(p, 0.0) == 0.0);
  CHECK(empirical_small_ball(p, 0.3) == 1.0);
  CHECK(empirical_small_ball(p, 5.0) == 1.0);
  CHECK_THAT(empirical_small_ball(p, 0.2), WithinAbs(2.0 / 3.0, 1e-15));
}

TEST_CASE("tau_hat examples", "[inference][tau]") {
  const SmallBallProfile p({0.05, 0.1, 0.2, 0.4}, 0.4);
  CHECK(tau_hat(p, 1.0) == 1.0);
  CHECK_THAT(tau_hat(p, 0.5), WithinAbs(0.75, 1e-15));
  const SmallBallProfile zero({0, 0, 0}, 0.3);
  for (double u : {0.01, 0.4, 1.0}) CHECK(tau_hat(zero, u) == 1.0);
  const SmallBallProfile empty({0.5, 0.6}, 0.3);
  CHECK(code_of([&] { tau_hat(empty, 0.5); }) == ErrorCode::kEmptyBall);
  CHECK(code_of([&] { m_hat_moment(Kernel(), 1, empty); }) == ErrorCode::kEmptyBall);
}

TEST_CASE("tau_hat is a nondecreasing ratio on [0, 1]", "[inference][tau][property]") {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 100; ++rep) {
    const auto d = random_distances(rng, 40);
    const SmallBallProfile p(d, 1.0);
    if (empirical_small_ball(p, 1.0) == 0) continue;
    double prev = 0;
    for (int i = 0; i <= 200; ++i) {
      const double t = tau_hat(p, i / 200.0);
      CHECK(t >= prev);
      CHECK(t <= 1.0);
      prev = t;
    }
    CHECK(tau_hat(p, 1.0) == 1.0);
  }
}

TEST_CASE("m_hat_moment examples", "[inference][moment]") {
  const Kernel q(KernelFamily::kQuadratic);
  const SmallBallProfile zero({0, 0, 0, 0}, 0.5);
  CHECK_THAT(m_hat_moment(q, 1, zero), WithinAbs(1.5, 1e-12));
  CHECK_THAT(m_hat_moment(q, 2, zero), WithinAbs(2.25, 1e-12));
}

TEST_CASE("m_hat_moment matches fine quadrature and is positive", "[inference][moment][property]") {
  std::mt19937_64 rng(43);
  for (const char* family : {"quadratic", "triangular", "uniform"}) {
    const Kernel k = Kernel::from_name(family);
    for (int rep = 0; rep < 30; ++rep) {
      const auto d = random_distances(rng, 30);
      const double h = 0.4 + rep * 0.05;
      const SmallBallProfile p(d, h);
      if (empirical_small_ball(p, h) == 0) continue;
      for (int j : {1, 2}) {
        const double exact = m_hat_moment(k, j, p);
        CHECK(exact > 0);
        CHECK_THAT(exact, WithinAbs(oracle::moment(family, j, d, h), 1e-6));
        const SmallBallProfile flat(std::vector<double>(d.size(), 0.0), h);
        CHECK(exact <= m_hat_moment(k, j, flat) + 1e-12);
      }
    }
  }
}

TEST_CASE("ci_simplified and ci_imputed examples", "[inference][ci]") {
  const auto p = example_plugins();
  const Interval s = ci_simplified(p, 0.05);
  CHECK_THAT(s.low, WithinAbs(1.44562, 1e-4));
  CHECK_THAT(s.high, WithinAbs(2.55438, 1e-4));
  const Interval i = ci_imputed(p, 0.05);
  CHECK_THAT(i.low, WithinAbs(1.72281, 1e-4));
  CHECK_THAT(i.high, WithinAbs(2.27719, 1e-4));

  const Interval narrow = ci_simplified(p, 1.0 - 1e-12);
  CHECK_THAT(narrow.low, WithinAbs(2.0, 1e-9));
  CHECK_THAT(narrow.high, WithinAbs(2.0, 1e-9));

  auto half = p;
  half.pi_hat = 0.25;
  CHECK_THAT(ci_simplified_half_width(half, 0.05), WithinAbs(std::sqrt(2.0) * ci_simplified_half_width(p, 0.05), 1e-12));

  auto one = p;
  one.pi_hat = 1.0;
  CHECK(ci_imputed_half_width(one, 0.05) == ci_simplified_half_width(one, 0.05));

  auto bad = p;
  bad.pi_hat = 0.0;
  CHECK(code_of([&] { ci_simplified(bad, 0.05); }) == ErrorCode::kNonPositivePlugin);
  bad = p;
  bad.f_hat = 0.0;
  CHECK(code_of([&] { ci_imputed(bad, 0.05); }) == ErrorCode::kNonPositivePlugin);
  bad = p;
  bad.n = 0;
  CHECK(code_of([&] { ci_imputed(bad, 0.05); }) == ErrorCode::kNonPositivePlugin);
}

TEST_CASE("CI half-widths are monotone in pi and symmetric around u", "[inference][ci][property]") {
  std::mt19937_64 rng(47);
  std::uniform_real_distribution<double> u(0.05, 3.0);
  std::uniform_real_distribution<double> pi(0.05, 1.0);
  for (int rep = 0; rep < 500; ++rep) {
    CiPlugins p{u(rng), u(rng), pi(rng), u(rng), u(rng), pi(rng), static_cast<std::size_t>(10 + rep)};
    const double nu = 0.01 + 0.2 * pi(rng);
    for (const Interval& ci : {ci_simplified(p, nu), ci_imputed(p, nu)}) {
      CHECK(ci.low <= p.u_hat);
      CHECK(p.u_hat <= ci.high);
      CHECK_THAT((ci.high - p.u_hat) / p.u_hat, WithinAbs((p.u_hat - ci.low) / p.u_hat, 1e-12));
    }
    auto lower = p;
    lower.pi_hat = p.pi_hat * 0.7;
    CHECK(ci_simplified_half_width(lower, nu) > ci_simplified_half_width(p, nu));
    CHECK(ci_imputed_half_width(lower, nu) < ci_imputed_half_width(p, nu));
  }
}

TEST_CASE("normal_quantile accuracy", "[inference][stats]") {
  CHECK_THAT(upper_half_quantile(0.05), WithinAbs(1.959963984540054, 1e-9));
  CHECK_THAT(normal_quantile(0.5), WithinAbs(0.0, 1e-12));
  CHECK_THAT(normal_quantile(0.975), WithinAbs(1.959963984540054, 1e-9));
  CHECK_THAT(normal_quantile(1e-6), WithinAbs(-4.753424308822899, 1e-8));
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    const double x = normal_quantile(p);
    CHECK_THAT(0.5 * std::erfc(-x / std::sqrt(2.0)), WithinAbs(p, 1e-12));
    CHECK_THAT(normal_quantile(1 - p), WithinAbs(-x, 1e-9));
  }
  REQUIRE_THROWS_AS(normal_quantile(0.0), Error);
  REQUIRE_THROWS_AS(normal_quantile(1.0), Error);
}
