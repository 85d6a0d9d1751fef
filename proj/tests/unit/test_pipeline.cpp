#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fvol/error.hpp"
#include "fvol/pipeline.hpp"

using namespace fvol;
using Catch::Matchers::WithinAbs;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

// Hourly prices for the given dates from price(day_index, hour).
template <class P>
std::string hourly_csv(const std::vector<std::string>& dates, P price) {
  std::ostringstream os;
  os.precision(17);
  os << "timestamp,price\n";
  for (std::size_t d = 0; d < dates.size(); ++d)
    for (int h = 0; h < 24; ++h) {
      char hh[4];
      std::snprintf(hh, sizeof hh, "%02d", h);
      os << dates[d] << 'T' << hh << ":00:00," << price(d, h) << '\n';
    }
  return os.str();
}

std::string daily_csv(const std::vector<std::string>& dates, const std::vector<double>& closes) {
  std::ostringstream os;
  os.precision(17);
  os << "date,close\n";
  for (std::size_t d = 0; d < dates.size(); ++d) os << dates[d] << ',' << closes[d] << '\n';
  return os.str();
}

AlignedFinanceData ingest(const std::string& hourly, const std::string& daily) {
  std::istringstream h(hourly), d(daily);
  return ingest_intraday(h, d);
}

AlignedFinanceData synthetic(std::size_t days, std::uint64_t seed) {
  SyntheticFinanceSpec spec;
  spec.days = days;
  spec.seed = seed;
  const auto files = synthesize_finance(spec);
  std::istringstream h(files.fx_hourly), d(files.gas_daily), r(files.gas_hourly);
  return ingest_intraday(h, d, &r);
}

// std::vector<bool> has no contiguous storage to span.
struct Flags {
  explicit Flags(const std::vector<bool>& v) : data(new bool[v.size()]), n(v.size()) {
    std::copy(v.begin(), v.end(), data.get());
  }
  operator std::span<const bool>() const { return {data.get(), n}; }
  std::unique_ptr<bool[]> data;
  std::size_t n;
};

}  // namespace

TEST_CASE("ingest_intraday examples", "[pipeline][ingest]") {
  const std::vector<std::string> dates{"2021-01-04", "2021-01-05", "2021-01-06"};
  const auto flat = ingest(hourly_csv(dates, [](std::size_t, int) { return 1.3; }), daily_csv(dates, {2, 2, 2}));
  // The first date has no earlier close.
  REQUIRE(flat.size() == 2);
  CHECK(flat.log.input_days == 3);
  REQUIRE(flat.log.dropped.size() == 1);
  CHECK(flat.log.dropped[0].first == "2021-01-04");
  for (const auto& c : flat.intraday_curves)
    for (double v : c.values()) CHECK(v == 0.0);
  CHECK(flat.daily_returns == std::vector<double>{0.0, 0.0});
  CHECK(flat.grid->size() == 23);
  CHECK(flat.grid->front() == 1.0);
  CHECK(flat.grid->back() == 23.0);

  const auto trend = ingest(hourly_csv(dates, [](std::size_t d, int h) { return std::exp((24.0 * d + h) / 100.0); }),
                            daily_csv(dates, {1, 1, 1}));
  for (const auto& c : trend.intraday_curves)
    for (double v : c.values()) CHECK_THAT(v, WithinAbs(1.0, 1e-9));
  // RV returns include the overnight return ending at hour 0.
  CHECK(trend.intraday_raw[0].size() == 24);
  CHECK(trend.log.rv_returns_max == 24);

  const std::vector<std::string> two{"2021-01-05", "2021-01-06"};
  const auto gap = ingest(hourly_csv(dates, [](std::size_t, int) { return 1.0; }), daily_csv(two, {1, 1}));
  CHECK(gap.size() == 1);
  CHECK(gap.log.input_days == gap.size() + gap.log.dropped.size());
  CHECK(std::any_of(gap.log.dropped.begin(), gap.log.dropped.end(),
                    [](const auto& d) { return d.first == "2021-01-04" && d.second == "no daily return"; }));
}

TEST_CASE("ingest_intraday drops incomplete days and rejects bad rows", "[pipeline][ingest]") {
  const std::vector<std::string> dates{"2021-01-04", "2021-01-05", "2021-01-06", "2021-01-07"};
  std::string hourly = hourly_csv(dates, [](std::size_t d, int h) { return 1.0 + 0.01 * d + 0.001 * h; });
  const std::string cut = "2021-01-06T07:00:00,";
  const auto pos = hourly.find(cut);
  hourly.erase(pos, hourly.find('\n', pos) - pos + 1);
  const auto data = ingest(hourly, daily_csv(dates, {1, 1.1, 1.2, 1.3}));
  CHECK(data.dates == std::vector<std::string>{"2021-01-05", "2021-01-07"});
  CHECK(data.log.input_days == data.size() + data.log.dropped.size());
  CHECK(std::any_of(data.log.dropped.begin(), data.log.dropped.end(), [](const auto& d) {
    return d.first == "2021-01-06" && d.second.find("23 of 24") != std::string::npos;
  }));
  CHECK_THAT(data.daily_returns[0], WithinAbs(100 * std::log(1.1), 1e-9));

  CHECK(code_of([] { ingest("timestamp,price\n2021-01-04T00:00:00,-1\n", "date,close\n"); }) ==
        ErrorCode::kNonPositivePrice);
  CHECK(code_of([] { ingest("timestamp,price\n04/01/2021,1\n", "date,close\n"); }) == ErrorCode::kSchemaError);
  CHECK(code_of([] { ingest("time,price\n2021-01-04T00,1\n", "date,close\n"); }) == ErrorCode::kSchemaError);
  CHECK(code_of([] { ingest("timestamp,price\n2021-01-04T00,1\n", "date,close\n2021-01-04,1\n"); }) ==
        ErrorCode::kNoOverlappingDates);
}

TEST_CASE("realized_vol examples", "[pipeline][rv]") {
  const std::vector<double> half(24, 0.5);
  CHECK(realized_vol(half) == 6.0);
  CHECK(realized_vol(std::vector<double>(24, 0.0)) == 0.0);
  CHECK(code_of([] { realized_vol(std::span<const double>{}); }) == ErrorCode::kEmptySeries);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> z;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> r(24);
    double naive = 0;
    for (double& v : r) {
      v = z(rng);
      naive += v * v;
    }
    CHECK(realized_vol(r) == naive);
  }

  std::istringstream hourly(hourly_csv({"2021-01-04", "2021-01-05"}, [](std::size_t d, int h) {
    return std::exp((24.0 * d + h) / 200.0);
  }));
  const auto series = realized_vol_series(hourly);
  REQUIRE(series.size() == 2);
  CHECK(series[0].returns == 23);
  CHECK(series[1].returns == 24);
  CHECK_THAT(series[1].rv, WithinAbs(24 * 0.25, 1e-9));
}

TEST_CASE("se_quartiles examples", "[pipeline][se]") {
  const std::vector<double> se{1, 2, 3, 4};
  const auto q = se_quartiles(se);
  CHECK_THAT(q.q25, WithinAbs(1.75, 1e-12));
  CHECK_THAT(q.q50, WithinAbs(2.5, 1e-12));
  CHECK_THAT(q.q75, WithinAbs(3.25, 1e-12));
  CHECK_THAT(q.mean, WithinAbs(2.5, 1e-12));
  const std::vector<double> one{0.7};
  const auto s = se_quartiles(one);
  CHECK((s.q25 == 0.7 && s.q50 == 0.7 && s.q75 == 0.7 && s.mean == 0.7));
  const std::vector<double> perm{4, 1, 3, 2};
  const auto p = se_quartiles(perm);
  CHECK((p.q25 == q.q25 && p.q50 == q.q50 && p.q75 == q.q75));
  CHECK(code_of([] { se_quartiles(std::span<const double>{}); }) == ErrorCode::kEmptySeries);
}

TEST_CASE("inject_mar_finance examples", "[pipeline][mar]") {
  const auto data = synthetic(400, 3);
  Rng a(9), b(9);
  const auto low = inject_mar_finance(data, 0.8, a);
  const auto high = inject_mar_finance(data, 2.0, b);
  std::size_t obs_low = 0, obs_high = 0;
  for (std::size_t t = 0; t < data.size(); ++t) {
    obs_low += low.delta[t];
    obs_high += high.delta[t];
    // Coupled uniforms: observed at zeta = 0.8 implies observed at zeta = 2.
    if (low.delta[t]) CHECK(high.delta[t]);
  }
  CHECK(obs_high >= obs_low);

  AlignedFinanceData zero = data;
  for (auto& c : zero.intraday_curves) c = Curve(c.grid_ptr(), std::vector<double>(c.size(), 0.0));
  Rng c(1);
  for (double p : inject_mar_finance(zero, 1.0, c).pi) CHECK(p == 0.5);
  Rng d(1);
  const auto sure = inject_mar_finance(data, 1e6, d);
  CHECK(std::all_of(sure.delta.begin(), sure.delta.end(), [](bool v) { return v; }));
  Rng e(1);
  CHECK(code_of([&] { inject_mar_finance(data, 0.0, e); }) == ErrorCode::kInvalidArgument);

  double prev = 1.0;
  const auto big = synthetic(10000, 4);
  for (double zeta : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    Rng r(11);
    const auto draw = inject_mar_finance(big, zeta, r);
    const double rate =
        static_cast<double>(std::count(draw.delta.begin(), draw.delta.end(), false)) / static_cast<double>(big.size());
    CHECK(rate < prev);
    prev = rate;
  }
}

TEST_CASE("run_pipeline examples", "[pipeline][run]") {
  const auto data = synthetic(150, 5);
  const Flags all(std::vector<bool>(data.size(), true));

  PipelineOptions exact;
  exact.mode = Mode::kSimplified;
  exact.variance_override = [&](std::size_t t) { return realized_vol(data.intraday_raw[t]); };
  const auto rep = run_pipeline(data, all, exact);
  CHECK(rep.mse == 0.0);
  for (const auto& d : rep.days) CHECK(d.se == 0.0);

  PipelineOptions simp;
  simp.mode = Mode::kSimplified;
  simp.estimator.knn_override = 5;
  PipelineOptions comp = simp;
  comp.mode = Mode::kComplete;
  const auto a = run_pipeline(data, all, simp);
  const auto b = run_pipeline(data, all, comp);
  CHECK(a.mse == b.mse);
  CHECK(a.coverage == b.coverage);
  for (std::size_t t = 0; t < a.days.size(); ++t) {
    CHECK(a.days[t].u_hat == b.days[t].u_hat);
    CHECK(a.days[t].se >= 0);
    if (a.days[t].ci_defined) CHECK(a.days[t].ci_low == b.days[t].ci_low);
  }
  CHECK(a.se.q25 <= a.se.q50);
  CHECK(a.se.q50 <= a.se.q75);

  Rng rng(21);
  const auto draw = inject_mar_finance(data, 0.8, rng);
  PipelineOptions npi = simp;
  npi.mode = Mode::kImputed;
  npi.threads = 1;
  const auto one = run_pipeline(data, Flags(draw.delta), npi);
  npi.threads = 3;
  const auto three = run_pipeline(data, Flags(draw.delta), npi);
  CHECK(one.mse == three.mse);
  CHECK(one.missing_rate > 0);
  std::ostringstream os;
  write_pipeline_report_csv(one, data.log, os);
  CHECK(os.str().find("date,") != std::string::npos);

  CHECK(code_of([&] { run_pipeline(data, Flags(std::vector<bool>(3, true)), simp); }) == ErrorCode::kMismatchedLength);
}
