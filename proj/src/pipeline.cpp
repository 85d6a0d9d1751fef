#include "fvol/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "fvol/csv_io.hpp"
#include "fvol/stats.hpp"
#include "fvol/version.hpp"

namespace fvol {
namespace {

constexpr std::size_t kHours = 24;
constexpr std::uint64_t kStreamSynthetic = 3;

struct HourlyDay {
  std::array<std::optional<double>, kHours> price;
  std::vector<double> returns;  // every return whose end point falls on this day
  std::size_t present() const {
    return static_cast<std::size_t>(std::count_if(price.begin(), price.end(), [](const auto& p) { return p.has_value(); }));
  }
};

bool valid_date(const std::string& d) {
  if (d.size() != 10 || d[4] != '-' || d[7] != '-') return false;
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (d[i] < '0' || d[i] > '9') return false;
  return true;
}

std::map<std::string, HourlyDay> parse_hourly(const CsvTable& t) {
  const std::size_t tc = t.column("timestamp");
  const std::size_t pc = t.column("price");
  std::map<std::pair<std::string, int>, double> series;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& ts = t.rows[r][tc];
    const std::string date = ts.substr(0, 10);
    if (!valid_date(date) || ts.size() < 13 || (ts[10] != 'T' && ts[10] != ' ') || !std::isdigit(ts[11]) ||
        !std::isdigit(ts[12]))
      fail(ErrorCode::kSchemaError, t.source + ":" + std::to_string(t.line_numbers[r]) +
                                        ": timestamp is not ISO-8601 'YYYY-MM-DDTHH': '" + ts + "'");
    const int hour = (ts[11] - '0') * 10 + (ts[12] - '0');
    if (hour >= static_cast<int>(kHours))
      fail(ErrorCode::kSchemaError, t.source + ":" + std::to_string(t.line_numbers[r]) + ": hour out of range");
    const double p = t.number(r, pc);
    if (!(p > 0))
      fail(ErrorCode::kNonPositivePrice, t.source + ":" + std::to_string(t.line_numbers[r]) + ": price " +
                                             t.rows[r][pc] + " is not positive");
    if (!series.emplace(std::make_pair(date, hour), p).second)
      fail(ErrorCode::kSchemaError, t.source + ":" + std::to_string(t.line_numbers[r]) + ": duplicate timestamp " + ts);
  }
  std::map<std::string, HourlyDay> days;
  std::optional<double> prev;
  for (const auto& [key, price] : series) {
    HourlyDay& d = days[key.first];
    d.price[static_cast<std::size_t>(key.second)] = price;
    if (prev) {
      const std::array<double, 2> pair{*prev, price};
      d.returns.push_back(log_returns(pair)[0]);
    }
    prev = price;
  }
  return days;
}

std::map<std::string, double> parse_daily_returns(const CsvTable& t, std::set<std::string>& all_dates) {
  const std::size_t dc = t.column("date");
  const std::size_t cc = t.column("close");
  std::map<std::string, double> closes;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::string& d = t.rows[r][dc];
    if (!valid_date(d))
      fail(ErrorCode::kSchemaError, t.source + ":" + std::to_string(t.line_numbers[r]) + ": date is not YYYY-MM-DD: '" +
                                        d + "'");
    const double c = t.number(r, cc);
    if (!(c > 0))
      fail(ErrorCode::kNonPositivePrice, t.source + ":" + std::to_string(t.line_numbers[r]) + ": close " +
                                             t.rows[r][cc] + " is not positive");
    if (!closes.emplace(d, c).second)
      fail(ErrorCode::kSchemaError, t.source + ":" + std::to_string(t.line_numbers[r]) + ": duplicate date " + d);
    all_dates.insert(d);
  }
  std::map<std::string, double> returns;
  std::optional<double> prev;
  for (const auto& [d, c] : closes) {
    if (prev) {
      const std::array<double, 2> pair{*prev, c};
      returns[d] = log_returns(pair)[0];
    }
    prev = c;
  }
  return returns;
}

template <class Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, n));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

AlignedFinanceData ingest_intraday(std::istream& hourly, std::istream& daily, std::istream* rv_hourly) {
  const auto fx = parse_hourly(parse_csv(hourly, "hourly"));
  std::set<std::string> all_dates;
  for (const auto& [d, _] : fx) all_dates.insert(d);
  const auto y = parse_daily_returns(parse_csv(daily, "daily"), all_dates);
  std::optional<std::map<std::string, HourlyDay>> rv;
  if (rv_hourly) {
    rv = parse_hourly(parse_csv(*rv_hourly, "rv-hourly"));
    for (const auto& [d, _] : *rv) all_dates.insert(d);
  }

  AlignedFinanceData out;
  out.log.input_days = all_dates.size();
  out.log.curve_points = kHours - 1;
  out.log.rv_from_predictor = !rv_hourly;
  std::vector<double> pts(kHours - 1);
  for (std::size_t h = 0; h + 1 < kHours; ++h) pts[h] = static_cast<double>(h + 1);
  out.grid = std::make_shared<const Grid>(std::move(pts));

  for (const std::string& d : all_dates) {
    const auto fit = fx.find(d);
    if (fit == fx.end()) {
      out.log.dropped.emplace_back(d, "no hourly prices");
      continue;
    }
    if (fit->second.present() != kHours) {
      out.log.dropped.emplace_back(d, "incomplete hourly prices (" + std::to_string(fit->second.present()) + " of 24)");
      continue;
    }
    const auto yit = y.find(d);
    if (yit == y.end()) {
      out.log.dropped.emplace_back(d, "no daily return");
      continue;
    }
    const HourlyDay* rv_day = &fit->second;
    if (rv) {
      const auto rit = rv->find(d);
      if (rit == rv->end() || rit->second.present() != kHours) {
        out.log.dropped.emplace_back(d, "incomplete rv hourly prices");
        continue;
      }
      rv_day = &rit->second;
    }
    std::vector<double> prices(kHours);
    for (std::size_t h = 0; h < kHours; ++h) prices[h] = *fit->second.price[h];
    out.dates.push_back(d);
    out.daily_returns.push_back(yit->second);
    out.intraday_curves.emplace_back(out.grid, log_returns(prices));
    out.intraday_raw.push_back(rv_day->returns);
  }
  if (out.dates.empty()) fail(ErrorCode::kNoOverlappingDates, "no date has complete hourly prices and a daily return");

  out.log.rv_returns_min = out.log.rv_returns_max = out.intraday_raw.front().size();
  for (const auto& r : out.intraday_raw) {
    out.log.rv_returns_min = std::min(out.log.rv_returns_min, r.size());
    out.log.rv_returns_max = std::max(out.log.rv_returns_max, r.size());
  }
  return out;
}

AlignedFinanceData ingest_intraday_files(const std::string& hourly_path, const std::string& daily_path,
                                         const std::optional<std::string>& rv_hourly_path) {
  std::ifstream h(hourly_path);
  if (!h) fail(ErrorCode::kIoError, "cannot open " + hourly_path);
  std::ifstream d(daily_path);
  if (!d) fail(ErrorCode::kIoError, "cannot open " + daily_path);
  if (!rv_hourly_path) return ingest_intraday(h, d);
  std::ifstream r(*rv_hourly_path);
  if (!r) fail(ErrorCode::kIoError, "cannot open " + *rv_hourly_path);
  return ingest_intraday(h, d, &r);
}

double realized_vol(std::span<const double> hourly_returns) {
  if (hourly_returns.empty()) fail(ErrorCode::kEmptySeries, "realized volatility of an empty day");
  double s = 0;
  for (double r : hourly_returns) s += r * r;
  return s;
}

std::vector<DailyRv> realized_vol_series(std::istream& hourly) {
  const auto days = parse_hourly(parse_csv(hourly, "hourly"));
  std::vector<DailyRv> out;
  for (const auto& [d, day] : days) {
    if (day.returns.empty()) continue;
    out.push_back({d, realized_vol(day.returns), day.returns.size(), day.present()});
  }
  if (out.empty()) fail(ErrorCode::kEmptySeries, "hourly file has fewer than 2 prices");
  return out;
}

void write_rv_csv(const std::vector<DailyRv>& rv, std::ostream& os) {
  os << "# fvol " << kVersion << " rv\n" << std::setprecision(12);
  os << "date,rv,returns,hours\n";
  for (const auto& r : rv) os << r.date << ',' << r.rv << ',' << r.returns << ',' << r.hours << '\n';
}

MarDraw inject_mar_finance(const AlignedFinanceData& data, double zeta, Rng& rng) {
  if (!(zeta > 0)) fail(ErrorCode::kInvalidArgument, "zeta must be positive");
  return apply_mar(data.intraday_curves, zeta, rng);
}

PipelineOptions::PipelineOptions() {
  const auto pca = SemiMetricSpec::pca(4);
  estimator.metric_m = estimator.metric_u = estimator.metric_omega = estimator.metric_pi = pca;
}

SeQuartiles se_quartiles(std::span<const double> se) {
  if (se.empty()) fail(ErrorCode::kEmptySeries, "no squared errors");
  return {quantile_linear(se, 0.25), quantile_linear(se, 0.5), quantile_linear(se, 0.75), mean(se)};
}

PipelineReport run_pipeline(const AlignedFinanceData& data, std::span<const bool> delta, const PipelineOptions& opts) {
  const std::size_t n = data.size();
  if (n == 0) fail(ErrorCode::kEmptyDataset, "no days to estimate");
  if (delta.size() != n) fail(ErrorCode::kMismatchedLength, "one flag per day expected");
  if (!(opts.level > 0 && opts.level < 1)) fail(ErrorCode::kInvalidArgument, "CI level must lie in (0, 1)");

  std::vector<FdaObservation> obs;
  obs.reserve(n);
  const bool complete = opts.mode == Mode::kComplete;
  std::size_t missing = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (!delta[t]) ++missing;
    obs.push_back(complete || delta[t] ? FdaObservation::observed(data.intraday_curves[t], data.daily_returns[t])
                                       : FdaObservation::missing(data.intraday_curves[t]));
  }
  const FdaDataset sample(std::move(obs));

  PipelineReport rep;
  rep.mode = opts.mode;
  rep.level = opts.level;
  rep.missing_rate = complete ? 0.0 : static_cast<double>(missing) / static_cast<double>(n);
  rep.days.resize(n);

  std::optional<VolatilityEstimator> est;
  if (!opts.variance_override) {
    auto geometry = std::make_shared<const SampleGeometry>(sample, opts.estimator);
    const auto bw = select_bandwidths(sample, opts.estimator, opts.cv, geometry, opts.mode == Mode::kImputed);
    rep.bandwidths = bw.simplified;
    rep.imputed_bandwidths = bw.imputed;
    rep.log = bw.log;
    est.emplace(sample, with_bandwidths(opts.estimator, bw), geometry);
  }

  parallel_for(n, opts.threads, [&](std::size_t t) {
    PipelineDay& day = rep.days[t];
    day.date = data.dates[t];
    day.y = data.daily_returns[t];
    day.observed = sample[t].delta();
    day.rv = realized_vol(data.intraday_raw[t]);
    day.vol_rv = std::sqrt(day.rv);
    if (opts.variance_override) {
      day.u_hat = opts.variance_override(t);
      day.ci_low = day.ci_high = day.u_hat;
    } else {
      SampleGeometry::Query q;
      for (std::size_t r = 0; r < kRoleCount; ++r) {
        const auto row = est->geometry().matrix(static_cast<Role>(r)).row(t);
        q.rows[r].assign(row.begin(), row.end());
      }
      try {
        try {
          const VolEstimate e = est->estimate(q, opts.mode, opts.level);
          day.u_hat = e.u_hat;
          day.ci_low = e.ci_low;
          day.ci_high = e.ci_high;
        } catch (const Error& ci_err) {
          if (ci_err.code() != ErrorCode::kNonPositivePlugin && ci_err.code() != ErrorCode::kEmptyBall) throw;
          day.u_hat = est->variance(q, opts.mode);
          day.ci_low = day.ci_high = std::numeric_limits<double>::quiet_NaN();
          day.ci_defined = false;
        }
      } catch (const Error& err) {
        throw Error(err.code(), "day " + data.dates[t] + ": " + err.what());
      }
    }
    day.vol_hat = std::sqrt(std::max(day.u_hat, 0.0));
    day.se = (day.vol_hat - day.vol_rv) * (day.vol_hat - day.vol_rv);
    day.covered = day.ci_low <= day.rv && day.rv <= day.ci_high;
  });

  std::vector<double> se(n);
  double hits = 0;
  double len = 0;
  for (std::size_t t = 0; t < n; ++t) {
    se[t] = rep.days[t].se;
    if (!rep.days[t].ci_defined) {
      ++rep.ci_undefined;
      continue;
    }
    hits += rep.days[t].covered ? 1.0 : 0.0;
    len += rep.days[t].ci_high - rep.days[t].ci_low;
  }
  rep.se = se_quartiles(se);
  rep.mse = rep.se.mean;
  const double defined = static_cast<double>(n - rep.ci_undefined);
  rep.coverage = defined > 0 ? hits / defined : 0.0;
  rep.mean_ci_length = defined > 0 ? len / defined : 0.0;
  return rep;
}

void write_pipeline_report_csv(const PipelineReport& r, const IngestLog& ingest, std::ostream& os) {
  os << std::setprecision(10);
  os << "# fvol " << kVersion << " report\n";
  os << "# mode=" << mode_name(r.mode) << " level=" << r.level << " missing_rate=" << r.missing_rate << "\n";
  os << "# days_in=" << ingest.input_days << " days_out=" << r.days.size() << " days_dropped=" << ingest.dropped.size()
     << " curve_points=" << ingest.curve_points << " rv_returns=" << ingest.rv_returns_min << ".."
     << ingest.rv_returns_max << " rv_source=" << (ingest.rv_from_predictor ? "predictor" : "rv-hourly") << "\n";
  const auto& b = r.bandwidths;
  os << "# bandwidths h1=" << b.h1 << " h2=" << b.h2 << " h3=" << b.h3 << " h4=" << b.h4 << "\n";
  if (r.imputed_bandwidths) {
    const auto& i = *r.imputed_bandwidths;
    os << "# imputed_bandwidths h1=" << i.h1 << " h2=" << i.h2 << " h3=" << i.h3 << "\n";
  }
  os << "# se_q25=" << r.se.q25 << " se_q50=" << r.se.q50 << " se_q75=" << r.se.q75 << " mse=" << r.mse
     << " coverage=" << r.coverage << " mean_ci_length=" << r.mean_ci_length << " ci_undefined=" << r.ci_undefined << "\n";
  os << "date,y,delta,u_hat,vol_hat,rv,vol_rv,se,ci_low,ci_high,covered\n";
  for (const auto& d : r.days)
    os << d.date << ',' << d.y << ',' << (d.observed ? 1 : 0) << ',' << d.u_hat << ',' << d.vol_hat << ',' << d.rv
       << ',' << d.vol_rv << ',' << d.se << ',' << d.ci_low << ',' << d.ci_high << ',' << (d.covered ? 1 : 0) << '\n';
}

SyntheticFinanceFiles synthesize_finance(const SyntheticFinanceSpec& spec) {
  if (spec.days < 2) fail(ErrorCode::kInvalidArgument, "synthetic data needs at least 2 days");
  if (!(spec.gas_sigma > 0) || !(spec.fx_hourly_sd > 0))
    fail(ErrorCode::kInvalidArgument, "synthetic volatilities must be positive");
  if (!valid_date(spec.start_date)) fail(ErrorCode::kInvalidArgument, "start date must be YYYY-MM-DD");

  using namespace std::chrono;
  const year_month_day start{year{std::stoi(spec.start_date.substr(0, 4))},
                             month{static_cast<unsigned>(std::stoi(spec.start_date.substr(5, 2)))},
                             day{static_cast<unsigned>(std::stoi(spec.start_date.substr(8, 2)))}};
  if (!start.ok()) fail(ErrorCode::kInvalidArgument, "start date is not a calendar date");

  Rng rng(derive_seed(spec.seed, kStreamSynthetic, 0));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double gas_sd = spec.gas_sigma / std::sqrt(static_cast<double>(kHours));
  double fx = 1.1;
  double gas = 3.0;

  std::ostringstream fx_os, daily_os, gas_os;
  fx_os << "timestamp,price\n" << std::setprecision(17);
  gas_os << "timestamp,price\n" << std::setprecision(17);
  daily_os << "date,close\n" << std::setprecision(17);
  for (std::size_t k = 0; k < spec.days; ++k) {
    const year_month_day ymd{sys_days{start} + days{static_cast<int>(k)}};
    char date[32];
    std::snprintf(date, sizeof date, "%04d-%02u-%02u", static_cast<int>(ymd.year()), static_cast<unsigned>(ymd.month()),
                  static_cast<unsigned>(ymd.day()));
    for (std::size_t h = 0; h < kHours; ++h) {
      fx *= std::exp(spec.fx_hourly_sd * normal(rng) / 100.0);
      gas *= std::exp(gas_sd * normal(rng) / 100.0);
      char hh[3];
      std::snprintf(hh, sizeof hh, "%02zu", h);
      fx_os << date << 'T' << hh << ":00:00," << fx << '\n';
      gas_os << date << 'T' << hh << ":00:00," << gas << '\n';
    }
    daily_os << date << ',' << gas << '\n';
  }
  return {fx_os.str(), daily_os.str(), gas_os.str()};
}

}  // namespace fvol
