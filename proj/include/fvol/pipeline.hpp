#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fvol/bandwidth.hpp"
#include "fvol/estimators.hpp"
#include "fvol/simulation.hpp"

namespace fvol {

struct IngestLog {
  std::size_t input_days = 0;  // distinct dates across all input files
  std::vector<std::pair<std::string, std::string>> dropped;  // (date, reason)
  std::size_t curve_points = 0;
  std::size_t rv_returns_min = 0;
  std::size_t rv_returns_max = 0;
  bool rv_from_predictor = true;
};

// One row per retained date. Returns are in percent.
struct AlignedFinanceData {
  std::vector<std::string> dates;
  std::vector<double> daily_returns;
  GridPtr grid;                                 // hours 1..23
  std::vector<Curve> intraday_curves;           // within-day hourly returns
  std::vector<std::vector<double>> intraday_raw;  // every hourly return ending on that day, for RV
  IngestLog log;

  std::size_t size() const noexcept { return dates.size(); }
};

// Hourly CSV `timestamp,price` (ISO-8601, one price per hour 00..23) and daily
// CSV `date,close`. A day keeps its curve when all 24 hourly prices are present
// and the daily file has a close for it and for an earlier date. RV returns come
// from `rv_hourly` when given, otherwise from the predictor's hourly prices.
AlignedFinanceData ingest_intraday(std::istream& hourly, std::istream& daily, std::istream* rv_hourly = nullptr);
AlignedFinanceData ingest_intraday_files(const std::string& hourly_path, const std::string& daily_path,
                                         const std::optional<std::string>& rv_hourly_path = std::nullopt);

// Sum of squared returns.
double realized_vol(std::span<const double> hourly_returns);

struct DailyRv {
  std::string date;
  double rv = 0;
  std::size_t returns = 0;  // hourly returns ending on the date
  std::size_t hours = 0;    // hourly prices on the date
};
// Realized volatility of every date of an hourly `timestamp,price` file.
std::vector<DailyRv> realized_vol_series(std::istream& hourly);
void write_rv_csv(const std::vector<DailyRv>& rv, std::ostream& os);

// delta_t ~ Bernoulli(expit(2 zeta int x_t^2)), one uniform per day in order.
MarDraw inject_mar_finance(const AlignedFinanceData& data, double zeta, Rng& rng);

struct PipelineOptions {
  Mode mode = Mode::kImputed;
  double level = 0.05;
  EstimatorConfig estimator;  // semi-metrics default to PCA with 4 components
  CvOptions cv;
  std::size_t threads = 1;
  // Replaces the variance estimate at day t (test hook).
  std::function<double(std::size_t)> variance_override;

  PipelineOptions();
};

struct PipelineDay {
  std::string date;
  double y = 0;
  bool observed = true;
  double u_hat = 0;
  double vol_hat = 0;  // sqrt(u_hat)
  double rv = 0;
  double vol_rv = 0;   // sqrt(rv)
  double se = 0;       // (vol_hat - vol_rv)^2
  double ci_low = 0;
  double ci_high = 0;
  bool covered = false;  // rv inside the interval
  bool ci_defined = true;  // false when a plug-in vanished; bounds are NaN
};

struct SeQuartiles {
  double q25 = 0;
  double q50 = 0;
  double q75 = 0;
  double mean = 0;
};
SeQuartiles se_quartiles(std::span<const double> se);

struct PipelineReport {
  Mode mode = Mode::kImputed;
  double level = 0.05;
  std::vector<PipelineDay> days;
  SeQuartiles se;
  double mse = 0;
  double coverage = 0;
  double mean_ci_length = 0;   // over days with an interval
  std::size_t ci_undefined = 0;
  double missing_rate = 0;
  Bandwidths bandwidths;
  std::optional<Bandwidths> imputed_bandwidths;
  std::vector<std::string> log;
};

// In-sample volatility estimate at every day's own curve. The complete mode
// ignores delta and uses every response.
PipelineReport run_pipeline(const AlignedFinanceData& data, std::span<const bool> delta, const PipelineOptions& opts);

void write_pipeline_report_csv(const PipelineReport& report, const IngestLog& ingest, std::ostream& os);

// Synthetic inputs: FX hourly prices with iid Gaussian returns, commodity hourly
// prices with constant daily variance gas_sigma^2 spread evenly over 24 hours,
// and commodity daily closes equal to the last hourly price of each day.
struct SyntheticFinanceSpec {
  std::size_t days = 500;
  double gas_sigma = 2.0;       // percent per day
  double fx_hourly_sd = 0.133;  // percent per hour
  std::uint64_t seed = 1;
  std::string start_date = "2020-01-01";
};
struct SyntheticFinanceFiles {
  std::string fx_hourly;
  std::string gas_daily;
  std::string gas_hourly;
};
SyntheticFinanceFiles synthesize_finance(const SyntheticFinanceSpec& spec);

}  // namespace fvol
