#include "fvol/fvol.h"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <memory>
#include <new>
#include <string>

#include "fvol/config.hpp"
#include "fvol/csv_io.hpp"
#include "fvol/pipeline.hpp"
#include "fvol/simulation.hpp"
#include "fvol/version.hpp"

struct fvol_config {
  fvol::RunConfig cfg;
};
struct fvol_dataset {
  fvol::FdaDataset data;
};
struct fvol_estimator {
  fvol::BandwidthReport bandwidths;
  std::unique_ptr<fvol::VolatilityEstimator> est;
};
struct fvol_sim_report {
  fvol::SimReport report;
};
struct fvol_finance {
  fvol::AlignedFinanceData data;
};
struct fvol_pipeline_report {
  fvol::PipelineReport report;
  fvol::IngestLog ingest;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
fvol_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return FVOL_OK;
  } catch (const fvol::Error& e) {
    g_last_error = e.what();
    return static_cast<fvol_status>(static_cast<int>(e.code()));
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return FVOL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return FVOL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return FVOL_ERR_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (!p) fvol::fail(fvol::ErrorCode::kInvalidArgument, std::string(what) + " is null");
}

fvol::Mode to_mode(fvol_mode m) {
  switch (m) {
    case FVOL_MODE_COMPLETE: return fvol::Mode::kComplete;
    case FVOL_MODE_SIMPLIFIED: return fvol::Mode::kSimplified;
    case FVOL_MODE_IMPUTED: return fvol::Mode::kImputed;
  }
  fvol::fail(fvol::ErrorCode::kInvalidArgument, "unknown mode");
}

fvol::Curve to_curve(const fvol_estimator* est, const double* curve, size_t p) {
  require(curve, "curve");
  const auto& grid = est->est->data().grid();
  if (p != grid->size())
    fvol::fail(fvol::ErrorCode::kMismatchedGrid, "curve has " + std::to_string(p) + " values, sample grid has " +
                                                     std::to_string(grid->size()));
  return fvol::Curve(grid, std::vector<double>(curve, curve + p));
}

}  // namespace

extern "C" {

const char* fvol_last_error(void) { return g_last_error.c_str(); }

const char* fvol_status_name(fvol_status status) {
  if (status == FVOL_OK) return "Ok";
  return fvol::error_code_name(static_cast<fvol::ErrorCode>(status)).data();
}

const char* fvol_version(void) { return fvol::kVersion; }

fvol_status fvol_config_new(fvol_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new fvol_config{};
  });
}

fvol_status fvol_config_set(fvol_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    cfg->cfg.set(key, value);
  });
}

fvol_status fvol_config_load(fvol_config* cfg, const char* path) {
  return guarded([&] {
    require(cfg, "cfg");
    require(path, "path");
    fvol::load_config(path, cfg->cfg);
  });
}

void fvol_config_free(fvol_config* cfg) { delete cfg; }

fvol_status fvol_dataset_new(const double* grid, size_t p, const double* curves, size_t n, const double* y,
                             const int* delta, fvol_dataset** out) {
  return guarded([&] {
    require(out, "out");
    require(grid, "grid");
    require(curves, "curves");
    require(y, "y");
    require(delta, "delta");
    if (n == 0) fvol::fail(fvol::ErrorCode::kEmptyDataset, "no curves");
    auto g = std::make_shared<const fvol::Grid>(std::vector<double>(grid, grid + p));
    std::vector<fvol::FdaObservation> obs;
    obs.reserve(n);
    for (size_t t = 0; t < n; ++t) {
      fvol::Curve c(g, std::vector<double>(curves + t * p, curves + (t + 1) * p));
      obs.push_back(delta[t] ? fvol::FdaObservation::observed(std::move(c), y[t])
                             : fvol::FdaObservation::missing(std::move(c)));
    }
    *out = new fvol_dataset{fvol::FdaDataset(std::move(obs))};
  });
}

fvol_status fvol_dataset_load_csv(const char* curves_path, const char* responses_path, fvol_dataset** out) {
  return guarded([&] {
    require(out, "out");
    require(curves_path, "curves_path");
    require(responses_path, "responses_path");
    *out = new fvol_dataset{fvol::read_dataset(curves_path, responses_path)};
  });
}

fvol_status fvol_dataset_shape(const fvol_dataset* data, size_t* n, size_t* p, size_t* observed) {
  return guarded([&] {
    require(data, "data");
    if (n) *n = data->data.size();
    if (p) *p = data->data.grid()->size();
    if (observed) *observed = data->data.observed_count();
  });
}

void fvol_dataset_free(fvol_dataset* data) { delete data; }

fvol_status fvol_estimator_new(const fvol_dataset* data, const fvol_config* cfg, fvol_estimator** out) {
  return guarded([&] {
    require(data, "data");
    require(cfg, "cfg");
    require(out, "out");
    const auto& c = cfg->cfg;
    auto geometry = std::make_shared<const fvol::SampleGeometry>(data->data, c.estimator);
    auto e = std::make_unique<fvol_estimator>();
    e->bandwidths = fvol::select_bandwidths(data->data, c.estimator, c.cv, geometry, true);
    e->est = std::make_unique<fvol::VolatilityEstimator>(data->data, fvol::with_bandwidths(c.estimator, e->bandwidths),
                                                         geometry);
    *out = e.release();
  });
}

fvol_status fvol_estimator_bandwidths(const fvol_estimator* est, fvol_mode mode, double out[4]) {
  return guarded([&] {
    require(est, "est");
    require(out, "out");
    const auto b = est->est->config().bandwidths_for(to_mode(mode));
    out[0] = b.h1;
    out[1] = b.h2;
    out[2] = b.h3;
    out[3] = b.h4;
  });
}

fvol_status fvol_estimator_regression(const fvol_estimator* est, const double* curve, size_t p, fvol_mode mode,
                                      double* out) {
  return guarded([&] {
    require(est, "est");
    require(out, "out");
    *out = est->est->regression(to_curve(est, curve, p), to_mode(mode));
  });
}

fvol_status fvol_estimator_estimate(const fvol_estimator* est, const double* curve, size_t p, fvol_mode mode,
                                    double level, fvol_estimate* out) {
  return guarded([&] {
    require(est, "est");
    require(out, "out");
    const auto e = est->est->estimate(to_curve(est, curve, p), to_mode(mode), level);
    *out = {e.u_hat,
            e.ci_low,
            e.ci_high,
            e.components.omega_hat,
            e.components.pi_hat,
            e.components.m1_hat,
            e.components.m2_hat,
            e.components.f_hat,
            e.h2};
  });
}

fvol_status fvol_estimator_write_csv(const fvol_estimator* est, const char* eval_curves_path, fvol_mode mode,
                                     double level, const char* out_path) {
  return guarded([&] {
    require(est, "est");
    require(out_path, "out_path");
    const auto& e = *est->est;
    const auto m = to_mode(mode);
    std::vector<std::string> ids;
    std::vector<fvol::Curve> curves;
    if (eval_curves_path) {
      auto table = fvol::read_curves_csv(eval_curves_path);
      ids = std::move(table.ids);
      for (const auto& c : table.curves)
        curves.push_back(c.grid().same_as(*e.data().grid()) ? fvol::Curve(e.data().grid(), {c.values().begin(), c.values().end()})
                                                             : fvol::resample_linear(c, e.data().grid()));
    } else {
      for (size_t t = 0; t < e.data().size(); ++t) {
        ids.push_back(std::to_string(t + 1));
        curves.push_back(e.data()[t].x());
      }
    }
    std::ofstream os(out_path);
    if (!os) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + out_path);
    const auto b = e.config().bandwidths_for(m);
    os << "# fvol " << fvol::kVersion << " estimate\n";
    os << "# mode=" << fvol::mode_name(m) << " level=" << level << " n=" << e.data().size()
       << " observed=" << e.data().observed_count() << "\n";
    os << std::setprecision(10);
    os << "# bandwidths h1=" << b.h1 << " h2=" << b.h2 << " h3=" << b.h3 << " h4=" << b.h4 << "\n";
    os << "id,m_hat,u_hat,ci_low,ci_high,omega_hat,pi_hat,m1_hat,m2_hat,f_hat,status\n";
    std::size_t failed = 0;
    fvol::ErrorCode last = fvol::ErrorCode::kInternal;
    for (size_t j = 0; j < curves.size(); ++j) {
      try {
        const auto q = e.geometry().query(curves[j]);
        const auto v = e.estimate(q, m, level);
        os << ids[j] << ',' << e.regression(q, m) << ',' << v.u_hat << ',' << v.ci_low << ',' << v.ci_high << ','
           << v.components.omega_hat << ',' << v.components.pi_hat << ',' << v.components.m1_hat << ','
           << v.components.m2_hat << ',' << v.components.f_hat << ",ok\n";
      } catch (const fvol::Error& err) {
        ++failed;
        last = err.code();
        os << ids[j] << ",,,,,,,,,," << fvol::error_code_name(err.code()) << '\n';
      }
    }
    if (failed == curves.size())
      fvol::fail(last, "no curve could be estimated; see the status column of " +
                                                    std::string(out_path));
  });
}

void fvol_estimator_free(fvol_estimator* est) { delete est; }

fvol_status fvol_simulate(const fvol_config* cfg, fvol_sim_report** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = new fvol_sim_report{fvol::run_simulation(cfg->cfg.simulation())};
  });
}

fvol_status fvol_sim_report_mise(const fvol_sim_report* rep, fvol_mode mode, double* mise, double* q1, double* median,
                                 double* q3) {
  return guarded([&] {
    require(rep, "rep");
    const auto& m = rep->report.mise[static_cast<size_t>(to_mode(mode))];
    if (!m) fvol::fail(fvol::ErrorCode::kEmptyRecords, "estimator was not run");
    if (mise) *mise = m->mise;
    if (q1) *q1 = m->q1;
    if (median) *median = m->median;
    if (q3) *q3 = m->q3;
  });
}

fvol_status fvol_sim_report_coverage(const fvol_sim_report* rep, fvol_mode mode, double* coverage,
                                     double* mean_length, double* coverage_efficiency) {
  return guarded([&] {
    require(rep, "rep");
    const auto& c = rep->report.coverage[static_cast<size_t>(to_mode(mode))];
    if (!c) fvol::fail(fvol::ErrorCode::kEmptyRecords, "no interval records for this estimator");
    if (coverage) *coverage = c->coverage;
    if (mean_length) *mean_length = c->mean_length;
    if (coverage_efficiency) *coverage_efficiency = c->coverage_efficiency;
  });
}

fvol_status fvol_sim_report_efficiency(const fvol_sim_report* rep, double* out) {
  return guarded([&] {
    require(rep, "rep");
    require(out, "out");
    if (!rep->report.efficiency) fvol::fail(fvol::ErrorCode::kZeroDenominator, "efficiency is undefined");
    *out = *rep->report.efficiency;
  });
}

fvol_status fvol_sim_report_write_csv(const fvol_sim_report* rep, const char* path) {
  return guarded([&] {
    require(rep, "rep");
    require(path, "path");
    std::ofstream os(path);
    if (!os) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + path);
    fvol::write_sim_report_csv(rep->report, os);
  });
}

void fvol_sim_report_free(fvol_sim_report* rep) { delete rep; }

fvol_status fvol_finance_ingest(const char* hourly_path, const char* daily_path, const char* rv_hourly_path,
                                fvol_finance** out) {
  return guarded([&] {
    require(hourly_path, "hourly_path");
    require(daily_path, "daily_path");
    require(out, "out");
    std::optional<std::string> rv;
    if (rv_hourly_path) rv = rv_hourly_path;
    *out = new fvol_finance{fvol::ingest_intraday_files(hourly_path, daily_path, rv)};
  });
}

fvol_status fvol_finance_days(const fvol_finance* fin, size_t* kept, size_t* dropped) {
  return guarded([&] {
    require(fin, "fin");
    if (kept) *kept = fin->data.size();
    if (dropped) *dropped = fin->data.log.dropped.size();
  });
}

fvol_status fvol_finance_realized_vol(const fvol_finance* fin, double* out, size_t len) {
  return guarded([&] {
    require(fin, "fin");
    require(out, "out");
    if (len != fin->data.size())
      fvol::fail(fvol::ErrorCode::kMismatchedLength, "output holds " + std::to_string(len) + " values for " +
                                                         std::to_string(fin->data.size()) + " days");
    for (size_t t = 0; t < len; ++t) out[t] = fvol::realized_vol(fin->data.intraday_raw[t]);
  });
}

fvol_status fvol_finance_dropped(const fvol_finance* fin, size_t i, const char** date, const char** reason) {
  return guarded([&] {
    require(fin, "fin");
    const auto& d = fin->data.log.dropped;
    if (i >= d.size()) fvol::fail(fvol::ErrorCode::kInvalidArgument, "dropped-day index out of range");
    if (date) *date = d[i].first.c_str();
    if (reason) *reason = d[i].second.c_str();
  });
}

fvol_status fvol_finance_write_dataset(const fvol_finance* fin, const char* curves_path, const char* responses_path,
                                       double zeta, uint64_t seed) {
  return guarded([&] {
    require(fin, "fin");
    require(curves_path, "curves_path");
    require(responses_path, "responses_path");
    const auto& d = fin->data;
    std::vector<fvol::FdaObservation> obs;
    std::vector<bool> delta(d.size(), true);
    if (zeta > 0) {
      fvol::Rng rng(seed);
      delta = fvol::inject_mar_finance(d, zeta, rng).delta;
    }
    for (size_t t = 0; t < d.size(); ++t)
      obs.push_back(delta[t] ? fvol::FdaObservation::observed(d.intraday_curves[t], d.daily_returns[t])
                             : fvol::FdaObservation::missing(d.intraday_curves[t]));
    std::ofstream c(curves_path);
    if (!c) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + curves_path);
    fvol::write_curves_csv(c, d.dates, d.intraday_curves);
    std::ofstream r(responses_path);
    if (!r) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + responses_path);
    fvol::write_responses_csv(r, d.dates, fvol::FdaDataset(std::move(obs)));
  });
}

fvol_status fvol_finance_write_rv(const fvol_finance* fin, const char* path) {
  return guarded([&] {
    require(fin, "fin");
    require(path, "path");
    std::vector<fvol::DailyRv> rv;
    for (size_t t = 0; t < fin->data.size(); ++t)
      rv.push_back({fin->data.dates[t], fvol::realized_vol(fin->data.intraday_raw[t]), fin->data.intraday_raw[t].size(),
                    24});
    std::ofstream os(path);
    if (!os) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + path);
    fvol::write_rv_csv(rv, os);
  });
}

void fvol_finance_free(fvol_finance* fin) { delete fin; }

fvol_status fvol_rv_from_hourly_csv(const char* hourly_path, const char* out_path) {
  return guarded([&] {
    require(hourly_path, "hourly_path");
    require(out_path, "out_path");
    std::ifstream in(hourly_path);
    if (!in) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot open ") + hourly_path);
    const auto rv = fvol::realized_vol_series(in);
    std::ofstream os(out_path);
    if (!os) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + out_path);
    fvol::write_rv_csv(rv, os);
  });
}

fvol_status fvol_synthesize_finance(size_t days, double gas_sigma, double fx_hourly_sd, uint64_t seed,
                                    const char* fx_hourly_path, const char* daily_path, const char* gas_hourly_path) {
  return guarded([&] {
    require(fx_hourly_path, "fx_hourly_path");
    require(daily_path, "daily_path");
    require(gas_hourly_path, "gas_hourly_path");
    fvol::SyntheticFinanceSpec spec;
    spec.days = days;
    spec.gas_sigma = gas_sigma;
    spec.fx_hourly_sd = fx_hourly_sd;
    spec.seed = seed;
    const auto files = fvol::synthesize_finance(spec);
    const std::pair<const char*, const std::string*> outputs[] = {
        {fx_hourly_path, &files.fx_hourly}, {daily_path, &files.gas_daily}, {gas_hourly_path, &files.gas_hourly}};
    for (const auto& [path, text] : outputs) {
      std::ofstream os(path);
      if (!os) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + path);
      os << *text;
    }
  });
}

fvol_status fvol_pipeline_run(const fvol_finance* fin, const fvol_config* cfg, double zeta,
                              fvol_pipeline_report** out) {
  return guarded([&] {
    require(fin, "fin");
    require(cfg, "cfg");
    require(out, "out");
    const size_t n = fin->data.size();
    std::unique_ptr<bool[]> delta(new bool[n]);
    std::fill(delta.get(), delta.get() + n, true);
    if (zeta < 0) zeta = cfg->cfg.zeta;
    if (zeta > 0) {
      fvol::Rng rng(cfg->cfg.seed);
      const auto mar = fvol::inject_mar_finance(fin->data, zeta, rng);
      std::copy(mar.delta.begin(), mar.delta.end(), delta.get());
    }
    auto rep = fvol::run_pipeline(fin->data, {delta.get(), n}, cfg->cfg.pipeline());
    *out = new fvol_pipeline_report{std::move(rep), fin->data.log};
  });
}

fvol_status fvol_pipeline_summary_get(const fvol_pipeline_report* rep, fvol_pipeline_summary* out) {
  return guarded([&] {
    require(rep, "rep");
    require(out, "out");
    const auto& r = rep->report;
    *out = {r.days.size(), r.se.q25, r.se.q50, r.se.q75, r.mse, r.coverage, r.mean_ci_length, r.missing_rate, r.ci_undefined};
  });
}

fvol_status fvol_pipeline_report_write_csv(const fvol_pipeline_report* rep, const char* path) {
  return guarded([&] {
    require(rep, "rep");
    require(path, "path");
    std::ofstream os(path);
    if (!os) fvol::fail(fvol::ErrorCode::kIoError, std::string("cannot write ") + path);
    fvol::write_pipeline_report_csv(rep->report, rep->ingest, os);
  });
}

void fvol_pipeline_report_free(fvol_pipeline_report* rep) { delete rep; }

fvol_status fvol_realized_vol(const double* returns, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    if (n > 0) require(returns, "returns");
    *out = fvol::realized_vol({returns, n});
  });
}

fvol_status fvol_efficiency(double mise_simplified, double mise_imputed, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = fvol::efficiency(mise_simplified, mise_imputed);
  });
}

}  // extern "C"
