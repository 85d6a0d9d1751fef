#include "fvol/simulation.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <memory>
#include <sstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <thread>

#include "fvol/stats.hpp"
#include "fvol/version.hpp"

namespace fvol {
namespace {

constexpr std::uint64_t kStreamReplication = 1;
constexpr std::uint64_t kStreamEvalGrid = 2;

std::size_t mode_index(Mode m) noexcept { return static_cast<std::size_t>(m); }

}  // namespace

void SimConfig::validate() const {
  if (n < 10) fail(ErrorCode::kInvalidArgument, "simulation needs n >= 10");
  if (replications < 1) fail(ErrorCode::kInvalidArgument, "simulation needs B >= 1");
  if (eval_size < 1) fail(ErrorCode::kInvalidArgument, "simulation needs J >= 1");
  if (!(eta > 0)) fail(ErrorCode::kInvalidArgument, "MAR strength eta must be positive");
  if (error_model < 1 || error_model > 4) fail(ErrorCode::kInvalidArgument, "error model must be 1..4");
  if (grid_size < 3) fail(ErrorCode::kGridTooShort, "simulation grid needs at least 3 points");
  if (!(nu > 0 && nu < 1)) fail(ErrorCode::kInvalidArgument, "CI level must lie in (0, 1)");
  estimator.validate();
}

Curve dgp_curve(GridPtr grid, int a, double omega) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double c = std::cos(M_PI * grid->points()[i] * omega);
    v[i] = a * (2.0 - c) + (1 - a) * c;
  }
  return Curve(std::move(grid), std::move(v));
}

std::vector<Curve> gen_curves(std::size_t count, const GridPtr& grid, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<Curve> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double omega = normal(rng);
    const int a = coin(rng) ? 1 : 0;
    out.push_back(dgp_curve(grid, a, omega));
  }
  return out;
}

std::vector<Curve> gen_curves(std::size_t count, std::size_t grid_size, Rng& rng) {
  return gen_curves(count, Grid::uniform(-1.0, 1.0, grid_size), rng);
}

double true_m(const Curve& x) {
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = x.grid().points()[i] * x[i];
  return trapezoid_integrate(f, x.grid());
}

double true_U(const Curve& x) {
  std::vector<double> f(x.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = std::abs(x.grid().points()[i]) * x[i] * x[i];
  return trapezoid_integrate(f, x.grid());
}

double error_model_coefficient(int model) {
  switch (model) {
    case 1: return 0.0;
    case 2: return 0.5;
    case 3: return -0.25;
    case 4: return 0.5;
  }
  fail(ErrorCode::kInvalidArgument, "error model must be 1..4");
}

std::vector<double> gen_errors(std::size_t n, int model, Rng& rng) { return gen_errors(n, model, rng, nullptr); }

std::vector<double> gen_errors(std::size_t n, int model, Rng& rng, std::vector<double>* innovations) {
  if (n < 1) fail(ErrorCode::kInvalidArgument, "need at least one error");
  const double phi = error_model_coefficient(model);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<double> eps(n);
  if (innovations) innovations->assign(n, 0.0);

  if (model == 4) {
    double e = 0.0;
    for (int k = 0; k < 50; ++k) e = phi * e + (coin(rng) ? 1.0 : -1.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double xi = coin(rng) ? 1.0 : -1.0;
      e = phi * e + xi;
      eps[t] = e;
      if (innovations) (*innovations)[t] = xi;
    }
    return eps;
  }
  if (model == 1) {
    for (std::size_t t = 0; t < n; ++t) {
      eps[t] = normal(rng);
      if (innovations) (*innovations)[t] = eps[t];
    }
    return eps;
  }
  eps[0] = normal(rng) / std::sqrt(1.0 - phi * phi);
  for (std::size_t t = 1; t < n; ++t) {
    const double xi = normal(rng);
    eps[t] = phi * eps[t - 1] + xi;
    if (innovations) (*innovations)[t] = xi;
  }
  return eps;
}

double mar_probability(const Curve& x, double strength) {
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = x[i] * x[i];
  return expit(2.0 * strength * trapezoid_integrate(sq, x.grid()));
}

MarDraw apply_mar(std::span<const Curve> curves, double eta, Rng& rng) {
  if (!(eta > 0)) fail(ErrorCode::kInvalidArgument, "MAR strength must be positive");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  MarDraw out;
  out.delta.reserve(curves.size());
  out.pi.reserve(curves.size());
  for (const Curve& c : curves) {
    const double p = mar_probability(c, eta);
    out.pi.push_back(p);
    out.delta.push_back(unif(rng) < p);
  }
  return out;
}

ReplicationRecord run_replication(const SimConfig& cfg, std::span<const Curve> eval_grid, std::size_t b,
                                  const SimHooks* hooks) {
  Rng rng(derive_seed(cfg.seed, kStreamReplication, b));
  const auto grid = Grid::uniform(-1.0, 1.0, cfg.grid_size);
  const auto curves = gen_curves(cfg.n, grid, rng);
  const auto eps = gen_errors(cfg.n, cfg.error_model, rng);
  const auto mar = apply_mar(curves, cfg.eta, rng);

  std::vector<FdaObservation> obs;
  obs.reserve(cfg.n);
  for (std::size_t t = 0; t < cfg.n; ++t)
    obs.push_back(FdaObservation::observed(curves[t], true_m(curves[t]) + std::sqrt(true_U(curves[t])) * eps[t]));
  const FdaDataset complete(std::move(obs));
  const std::unique_ptr<bool[]> flags(new bool[cfg.n]);
  std::copy(mar.delta.begin(), mar.delta.end(), flags.get());
  const FdaDataset masked = complete.with_missing({flags.get(), cfg.n});

  ReplicationRecord rec;
  rec.index = b;
  rec.missing_rate = 1.0 - static_cast<double>(masked.observed_count()) / static_cast<double>(cfg.n);

  std::vector<double> truth(eval_grid.size());
  for (std::size_t j = 0; j < eval_grid.size(); ++j) truth[j] = true_U(eval_grid[j]);

  if (hooks && hooks->variance_override) {
    for (Mode m : {Mode::kComplete, Mode::kSimplified, Mode::kImputed}) {
      if (!cfg.modes[mode_index(m)]) continue;
      EstimatorRecord er;
      double sse = 0;
      for (std::size_t j = 0; j < eval_grid.size(); ++j) {
        const double u = hooks->variance_override(eval_grid[j]);
        sse += (u - truth[j]) * (u - truth[j]);
        er.ci.push_back({u == truth[j], 0.0});
      }
      er.mse = sse / static_cast<double>(eval_grid.size());
      rec.modes[mode_index(m)] = std::move(er);
    }
    return rec;
  }

  const auto geometry = std::make_shared<const SampleGeometry>(complete, cfg.estimator);
  std::vector<SampleGeometry::Query> queries;
  queries.reserve(eval_grid.size());
  for (const Curve& x : eval_grid) queries.push_back(geometry->query(x));

  auto evaluate = [&](const VolatilityEstimator& est, Mode m) {
    EstimatorRecord er;
    double sse = 0;
    for (std::size_t j = 0; j < eval_grid.size(); ++j) {
      try {
        double u = 0;
        try {
          const VolEstimate e = est.estimate(queries[j], m, cfg.nu);
          u = e.u_hat;
          er.ci.push_back({e.ci_low <= truth[j] && truth[j] <= e.ci_high, e.ci_high - e.ci_low});
        } catch (const Error& ci_err) {
          if (ci_err.code() != ErrorCode::kNonPositivePlugin && ci_err.code() != ErrorCode::kEmptyBall) throw;
          u = est.variance(queries[j], m);
          er.ci.push_back({false, 0.0, false});
        }
        sse += (u - truth[j]) * (u - truth[j]);
      } catch (const Error& err) {
        throw Error(err.code(), "replication " + std::to_string(b) + ", evaluation curve " + std::to_string(j) +
                                    ", " + std::string(mode_name(m)) + " estimator: " + err.what());
      }
    }
    er.mse = sse / static_cast<double>(eval_grid.size());
    rec.modes[mode_index(m)] = std::move(er);
  };

  if (cfg.modes[mode_index(Mode::kComplete)]) {
    const auto bw = select_bandwidths(complete, cfg.estimator, cfg.cv, geometry, false);
    const VolatilityEstimator est(complete, with_bandwidths(cfg.estimator, bw), geometry);
    rec.bandwidths[mode_index(Mode::kComplete)] = bw.simplified;
    evaluate(est, Mode::kComplete);
  }
  const bool simp = cfg.modes[mode_index(Mode::kSimplified)];
  const bool imp = cfg.modes[mode_index(Mode::kImputed)];
  if (simp || imp) {
    const auto bw = select_bandwidths(masked, cfg.estimator, cfg.cv, geometry, imp);
    const VolatilityEstimator est(masked, with_bandwidths(cfg.estimator, bw), geometry);
    if (simp) {
      rec.bandwidths[mode_index(Mode::kSimplified)] = bw.simplified;
      evaluate(est, Mode::kSimplified);
    }
    if (imp) {
      rec.bandwidths[mode_index(Mode::kImputed)] = bw.imputed.value_or(bw.simplified);
      evaluate(est, Mode::kImputed);
    }
  }
  return rec;
}

MiseSummary mise_report(std::span<const double> mse) {
  if (mse.empty()) fail(ErrorCode::kEmptyRecords, "no MSE records");
  return {mean(mse), quantile_linear(mse, 0.25), quantile_linear(mse, 0.5), quantile_linear(mse, 0.75)};
}

double efficiency(double mise_simp, double mise_npi) {
  if (mise_simp == 0.0) fail(ErrorCode::kZeroDenominator, "simplified MISE is zero");
  return (mise_simp - mise_npi) / mise_simp * 100.0;
}

CoverageSummary coverage_report(std::span<const CiRecord> records) {
  if (records.empty()) fail(ErrorCode::kEmptyRecords, "no confidence-interval records");
  double hits = 0;
  double len = 0;
  std::size_t defined = 0;
  for (const auto& r : records) {
    if (!r.defined) continue;
    hits += r.covered ? 1.0 : 0.0;
    len += r.length;
    ++defined;
  }
  if (defined == 0) fail(ErrorCode::kEmptyRecords, "no confidence interval could be formed");
  CoverageSummary s;
  s.undefined = records.size() - defined;
  s.coverage = hits / static_cast<double>(defined);
  s.mean_length = len / static_cast<double>(defined);
  if (s.mean_length == 0.0) fail(ErrorCode::kZeroDenominator, "mean interval length is zero");
  s.coverage_efficiency = s.coverage / s.mean_length * 100.0;
  return s;
}

std::vector<Curve> simulation_eval_grid(const SimConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, kStreamEvalGrid, 0));
  return gen_curves(cfg.eval_size, Grid::uniform(-1.0, 1.0, cfg.grid_size), rng);
}

SimReport run_simulation(const SimConfig& cfg, const SimHooks* hooks) {
  cfg.validate();
  const auto eval = simulation_eval_grid(cfg);

  SimReport report;
  report.config = cfg;
  report.replications.resize(cfg.replications);
  std::vector<std::exception_ptr> errors(cfg.replications);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t b = next++; b < cfg.replications; b = next++) {
      try {
        report.replications[b] = run_replication(cfg, eval, b, hooks);
      } catch (...) {
        errors[b] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min(cfg.threads, cfg.replications));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  double missing = 0;
  for (const auto& r : report.replications) missing += r.missing_rate;
  report.mean_missing_rate = missing / static_cast<double>(cfg.replications);

  for (Mode m : {Mode::kComplete, Mode::kSimplified, Mode::kImputed}) {
    const std::size_t i = mode_index(m);
    if (!cfg.modes[i]) continue;
    std::vector<double> mse;
    std::vector<CiRecord> ci;
    for (const auto& r : report.replications) {
      mse.push_back(r.modes[i]->mse);
      ci.insert(ci.end(), r.modes[i]->ci.begin(), r.modes[i]->ci.end());
    }
    report.mise[i] = mise_report(mse);
    double len = 0;
    for (const auto& c : ci) len += c.length;
    if (len > 0) report.coverage[i] = coverage_report(ci);
  }
  const auto& s = report.mise[mode_index(Mode::kSimplified)];
  const auto& p = report.mise[mode_index(Mode::kImputed)];
  if (s && p && s->mise > 0) report.efficiency = efficiency(s->mise, p->mise);
  return report;
}

void write_sim_report_csv(const SimReport& report, std::ostream& os) {
  const SimConfig& c = report.config;
  os << "# fvol " << kVersion << " simulate\n";
  os << "# model=" << c.error_model << " n=" << c.n << " eta=" << c.eta << " B=" << c.replications
     << " J=" << c.eval_size << " seed=" << c.seed << " level=" << c.nu << " grid_size=" << c.grid_size << "\n";
  os << "# kernel=" << c.estimator.kernel_m.name() << " semimetric=" << c.estimator.metric_m.describe()
     << " cv_grid_size=" << c.cv.grid_size << " cv_quantile_range=" << c.cv.q_min << "," << c.cv.q_max << "\n";
  os << "# bandwidths: cross-validated per replication; medians below as metric=h1..h4\n";
  os << "model,mar,estimator,metric,value\n";

  std::ostringstream mar;
  mar << std::fixed << std::setprecision(1) << report.mean_missing_rate * 100.0 << "%";
  os << std::setprecision(10);
  auto row = [&](std::string_view est, std::string_view metric, double v) {
    os << c.error_model << ',' << mar.str() << ',' << est << ',' << metric << ',' << v << '\n';
  };
  for (Mode m : {Mode::kComplete, Mode::kSimplified, Mode::kImputed}) {
    const std::size_t i = mode_index(m);
    if (!report.mise[i]) continue;
    const auto name = mode_name(m);
    row(name, "mise", report.mise[i]->mise);
    row(name, "mse_q1", report.mise[i]->q1);
    row(name, "mse_median", report.mise[i]->median);
    row(name, "mse_q3", report.mise[i]->q3);
    if (report.coverage[i]) {
      row(name, "coverage", report.coverage[i]->coverage);
      row(name, "ci_mean_length", report.coverage[i]->mean_length);
      row(name, "coverage_efficiency", report.coverage[i]->coverage_efficiency);
      row(name, "ci_undefined", static_cast<double>(report.coverage[i]->undefined));
    }
    std::array<std::vector<double>, kRoleCount> hs;
    for (const auto& r : report.replications)
      if (r.bandwidths[i])
        for (std::size_t k = 0; k < kRoleCount; ++k) hs[k].push_back((*r.bandwidths[i])[static_cast<Role>(k)]);
    static constexpr const char* kH[] = {"h1", "h2", "h3", "h4"};
    for (std::size_t k = 0; k < kRoleCount; ++k)
      if (!hs[k].empty()) row(name, kH[k], quantile_linear(hs[k], 0.5));
  }
  if (report.efficiency) row("imputed", "efficiency_pct", *report.efficiency);
  row("all", "missing_rate", report.mean_missing_rate);
}

}  // namespace fvol
