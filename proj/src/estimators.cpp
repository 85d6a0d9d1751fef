#include "fvol/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace fvol {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool eligible(std::span<const double> mask, std::optional<std::size_t> exclude, std::size_t t) noexcept {
  if (exclude && *exclude == t) return false;
  return mask.empty() || mask[t] != 0.0;
}

double squared(double v) noexcept { return v * v; }

// Kernel average of omega targets over observations with a usable
// standardized residual. NaN targets (fitted variance below the floor) are
// left out; a ball holding nothing else is an error.
double omega_average(const Smoother& s, std::span<const double> dist, std::span<const double> targets,
                     std::span<const double> mask) {
  std::vector<double> usable(dist.size(), 0.0);
  for (std::size_t t = 0; t < dist.size(); ++t) usable[t] = eligible(mask, std::nullopt, t) && !std::isnan(targets[t]);
  if (auto v = s.try_average(dist, targets, usable)) return *v;
  const double h = s.effective_bandwidth(dist, mask);
  for (std::size_t t = 0; t < dist.size(); ++t)
    if (eligible(mask, std::nullopt, t) && s.kernel()(dist[t] / h) > 0)
      fail(ErrorCode::kDegenerateVarianceAtObservation,
           "fitted variance at observation " + std::to_string(t) + " is below " + std::to_string(kVarianceFloor));
  fail(ErrorCode::kNoNeighbors, "no eligible observation within bandwidth " + std::to_string(s.bandwidth()));
}

double omega_target(double residual, double variance) noexcept {
  if (!(variance > kVarianceFloor)) return kNaN;
  return squared(residual * residual / variance - 1.0);
}

}  // namespace

std::string_view mode_name(Mode mode) noexcept {
  switch (mode) {
    case Mode::kComplete: return "complete";
    case Mode::kSimplified: return "simplified";
    case Mode::kImputed: return "imputed";
  }
  return "simplified";
}

Mode mode_from_name(std::string_view name) {
  if (name == "complete") return Mode::kComplete;
  if (name == "simplified") return Mode::kSimplified;
  if (name == "imputed") return Mode::kImputed;
  fail(ErrorCode::kInvalidArgument, "unknown estimator mode '" + std::string(name) + "'");
}

double Bandwidths::operator[](Role r) const noexcept {
  switch (r) {
    case Role::kRegression: return h1;
    case Role::kVariance: return h2;
    case Role::kOmega: return h3;
    case Role::kPi: return h4;
  }
  return h1;
}

double& Bandwidths::operator[](Role r) noexcept {
  switch (r) {
    case Role::kRegression: return h1;
    case Role::kVariance: return h2;
    case Role::kOmega: return h3;
    case Role::kPi: return h4;
  }
  return h1;
}

void EstimatorConfig::validate() const {
  auto check = [](const Bandwidths& b, const char* which) {
    for (double h : {b.h1, b.h2, b.h3, b.h4})
      if (!(h > 0) || !std::isfinite(h))
        fail(ErrorCode::kInvalidArgument, std::string(which) + " bandwidths must be positive");
  };
  check(bandwidths, "simplified");
  if (imputed_bandwidths) check(*imputed_bandwidths, "imputed");
}

const Kernel& EstimatorConfig::kernel(Role r) const noexcept {
  switch (r) {
    case Role::kRegression: return kernel_m;
    case Role::kVariance: return kernel_u;
    case Role::kOmega: return kernel_omega;
    case Role::kPi: return kernel_pi;
  }
  return kernel_m;
}

const SemiMetricSpec& EstimatorConfig::metric(Role r) const noexcept {
  switch (r) {
    case Role::kRegression: return metric_m;
    case Role::kVariance: return metric_u;
    case Role::kOmega: return metric_omega;
    case Role::kPi: return metric_pi;
  }
  return metric_m;
}

Bandwidths EstimatorConfig::bandwidths_for(Mode mode) const noexcept {
  if (mode != Mode::kImputed || !imputed_bandwidths) return bandwidths;
  Bandwidths b = *imputed_bandwidths;
  b.h4 = bandwidths.h4;
  return b;
}

// ---------------------------------------------------------------------------

Smoother::Smoother(Kernel kernel, double bandwidth, std::size_t knn_override)
    : kernel_(kernel), h_(bandwidth), knn_(knn_override) {
  if (!(h_ > 0) || !std::isfinite(h_)) fail(ErrorCode::kInvalidArgument, "bandwidth must be positive");
}

double Smoother::effective_bandwidth(std::span<const double> dist, std::span<const double> mask,
                                     std::optional<std::size_t> exclude) const {
  for (std::size_t t = 0; t < dist.size(); ++t)
    if (eligible(mask, exclude, t) && kernel_(dist[t] / h_) > 0) return h_;
  if (knn_ == 0) return h_;

  std::vector<double> near;
  for (std::size_t t = 0; t < dist.size(); ++t)
    if (eligible(mask, exclude, t)) near.push_back(dist[t]);
  if (near.empty()) return h_;
  const std::size_t k = std::min(knn_, near.size());
  std::nth_element(near.begin(), near.begin() + static_cast<std::ptrdiff_t>(k - 1), near.end());
  const double kth = near[k - 1];
  return kth > 0 ? kth * (1.0 + 1e-6) : h_;
}

std::optional<double> Smoother::weighted(double h, std::span<const double> dist, std::span<const double> values,
                                         std::span<const double> mask, std::optional<std::size_t> exclude) const {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < dist.size(); ++t) {
    if (!eligible(mask, exclude, t)) continue;
    const double w = kernel_(dist[t] / h);
    if (w <= 0) continue;
    num += w * values[t];
    den += w;
  }
  if (den > 0) return num / den;
  return std::nullopt;
}

std::optional<double> Smoother::try_average(std::span<const double> dist, std::span<const double> values,
                                            std::span<const double> mask,
                                            std::optional<std::size_t> exclude) const {
  if (values.size() != dist.size() || (!mask.empty() && mask.size() != dist.size()))
    fail(ErrorCode::kMismatchedLength, "distances, values and mask must have equal length");
  return weighted(effective_bandwidth(dist, mask, exclude), dist, values, mask, exclude);
}

double Smoother::average(std::span<const double> dist, std::span<const double> values, std::span<const double> mask,
                         std::optional<std::size_t> exclude) const {
  if (auto v = try_average(dist, values, mask, exclude)) return *v;
  fail(ErrorCode::kNoNeighbors, "no eligible observation within bandwidth " + std::to_string(h_));
}

// ---------------------------------------------------------------------------

SampleGeometry::SampleGeometry(const FdaDataset& data, const EstimatorConfig& cfg) : n_(data.size()) {
  if (data.empty()) fail(ErrorCode::kEmptyDataset, "estimators need at least one observation");
  std::vector<SemiMetricSpec> specs;
  for (std::size_t r = 0; r < kRoleCount; ++r) {
    const SemiMetricSpec& spec = cfg.metric(static_cast<Role>(r));
    const auto found = std::find(specs.begin(), specs.end(), spec);
    if (found != specs.end()) {
      slot_[r] = static_cast<std::size_t>(found - specs.begin());
      continue;
    }
    slot_[r] = specs.size();
    specs.push_back(spec);
    metrics_.push_back(SemiMetric::fit(spec, data));
    const SemiMetric& metric = metrics_.back();

    std::vector<std::vector<double>> emb;
    emb.reserve(n_);
    for (const auto& o : data.observations()) emb.push_back(metric.embed(o.x()));
    DistanceMatrix d(n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i + 1; j < n_; ++j) d.set(i, j, SemiMetric::embedded_distance(emb[i], emb[j]));
    embeddings_.push_back(std::move(emb));
    matrices_.push_back(std::move(d));
  }
}

std::vector<double> SampleGeometry::distances(Role r, const Curve& x) const {
  const std::size_t s = slot_[idx(r)];
  const auto e = metrics_[s].embed(x);
  std::vector<double> out(n_);
  for (std::size_t t = 0; t < n_; ++t) out[t] = SemiMetric::embedded_distance(e, embeddings_[s][t]);
  return out;
}

SampleGeometry::Query SampleGeometry::query(const Curve& x) const {
  Query q;
  std::vector<std::vector<double>> per_slot(metrics_.size());
  for (std::size_t s = 0; s < metrics_.size(); ++s) {
    const auto e = metrics_[s].embed(x);
    per_slot[s].resize(n_);
    for (std::size_t t = 0; t < n_; ++t) per_slot[s][t] = SemiMetric::embedded_distance(e, embeddings_[s][t]);
  }
  for (std::size_t r = 0; r < kRoleCount; ++r) q.rows[r] = per_slot[slot_[r]];
  return q;
}

// ---------------------------------------------------------------------------

VolatilityEstimator::VolatilityEstimator(FdaDataset data, EstimatorConfig cfg)
    : VolatilityEstimator(data, cfg, std::make_shared<const SampleGeometry>(data, cfg)) {}

VolatilityEstimator::VolatilityEstimator(FdaDataset data, EstimatorConfig cfg,
                                         std::shared_ptr<const SampleGeometry> geometry)
    : data_(std::move(data)), cfg_(std::move(cfg)), geometry_(std::move(geometry)) {
  cfg_.validate();
  if (!geometry_ || geometry_->size() != data_.size())
    fail(ErrorCode::kInvalidArgument, "sample geometry does not match the dataset");
  delta_ = data_.delta_mask();
  y_ = data_.responses_or_zero();
  fit_stages();
}

void VolatilityEstimator::fit_stages() {
  const std::size_t n = data_.size();
  const Bandwidths bw = cfg_.bandwidths;
  const Smoother sm_m(cfg_.kernel_m, bw.h1, cfg_.knn_override);
  const Smoother sm_u(cfg_.kernel_u, bw.h2, cfg_.knn_override);
  const DistanceMatrix& d1 = geometry_->matrix(Role::kRegression);
  const DistanceMatrix& d2 = geometry_->matrix(Role::kVariance);

  auto& s = simplified_;
  s.m0.resize(n);
  s.residual_sq.assign(n, 0.0);
  for (std::size_t t = 0; t < n; ++t) {
    s.m0[t] = sm_m.try_average(d1.row(t), y_, delta_);
    if (delta_[t] != 0.0) {
      if (!s.m0[t]) fail(ErrorCode::kNoNeighbors, "observation " + std::to_string(t) + " has no neighbor");
      s.residual_sq[t] = squared(y_[t] - *s.m0[t]);
    }
  }
  s.u0.resize(n);
  s.u0_dense.assign(n, kNaN);
  s.omega_targets.assign(n, kNaN);
  for (std::size_t t = 0; t < n; ++t) {
    s.u0[t] = sm_u.try_average(d2.row(t), s.residual_sq, delta_);
    if (s.u0[t]) s.u0_dense[t] = *s.u0[t];
    if (delta_[t] != 0.0) s.omega_targets[t] = omega_target(y_[t] - *s.m0[t], s.u0_dense[t]);
  }

  try {
    for (std::size_t t = 0; t < n; ++t) {
      if (delta_[t] != 0.0) continue;
      if (!s.m0[t] || !s.u0[t])
        fail(ErrorCode::kNoNeighbors, "missing response at observation " + std::to_string(t) +
                                          " has no observed neighbor to impute from");
    }
    const Bandwidths ibw = cfg_.bandwidths_for(Mode::kImputed);
    const Smoother im_m(cfg_.kernel_m, ibw.h1, cfg_.knn_override);
    const Smoother im_u(cfg_.kernel_u, ibw.h2, cfg_.knn_override);
    ImputedStage st;
    st.y_hat.resize(n);
    st.r_hat.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      const bool obs = delta_[t] != 0.0;
      st.y_hat[t] = obs ? y_[t] : *s.m0[t];
      st.r_hat[t] = obs ? s.residual_sq[t] : *s.u0[t];
    }
    st.m1.resize(n);
    st.u1.resize(n);
    st.omega_targets.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
      st.m1[t] = im_m.average(d1.row(t), st.y_hat, {});
      st.u1[t] = im_u.average(d2.row(t), st.r_hat, {});
      st.omega_targets[t] = omega_target(st.y_hat[t] - st.m1[t], st.u1[t]);
    }
    imputed_ = std::move(st);
  } catch (const Error&) {
    imputed_error_ = std::current_exception();
  }
}

void VolatilityEstimator::require_mode(Mode mode) const {
  if (mode == Mode::kComplete && !data_.fully_observed())
    fail(ErrorCode::kCompleteModeOnIncompleteData,
         std::to_string(data_.size() - data_.observed_count()) + " responses are missing");
  if (mode == Mode::kImputed) (void)imputed_stage();
}

const VolatilityEstimator::ImputedStage& VolatilityEstimator::imputed_stage() const {
  if (imputed_error_) std::rethrow_exception(imputed_error_);
  return *imputed_;
}

std::span<const double> VolatilityEstimator::observed_mask(Mode mode) const {
  if (mode == Mode::kImputed) return {};
  return delta_;
}

double VolatilityEstimator::regression(const SampleGeometry::Query& q, Mode mode) const {
  require_mode(mode);
  const Bandwidths bw = cfg_.bandwidths_for(mode);
  const Smoother sm(cfg_.kernel_m, bw.h1, cfg_.knn_override);
  if (mode == Mode::kImputed) return sm.average(q[Role::kRegression], imputed_stage().y_hat, {});
  return sm.average(q[Role::kRegression], y_, delta_);
}

double VolatilityEstimator::variance(const SampleGeometry::Query& q, Mode mode) const {
  require_mode(mode);
  const Bandwidths bw = cfg_.bandwidths_for(mode);
  const Smoother sm(cfg_.kernel_u, bw.h2, cfg_.knn_override);
  if (mode == Mode::kImputed) return sm.average(q[Role::kVariance], imputed_stage().r_hat, {});
  return sm.average(q[Role::kVariance], simplified_.residual_sq, delta_);
}

double VolatilityEstimator::omega(const SampleGeometry::Query& q, Mode mode) const {
  require_mode(mode);
  const Bandwidths bw = cfg_.bandwidths_for(mode);
  const Smoother sm(cfg_.kernel_omega, bw.h3, cfg_.knn_override);
  return omega_average(sm, q[Role::kOmega], omega_targets(mode), observed_mask(mode));
}

double VolatilityEstimator::observation_probability(const SampleGeometry::Query& q) const {
  const Smoother sm(cfg_.kernel_pi, cfg_.bandwidths.h4, cfg_.knn_override);
  return sm.average(q[Role::kPi], delta_, {});
}

VolEstimate VolatilityEstimator::estimate(const SampleGeometry::Query& q, Mode mode, double level) const {
  VolEstimate e;
  e.mode = mode;
  e.level = level;
  e.n = data_.size();
  e.u_hat = variance(q, mode);
  e.components.omega_hat = omega(q, mode);
  e.components.pi_hat = observation_probability(q);

  const Bandwidths bw = cfg_.bandwidths_for(mode);
  const Smoother sm_u(cfg_.kernel_u, bw.h2, cfg_.knn_override);
  e.h2 = sm_u.effective_bandwidth(q[Role::kVariance], observed_mask(mode));
  const auto row = q[Role::kVariance];
  const SmallBallProfile profile(std::vector<double>(row.begin(), row.end()), e.h2);
  e.components.f_hat = profile.cdf(e.h2);
  e.components.m1_hat = m_hat_moment(cfg_.kernel_u, 1, profile, cfg_.tau_denominator);
  e.components.m2_hat = m_hat_moment(cfg_.kernel_u, 2, profile, cfg_.tau_denominator);

  const CiPlugins plugins{e.u_hat,
                          e.components.omega_hat,
                          e.components.pi_hat,
                          e.components.m1_hat,
                          e.components.m2_hat,
                          e.components.f_hat,
                          e.n};
  const Interval ci = mode == Mode::kImputed ? ci_imputed(plugins, level) : ci_simplified(plugins, level);
  e.ci_low = ci.low;
  e.ci_high = ci.high;
  return e;
}

double VolatilityEstimator::regression(const Curve& x, Mode mode) const { return regression(geometry_->query(x), mode); }
double VolatilityEstimator::variance(const Curve& x, Mode mode) const { return variance(geometry_->query(x), mode); }
double VolatilityEstimator::omega(const Curve& x, Mode mode) const { return omega(geometry_->query(x), mode); }
double VolatilityEstimator::observation_probability(const Curve& x) const {
  return observation_probability(geometry_->query(x));
}
VolEstimate VolatilityEstimator::estimate(const Curve& x, Mode mode, double level) const {
  return estimate(geometry_->query(x), mode, level);
}

RegressionFit VolatilityEstimator::regression_fit(Mode mode) const {
  require_mode(mode);
  RegressionFit fit;
  fit.mode = mode;
  fit.fitted = simplified_.m0;
  if (mode == Mode::kImputed) {
    fit.imputed_responses = imputed_stage().y_hat;
    fit.imputed_fitted = imputed_stage().m1;
  }
  return fit;
}

std::vector<std::optional<double>> VolatilityEstimator::squared_residuals() const {
  std::vector<std::optional<double>> r(data_.size());
  for (std::size_t t = 0; t < r.size(); ++t)
    if (delta_[t] != 0.0) r[t] = simplified_.residual_sq[t];
  return r;
}

std::span<const double> VolatilityEstimator::imputed_residuals() const { return imputed_stage().r_hat; }

std::span<const double> VolatilityEstimator::fitted_variance(Mode mode) const {
  require_mode(mode);
  if (mode == Mode::kImputed) return imputed_stage().u1;
  return simplified_.u0_dense;
}

std::span<const double> VolatilityEstimator::omega_targets(Mode mode) const {
  require_mode(mode);
  if (mode == Mode::kImputed) return imputed_stage().omega_targets;
  return simplified_.omega_targets;
}

// ---------------------------------------------------------------------------

double estimate_m(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg, Mode mode) {
  return VolatilityEstimator(data, cfg).regression(x, mode);
}

RegressionFit impute_responses(const FdaDataset& data, const EstimatorConfig& cfg) {
  return VolatilityEstimator(data, cfg).regression_fit(Mode::kImputed);
}

double estimate_m_imputed(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg) {
  return VolatilityEstimator(data, cfg).regression(x, Mode::kImputed);
}

std::vector<std::optional<double>> residuals_squared(const FdaDataset& data, const RegressionFit& fit) {
  if (fit.fitted.size() != data.size())
    fail(ErrorCode::kMismatchedLength, "fit covers " + std::to_string(fit.fitted.size()) + " of " +
                                           std::to_string(data.size()) + " observations");
  std::vector<std::optional<double>> r(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (!data[t].delta()) continue;
    if (!fit.fitted[t]) fail(ErrorCode::kMissingFittedValue, "no fitted value at observation " + std::to_string(t));
    r[t] = squared(*data[t].y() - *fit.fitted[t]);
  }
  return r;
}

std::vector<double> impute_residuals(const FdaDataset& data, std::span<const std::optional<double>> r,
                                     const EstimatorConfig& cfg) {
  if (r.size() != data.size()) fail(ErrorCode::kMismatchedLength, "one residual slot per observation expected");
  const auto delta = data.delta_mask();
  std::vector<double> dense(data.size(), 0.0);
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (delta[t] == 0.0) continue;
    if (!r[t]) fail(ErrorCode::kMissingFittedValue, "no residual at observed index " + std::to_string(t));
    dense[t] = *r[t];
  }
  const SampleGeometry geo(data, cfg);
  const Smoother sm(cfg.kernel_u, cfg.bandwidths.h2, cfg.knn_override);
  std::vector<double> out(data.size());
  for (std::size_t t = 0; t < data.size(); ++t) {
    if (delta[t] != 0.0) {
      out[t] = dense[t];
      continue;
    }
    const auto v = sm.try_average(geo.matrix(Role::kVariance).row(t), dense, delta);
    if (!v) fail(ErrorCode::kNoNeighbors, "missing residual at observation " + std::to_string(t) +
                                              " has no observed neighbor");
    out[t] = *v;
  }
  return out;
}

double estimate_U(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg, Mode mode) {
  return VolatilityEstimator(data, cfg).variance(x, mode);
}

double estimate_pi(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg) {
  const SampleGeometry geo(data, cfg);
  const Smoother sm(cfg.kernel_pi, cfg.bandwidths.h4, cfg.knn_override);
  return sm.average(geo.distances(Role::kPi, x), data.delta_mask(), {});
}

double estimate_omega(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg, Mode mode,
                      const RegressionFit& m_fit, std::span<const double> u_fit) {
  const std::size_t n = data.size();
  if (u_fit.size() != n || m_fit.fitted.size() != n)
    fail(ErrorCode::kMismatchedLength, "fits must cover every observation");
  if (mode == Mode::kComplete && !data.fully_observed())
    fail(ErrorCode::kCompleteModeOnIncompleteData, "complete mode on incomplete data");

  const auto delta = data.delta_mask();
  std::vector<double> targets(n, kNaN);
  std::span<const double> mask = delta;
  if (mode == Mode::kImputed) {
    if (m_fit.imputed_responses.size() != n || m_fit.imputed_fitted.size() != n)
      fail(ErrorCode::kMissingFittedValue, "imputed omega needs imputed responses and their refit");
    for (std::size_t t = 0; t < n; ++t)
      targets[t] = omega_target(m_fit.imputed_responses[t] - m_fit.imputed_fitted[t], u_fit[t]);
    mask = {};
  } else {
    for (std::size_t t = 0; t < n; ++t) {
      if (!data[t].delta()) continue;
      if (!m_fit.fitted[t]) fail(ErrorCode::kMissingFittedValue, "no fitted value at observation " + std::to_string(t));
      targets[t] = omega_target(*data[t].y() - *m_fit.fitted[t], u_fit[t]);
    }
  }
  const Bandwidths bw = cfg.bandwidths_for(mode);
  const SampleGeometry geo(data, cfg);
  const Smoother sm(cfg.kernel_omega, bw.h3, cfg.knn_override);
  return omega_average(sm, geo.distances(Role::kOmega, x), targets, mask);
}

}  // namespace fvol
