#pragma once

#include <array>
#include <cstddef>
#include <exception>
#include <memory>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "fvol/fda_core.hpp"
#include "fvol/inference.hpp"
#include "fvol/kernels.hpp"
#include "fvol/semimetrics.hpp"

namespace fvol {

enum class Mode { kComplete, kSimplified, kImputed };

std::string_view mode_name(Mode mode) noexcept;
Mode mode_from_name(std::string_view name);

// The four smoothing problems; each has its own kernel, semi-metric and bandwidth.
enum class Role : std::size_t { kRegression = 0, kVariance = 1, kOmega = 2, kPi = 3 };
inline constexpr std::size_t kRoleCount = 4;

struct Bandwidths {
  double h1 = 1.0;  // regression
  double h2 = 1.0;  // conditional variance
  double h3 = 1.0;  // fourth-moment operator omega
  double h4 = 1.0;  // observation probability pi

  double operator[](Role r) const noexcept;
  double& operator[](Role r) noexcept;
};

// Standardized residuals whose fitted variance falls below this floor make
// omega undefined at that observation.
inline constexpr double kVarianceFloor = 1e-12;

struct EstimatorConfig {
  Kernel kernel_m;      // K
  Kernel kernel_u;      // W
  Kernel kernel_omega;  // H
  Kernel kernel_pi;     // H tilde
  SemiMetricSpec metric_m = SemiMetricSpec::deriv_l2(1);
  SemiMetricSpec metric_u = SemiMetricSpec::deriv_l2(1);
  SemiMetricSpec metric_omega = SemiMetricSpec::deriv_l2(1);
  SemiMetricSpec metric_pi = SemiMetricSpec::deriv_l2(1);

  // Bandwidths of the complete and simplified estimators (and of the
  // simplified fits used to impute).
  Bandwidths bandwidths;
  // h1..h3 of the imputed estimators; `bandwidths` when unset. h4 is shared.
  std::optional<Bandwidths> imputed_bandwidths;

  // When > 0, a query point with an empty kernel ball is smoothed with the
  // bandwidth reaching just past its k-th nearest eligible neighbor.
  std::size_t knn_override = 0;
  TauDenominator tau_denominator = TauDenominator::kBandwidth;

  void validate() const;
  const Kernel& kernel(Role r) const noexcept;
  const SemiMetricSpec& metric(Role r) const noexcept;
  Bandwidths bandwidths_for(Mode mode) const noexcept;
};

// Kernel-weighted average sum mask_t K(d_t/h) v_t / sum mask_t K(d_t/h).
// An empty mask means every observation is eligible; `exclude` drops one index
// (leave-one-out).
class Smoother {
 public:
  Smoother(Kernel kernel, double bandwidth, std::size_t knn_override = 0);

  double bandwidth() const noexcept { return h_; }
  const Kernel& kernel() const noexcept { return kernel_; }

  // h, or the k-nearest-neighbor override when the h-ball holds no eligible point.
  double effective_bandwidth(std::span<const double> dist, std::span<const double> mask,
                             std::optional<std::size_t> exclude = std::nullopt) const;

  std::optional<double> try_average(std::span<const double> dist, std::span<const double> values,
                                    std::span<const double> mask,
                                    std::optional<std::size_t> exclude = std::nullopt) const;
  // Throws NoNeighbors when the denominator vanishes.
  double average(std::span<const double> dist, std::span<const double> values, std::span<const double> mask,
                 std::optional<std::size_t> exclude = std::nullopt) const;

 private:
  std::optional<double> weighted(double h, std::span<const double> dist, std::span<const double> values,
                                 std::span<const double> mask, std::optional<std::size_t> exclude) const;

  Kernel kernel_;
  double h_;
  std::size_t knn_;
};

// Fitted semi-metrics and pairwise distances of a sample of curves, per role.
// Roles with equal specs share storage. Read-only after construction.
class SampleGeometry {
 public:
  SampleGeometry(const FdaDataset& data, const EstimatorConfig& cfg);

  std::size_t size() const noexcept { return n_; }
  const SemiMetric& metric(Role r) const noexcept { return metrics_[slot_[idx(r)]]; }
  const DistanceMatrix& matrix(Role r) const noexcept { return matrices_[slot_[idx(r)]]; }
  // Distances from x to each sample curve under the role's semi-metric.
  std::vector<double> distances(Role r, const Curve& x) const;

  struct Query {
    std::array<std::vector<double>, kRoleCount> rows;
    std::span<const double> operator[](Role r) const noexcept { return rows[static_cast<std::size_t>(r)]; }
  };
  Query query(const Curve& x) const;

 private:
  static std::size_t idx(Role r) noexcept { return static_cast<std::size_t>(r); }

  std::size_t n_ = 0;
  std::vector<SemiMetric> metrics_;
  std::vector<std::vector<std::vector<double>>> embeddings_;
  std::vector<DistanceMatrix> matrices_;
  std::array<std::size_t, kRoleCount> slot_{};
};

// Regression fits at the sample curves. `fitted` is m_{n,0}(X_t) (m_{n,c} on
// complete data); residuals are always taken against it. In the imputed mode
// `imputed_responses` holds Y hat_t = delta_t Y_t + (1 - delta_t) m_{n,0}(X_t)
// and `imputed_fitted` the refit m_{n,1}(X_t).
struct RegressionFit {
  Mode mode = Mode::kSimplified;
  std::vector<std::optional<double>> fitted;
  std::vector<double> imputed_responses;
  std::vector<double> imputed_fitted;
};

struct VolComponents {
  double omega_hat = 0;
  double pi_hat = 0;
  double m1_hat = 0;
  double m2_hat = 0;
  double f_hat = 0;
};

struct VolEstimate {
  Mode mode = Mode::kSimplified;
  double u_hat = 0;
  double ci_low = 0;
  double ci_high = 0;
  VolComponents components;
  double level = 0.05;
  double h2 = 0;  // bandwidth actually used for U and the small-ball plug-ins
  std::size_t n = 0;

  bool negative_lower_bound() const noexcept { return ci_low < 0; }
};

// All estimators of one sample. Training-stage fits (simplified, imputed) are
// computed on construction; a stage that cannot be built (e.g. a missing
// response with no observed neighbor) only fails the queries that need it.
class VolatilityEstimator {
 public:
  VolatilityEstimator(FdaDataset data, EstimatorConfig cfg);
  VolatilityEstimator(FdaDataset data, EstimatorConfig cfg, std::shared_ptr<const SampleGeometry> geometry);

  const FdaDataset& data() const noexcept { return data_; }
  const EstimatorConfig& config() const noexcept { return cfg_; }
  const SampleGeometry& geometry() const noexcept { return *geometry_; }
  std::shared_ptr<const SampleGeometry> shared_geometry() const noexcept { return geometry_; }

  double regression(const Curve& x, Mode mode) const;
  double variance(const Curve& x, Mode mode) const;
  double omega(const Curve& x, Mode mode) const;
  double observation_probability(const Curve& x) const;
  VolEstimate estimate(const Curve& x, Mode mode, double level) const;

  double regression(const SampleGeometry::Query& q, Mode mode) const;
  double variance(const SampleGeometry::Query& q, Mode mode) const;
  double omega(const SampleGeometry::Query& q, Mode mode) const;
  double observation_probability(const SampleGeometry::Query& q) const;
  VolEstimate estimate(const SampleGeometry::Query& q, Mode mode, double level) const;

  RegressionFit regression_fit(Mode mode) const;
  // Squared residuals (Y_t - m_{n,0}(X_t))^2 at observed t.
  std::vector<std::optional<double>> squared_residuals() const;
  // delta_t r_t + (1 - delta_t) U_{n,0}(X_t).
  std::span<const double> imputed_residuals() const;
  // Fitted conditional variance at every sample curve, for the mode's stage.
  std::span<const double> fitted_variance(Mode mode) const;
  // (eps_t^2 - 1)^2 per sample curve; NaN where the fitted variance is below the floor.
  std::span<const double> omega_targets(Mode mode) const;

 private:
  struct SimplifiedStage {
    std::vector<std::optional<double>> m0;  // at every t where evaluable
    std::vector<double> residual_sq;        // r_t at observed t, 0 elsewhere
    std::vector<std::optional<double>> u0;
    std::vector<double> u0_dense;           // NaN where not evaluable
    std::vector<double> omega_targets;
  };
  struct ImputedStage {
    std::vector<double> y_hat;
    std::vector<double> m1;
    std::vector<double> r_hat;
    std::vector<double> u1;
    std::vector<double> omega_targets;
  };

  void fit_stages();
  void require_mode(Mode mode) const;
  const ImputedStage& imputed_stage() const;
  std::span<const double> observed_mask(Mode mode) const;

  FdaDataset data_;
  EstimatorConfig cfg_;
  std::shared_ptr<const SampleGeometry> geometry_;
  std::vector<double> delta_;
  std::vector<double> y_;
  SimplifiedStage simplified_;
  std::optional<ImputedStage> imputed_;
  std::exception_ptr imputed_error_;
};

// Free-function forms. Each builds the sample geometry from scratch.
double estimate_m(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg, Mode mode);
RegressionFit impute_responses(const FdaDataset& data, const EstimatorConfig& cfg);
double estimate_m_imputed(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg);
std::vector<std::optional<double>> residuals_squared(const FdaDataset& data, const RegressionFit& fit);
std::vector<double> impute_residuals(const FdaDataset& data, std::span<const std::optional<double>> r,
                                     const EstimatorConfig& cfg);
double estimate_U(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg, Mode mode);
double estimate_pi(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg);
// `m_fit` supplies m at the sample curves (imputed fits also supply Y hat);
// `u_fit` the fitted conditional variance there.
double estimate_omega(const Curve& x, const FdaDataset& data, const EstimatorConfig& cfg, Mode mode,
                      const RegressionFit& m_fit, std::span<const double> u_fit);

}  // namespace fvol
