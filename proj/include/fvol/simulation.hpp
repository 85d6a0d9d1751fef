#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fvol/bandwidth.hpp"
#include "fvol/estimators.hpp"
#include "fvol/fda_core.hpp"
#include "fvol/inference.hpp"

namespace fvol {

using Rng = std::mt19937_64;

struct SimConfig {
  std::size_t n = 300;
  std::size_t grid_size = 100;
  int error_model = 1;  // 1..4
  double eta = 0.2;     // MAR strength
  std::size_t replications = 500;
  std::size_t eval_size = 100;
  std::uint64_t seed = 1;
  double nu = 0.05;
  std::size_t threads = 1;
  // Kernels, semi-metrics and any fixed bandwidths; bandwidths flagged
  // automatic in `cv` are re-selected in every replication.
  EstimatorConfig estimator;
  CvOptions cv;
  // Which estimators to run; complete uses the responses before masking.
  std::array<bool, 3> modes{true, true, true};

  void validate() const;
};

// x(l) = a (2 - cos(pi l w)) + (1 - a) cos(pi l w)
Curve dgp_curve(GridPtr grid, int a, double omega);
std::vector<Curve> gen_curves(std::size_t count, std::size_t grid_size, Rng& rng);
std::vector<Curve> gen_curves(std::size_t count, const GridPtr& grid, Rng& rng);

// m(x) = int l x(l) dl and U(x) = int |l| x(l)^2 dl by trapezoid quadrature.
double true_m(const Curve& x);
double true_U(const Curve& x);

// Model 1: iid N(0,1). Models 2 and 3: AR(1) with coefficient 0.5 and -0.25,
// Gaussian innovations, started from the stationary marginal. Model 4: AR(1)
// with coefficient 0.5 and +-1 innovations, started at 0 after 50 burn-in steps.
std::vector<double> gen_errors(std::size_t n, int model, Rng& rng);
std::vector<double> gen_errors(std::size_t n, int model, Rng& rng, std::vector<double>* innovations);
double error_model_coefficient(int model);

// expit(2 strength int x^2).
double mar_probability(const Curve& x, double strength);

struct MarDraw {
  std::vector<bool> delta;
  std::vector<double> pi;
};
// delta_t = [u_t < pi(X_t)] with u_t uniform on [0, 1), one draw per curve.
MarDraw apply_mar(std::span<const Curve> curves, double eta, Rng& rng);

// `defined` is false when a plug-in vanished (e.g. no observed response near
// the curve, so pi_hat = 0) and no interval exists; the point still counts
// towards the MSE.
struct CiRecord {
  bool covered = false;
  double length = 0;
  bool defined = true;
};

struct EstimatorRecord {
  double mse = 0;
  std::vector<CiRecord> ci;  // one per evaluation curve
};

struct ReplicationRecord {
  std::size_t index = 0;
  double missing_rate = 0;
  std::array<std::optional<EstimatorRecord>, 3> modes;  // indexed by Mode
  std::array<std::optional<Bandwidths>, 3> bandwidths;
};

struct SimHooks {
  // Replaces every estimator's variance estimate (and collapses its CI).
  std::function<double(const Curve&)> variance_override;
};

ReplicationRecord run_replication(const SimConfig& cfg, std::span<const Curve> eval_grid, std::size_t b,
                                  const SimHooks* hooks = nullptr);

struct MiseSummary {
  double mise = 0;
  double q1 = 0;
  double median = 0;
  double q3 = 0;
};
MiseSummary mise_report(std::span<const double> mse);
// (MISE_simp - MISE_npi) / MISE_simp * 100
double efficiency(double mise_simp, double mise_npi);

struct CoverageSummary {
  double coverage = 0;
  double mean_length = 0;
  double coverage_efficiency = 0;  // coverage / mean length * 100
  std::size_t undefined = 0;       // records left out of the rates
};
CoverageSummary coverage_report(std::span<const CiRecord> records);

struct SimReport {
  SimConfig config;
  double mean_missing_rate = 0;
  std::array<std::optional<MiseSummary>, 3> mise;
  std::array<std::optional<CoverageSummary>, 3> coverage;
  std::optional<double> efficiency;
  std::vector<ReplicationRecord> replications;
};

// Draws the evaluation curves once, runs every replication (in parallel when
// cfg.threads > 1) and reduces in replication order.
SimReport run_simulation(const SimConfig& cfg, const SimHooks* hooks = nullptr);
std::vector<Curve> simulation_eval_grid(const SimConfig& cfg);

// Tidy CSV: model,mar,estimator,metric,value with a '#' header block.
void write_sim_report_csv(const SimReport& report, std::ostream& os);

}  // namespace fvol
