#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvol/estimators.hpp"

namespace fvol {

struct BandwidthGrid {
  std::vector<double> candidates;  // strictly increasing, all > 0
};

// Candidates at evenly spaced quantile levels in [q_min, q_max] of the strictly
// positive off-diagonal distances, deduplicated.
BandwidthGrid candidate_grid(const DistanceMatrix& dist, std::size_t n_candidates, double q_min, double q_max);

struct CvCandidate {
  double bandwidth = 0;
  std::optional<double> score;  // unset when skipped
  std::string skip_reason;
};

struct CvSelection {
  double bandwidth = 0;
  std::vector<CvCandidate> candidates;
};

// Leave-one-out sorted neighbor lists of a distance matrix; reused across
// candidates and criteria.
class NeighborIndex {
 public:
  explicit NeighborIndex(const DistanceMatrix& dist);

  struct Entry {
    double distance;
    std::size_t index;
  };
  std::span<const Entry> neighbors(std::size_t t) const noexcept { return rows_[t]; }
  std::size_t size() const noexcept { return rows_.size(); }

 private:
  std::vector<std::vector<Entry>> rows_;
};

// Generic criterion: sum over scored t of (target_t - m^(-t)(X_t; h))^2, where
// m^(-t) smooths `values` over eligible s != t. Empty masks mean "all".
// Candidates whose criterion leaves some scored point without neighbors are
// skipped, unless `knn` > 0: such a point is then smoothed with the bandwidth
// reaching just past its knn-th eligible neighbor, as the estimators do. Ties
// (within 1e-12 of the target scale) go to the smaller bandwidth.
CvSelection cv_select(const NeighborIndex& index, const Kernel& kernel, const BandwidthGrid& grid,
                      std::span<const double> values, std::span<const double> estimator_mask,
                      std::span<const double> scored_mask, std::span<const double> targets, std::size_t knn = 0);

// Regression bandwidth: responses (simplified) or imputed responses (imputed).
CvSelection cv_select_h1(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid, Mode mode);
// Variance bandwidth; residuals come from the regression bandwidth(s) already in cfg.
CvSelection cv_select_h2(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid, Mode mode);
// Omega bandwidth; standardized residuals come from h1, h2 already in cfg.
CvSelection cv_select_h3(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid, Mode mode);
// Observation-probability bandwidth (Brier-type criterion over all t).
CvSelection cv_select_h4(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid);

struct CvOptions {
  std::size_t grid_size = 15;
  double q_min = 0.05;
  double q_max = 0.5;
  // Which of h1..h4 to select; the others keep the value in the config.
  std::array<bool, kRoleCount> automatic{true, true, true, true};
};

struct BandwidthReport {
  Bandwidths simplified;
  std::optional<Bandwidths> imputed;
  std::vector<std::string> log;  // one line per stage, plus skipped candidates
};

// Full cascade: simplified h1 -> h2 -> h3, then h4, then (when responses are
// missing and `with_imputed`) imputed h1 -> h2 -> h3 on the imputed sample.
BandwidthReport select_bandwidths(const FdaDataset& data, const EstimatorConfig& cfg, const CvOptions& opts,
                                  std::shared_ptr<const SampleGeometry> geometry = nullptr, bool with_imputed = true);

// Config with the report's bandwidths installed.
EstimatorConfig with_bandwidths(EstimatorConfig cfg, const BandwidthReport& report);

}  // namespace fvol
