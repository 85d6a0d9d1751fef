#include "fvol/fda_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fvol {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kMismatchedLength: return "MismatchedLength";
    case ErrorCode::kNonUniformGrid: return "NonUniformGrid";
    case ErrorCode::kGridTooShort: return "GridTooShort";
    case ErrorCode::kNonPositivePrice: return "NonPositivePrice";
    case ErrorCode::kTooShort: return "TooShort";
    case ErrorCode::kOutOfSupport: return "OutOfSupport";
    case ErrorCode::kMismatchedGrid: return "MismatchedGrid";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kKTooLarge: return "KTooLarge";
    case ErrorCode::kNoNeighbors: return "NoNeighbors";
    case ErrorCode::kCompleteModeOnIncompleteData: return "CompleteModeOnIncompleteData";
    case ErrorCode::kMissingFittedValue: return "MissingFittedValue";
    case ErrorCode::kDegenerateVarianceAtObservation: return "DegenerateVarianceAtObservation";
    case ErrorCode::kEmptyBall: return "EmptyBall";
    case ErrorCode::kNonPositivePlugin: return "NonPositivePlugin";
    case ErrorCode::kAllDistancesZero: return "AllDistancesZero";
    case ErrorCode::kNoFeasibleCandidate: return "NoFeasibleCandidate";
    case ErrorCode::kZeroDenominator: return "ZeroDenominator";
    case ErrorCode::kEmptyRecords: return "EmptyRecords";
    case ErrorCode::kEmptySeries: return "EmptySeries";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kNoOverlappingDates: return "NoOverlappingDates";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kPcaNotFitted: return "PcaNotFitted";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

Grid::Grid(std::vector<double> points) : points_(std::move(points)) {
  if (points_.size() < 2) fail(ErrorCode::kGridTooShort, "a grid needs at least 2 points");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i])) fail(ErrorCode::kInvalidArgument, "grid point is not finite");
    if (i > 0 && !(points_[i] > points_[i - 1]))
      fail(ErrorCode::kInvalidArgument, "grid points must be strictly increasing");
  }

  const double mean_step = (back() - front()) / static_cast<double>(size() - 1);
  double max_dev = 0.0;
  for (std::size_t i = 1; i < points_.size(); ++i)
    max_dev = std::max(max_dev, std::abs((points_[i] - points_[i - 1]) - mean_step));
  uniform_ = max_dev <= 1e-9 * mean_step;

  weights_.assign(points_.size(), 0.0);
  for (std::size_t i = 1; i < points_.size(); ++i) {
    const double half = 0.5 * (points_[i] - points_[i - 1]);
    weights_[i - 1] += half;
    weights_[i] += half;
  }
}

std::shared_ptr<const Grid> Grid::uniform(double lo, double hi, std::size_t n) {
  if (n < 2) fail(ErrorCode::kGridTooShort, "a grid needs at least 2 points");
  if (!(hi > lo)) fail(ErrorCode::kInvalidArgument, "uniform grid needs hi > lo");
  std::vector<double> pts(n);
  const double step = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) pts[i] = lo + step * static_cast<double>(i);
  pts.back() = hi;
  return std::make_shared<const Grid>(std::move(pts));
}

bool Grid::same_as(const Grid& other) const noexcept {
  if (this == &other) return true;
  return points_ == other.points_;
}

Curve::Curve(GridPtr grid, std::vector<double> values) : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) fail(ErrorCode::kInvalidArgument, "curve without a grid");
  if (values_.size() != grid_->size())
    fail(ErrorCode::kMismatchedLength, "curve has " + std::to_string(values_.size()) +
                                           " values for a grid of " + std::to_string(grid_->size()));
  for (double v : values_)
    if (!std::isfinite(v)) fail(ErrorCode::kInvalidArgument, "curve value is not finite");
}

FdaObservation FdaObservation::observed(Curve x, double y) {
  if (!std::isfinite(y)) fail(ErrorCode::kInvalidArgument, "observed response must be finite");
  return FdaObservation(std::move(x), y);
}

FdaObservation FdaObservation::missing(Curve x) { return FdaObservation(std::move(x), std::nullopt); }

FdaDataset::FdaDataset(std::vector<FdaObservation> observations) {
  observations_.reserve(observations.size());
  GridPtr shared;
  for (auto& obs : observations) {
    if (!shared) {
      shared = obs.x().grid_ptr();
      observations_.push_back(std::move(obs));
      continue;
    }
    if (obs.x().grid_ptr() == shared) {
      observations_.push_back(std::move(obs));
    } else if (obs.x().grid().same_as(*shared)) {
      Curve rebound(shared, std::vector<double>(obs.x().values().begin(), obs.x().values().end()));
      observations_.push_back(obs.delta() ? FdaObservation::observed(std::move(rebound), *obs.y())
                                          : FdaObservation::missing(std::move(rebound)));
    } else {
      Curve resampled = resample_linear(obs.x(), shared);
      observations_.push_back(obs.delta() ? FdaObservation::observed(std::move(resampled), *obs.y())
                                          : FdaObservation::missing(std::move(resampled)));
    }
  }
}

FdaDataset FdaDataset::from_arrays(GridPtr grid, const std::vector<std::vector<double>>& curves,
                                   std::span<const double> y, std::span<const bool> delta) {
  if (curves.size() != y.size() || curves.size() != delta.size())
    fail(ErrorCode::kMismatchedLength, "curves, responses and flags must have equal length");
  std::vector<FdaObservation> obs;
  obs.reserve(curves.size());
  for (std::size_t t = 0; t < curves.size(); ++t) {
    Curve c(grid, curves[t]);
    obs.push_back(delta[t] ? FdaObservation::observed(std::move(c), y[t]) : FdaObservation::missing(std::move(c)));
  }
  return FdaDataset(std::move(obs));
}

const GridPtr& FdaDataset::grid() const {
  if (observations_.empty()) fail(ErrorCode::kEmptyDataset, "dataset has no observations");
  return observations_.front().x().grid_ptr();
}

std::size_t FdaDataset::observed_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(observations_.begin(), observations_.end(), [](const auto& o) { return o.delta(); }));
}

std::vector<double> FdaDataset::delta_mask() const {
  std::vector<double> mask(size());
  for (std::size_t t = 0; t < size(); ++t) mask[t] = observations_[t].delta() ? 1.0 : 0.0;
  return mask;
}

std::vector<double> FdaDataset::responses_or_zero() const {
  std::vector<double> y(size());
  for (std::size_t t = 0; t < size(); ++t) y[t] = observations_[t].y().value_or(0.0);
  return y;
}

FdaDataset FdaDataset::with_missing(std::span<const bool> delta) const {
  if (delta.size() != size()) fail(ErrorCode::kMismatchedLength, "one flag per observation expected");
  std::vector<FdaObservation> obs;
  obs.reserve(size());
  for (std::size_t t = 0; t < size(); ++t) {
    const auto& o = observations_[t];
    if (delta[t]) {
      if (!o.delta()) fail(ErrorCode::kInvalidArgument, "cannot reveal a response that was never observed");
      obs.push_back(o);
    } else {
      obs.push_back(FdaObservation::missing(o.x()));
    }
  }
  return FdaDataset(std::move(obs));
}

double trapezoid_integrate(std::span<const double> values, const Grid& grid) {
  if (values.size() != grid.size())
    fail(ErrorCode::kMismatchedLength, "integrand length " + std::to_string(values.size()) +
                                           " != grid length " + std::to_string(grid.size()));
  const auto w = grid.trapezoid_weights();
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) sum += w[i] * values[i];
  return sum;
}

Curve finite_diff_derivative(const Curve& curve, int order) {
  const Grid& grid = curve.grid();
  if (order < 1) fail(ErrorCode::kInvalidArgument, "derivative order must be >= 1");
  if (!grid.is_uniform()) fail(ErrorCode::kNonUniformGrid, "finite differences need a uniform grid");
  const std::size_t p = grid.size();
  if (p <= static_cast<std::size_t>(order) + 1)
    fail(ErrorCode::kGridTooShort, "grid of " + std::to_string(p) + " points is too short for order " +
                                       std::to_string(order));

  const double inv2h = 1.0 / (2.0 * grid.step());
  std::vector<double> cur(curve.values().begin(), curve.values().end());
  std::vector<double> next(p);
  for (int k = 0; k < order; ++k) {
    next[0] = (-3.0 * cur[0] + 4.0 * cur[1] - cur[2]) * inv2h;
    for (std::size_t i = 1; i + 1 < p; ++i) next[i] = (cur[i + 1] - cur[i - 1]) * inv2h;
    next[p - 1] = (3.0 * cur[p - 1] - 4.0 * cur[p - 2] + cur[p - 3]) * inv2h;
    std::swap(cur, next);
  }
  return Curve(curve.grid_ptr(), std::move(cur));
}

std::vector<double> log_returns(std::span<const double> prices) {
  if (prices.size() < 2) fail(ErrorCode::kTooShort, "log returns need at least 2 prices");
  for (std::size_t i = 0; i < prices.size(); ++i)
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i]))
      fail(ErrorCode::kNonPositivePrice, "price at position " + std::to_string(i) + " is not positive");
  std::vector<double> out(prices.size() - 1);
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) out[t] = 100.0 * std::log(prices[t + 1] / prices[t]);
  return out;
}

Curve resample_linear(const Curve& curve, GridPtr target) {
  const auto src = curve.grid().points();
  const auto vals = curve.values();
  std::vector<double> out(target->size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < target->size(); ++i) {
    const double x = target->points()[i];
    if (x <= src.front()) {
      out[i] = vals.front();
      continue;
    }
    if (x >= src.back()) {
      out[i] = vals.back();
      continue;
    }
    while (src[j + 1] < x) ++j;
    const double w = (x - src[j]) / (src[j + 1] - src[j]);
    out[i] = (1.0 - w) * vals[j] + w * vals[j + 1];
  }
  return Curve(std::move(target), std::move(out));
}

}  // namespace fvol
