#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fvol/error.hpp"

namespace fvol {

// Strictly increasing abscissae shared by every curve of a dataset.
class Grid {
 public:
  explicit Grid(std::vector<double> points);

  // n equally spaced points covering [lo, hi].
  static std::shared_ptr<const Grid> uniform(double lo, double hi, std::size_t n);

  std::span<const double> points() const noexcept { return points_; }
  std::size_t size() const noexcept { return points_.size(); }
  double front() const noexcept { return points_.front(); }
  double back() const noexcept { return points_.back(); }
  bool is_uniform() const noexcept { return uniform_; }
  // Only meaningful for uniform grids.
  double step() const noexcept { return (back() - front()) / static_cast<double>(size() - 1); }

  // Composite trapezoid weights: sum_i w_i f_i approximates the integral over the span.
  std::span<const double> trapezoid_weights() const noexcept { return weights_; }

  bool same_as(const Grid& other) const noexcept;

 private:
  std::vector<double> points_;
  std::vector<double> weights_;
  bool uniform_ = false;
};

using GridPtr = std::shared_ptr<const Grid>;

class Curve {
 public:
  Curve(GridPtr grid, std::vector<double> values);

  const Grid& grid() const noexcept { return *grid_; }
  const GridPtr& grid_ptr() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

// A curve with its (possibly missing) scalar response. delta() is true iff the
// response was observed.
class FdaObservation {
 public:
  static FdaObservation observed(Curve x, double y);
  static FdaObservation missing(Curve x);

  const Curve& x() const noexcept { return x_; }
  const std::optional<double>& y() const noexcept { return y_; }
  bool delta() const noexcept { return y_.has_value(); }

 private:
  FdaObservation(Curve x, std::optional<double> y) : x_(std::move(x)), y_(y) {}

  Curve x_;
  std::optional<double> y_;
};

// Time-ordered observations on one shared grid. Curves supplied on a different
// grid are linearly resampled onto the grid of the first observation.
class FdaDataset {
 public:
  explicit FdaDataset(std::vector<FdaObservation> observations);

  // Builds a dataset from raw arrays; delta[t] == false marks y[t] as missing.
  static FdaDataset from_arrays(GridPtr grid, const std::vector<std::vector<double>>& curves,
                                std::span<const double> y, std::span<const bool> delta);

  std::size_t size() const noexcept { return observations_.size(); }
  bool empty() const noexcept { return observations_.empty(); }
  const FdaObservation& operator[](std::size_t t) const noexcept { return observations_[t]; }
  std::span<const FdaObservation> observations() const noexcept { return observations_; }
  const GridPtr& grid() const;

  std::size_t observed_count() const noexcept;
  bool fully_observed() const noexcept { return observed_count() == size(); }

  // delta_t as 0/1 doubles, convenient as kernel-average masks.
  std::vector<double> delta_mask() const;
  // y_t where observed, 0 elsewhere.
  std::vector<double> responses_or_zero() const;

  // Same curves with responses masked according to delta (y must be present where delta is set).
  FdaDataset with_missing(std::span<const bool> delta) const;

 private:
  std::vector<FdaObservation> observations_;
};

double trapezoid_integrate(std::span<const double> values, const Grid& grid);

// Central differences inside, second-order one-sided differences at both ends,
// applied `order` times.
Curve finite_diff_derivative(const Curve& curve, int order);

// 100 * ln(p[t+1] / p[t]).
std::vector<double> log_returns(std::span<const double> prices);

Curve resample_linear(const Curve& curve, GridPtr target);

}  // namespace fvol
