#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "fvol/estimators.hpp"
#include "fvol/fda_core.hpp"
#include "oracle.hpp"

namespace fixtures {

inline fvol::GridPtr grid_of(const oracle::Vec& points) { return std::make_shared<const fvol::Grid>(points); }

inline fvol::FdaDataset dataset(const fvol::GridPtr& grid, const oracle::Mat& curves, const oracle::Vec& y,
                                const std::vector<int>& delta) {
  std::vector<fvol::FdaObservation> obs;
  for (std::size_t t = 0; t < curves.size(); ++t) {
    fvol::Curve c(grid, curves[t]);
    obs.push_back(delta[t] ? fvol::FdaObservation::observed(c, y[t]) : fvol::FdaObservation::missing(c));
  }
  return fvol::FdaDataset(std::move(obs));
}

// A random instance with its library twin: curves, heteroscedastic responses,
// random missingness and bandwidths near the median distance.
struct Instance {
  oracle::Vec grid_points;
  oracle::Mat curves;
  oracle::Vec y;
  std::vector<int> delta;
  oracle::Sample sample;
  fvol::GridPtr grid;
  fvol::EstimatorConfig cfg;

  fvol::FdaDataset data() const { return dataset(grid, curves, y, delta); }
  fvol::Curve curve(const oracle::Vec& v) const { return fvol::Curve(grid, v); }
};

inline double median_offdiag(const oracle::Mat& d) {
  std::vector<double> v;
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = i + 1; j < d.size(); ++j) v.push_back(d[i][j]);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
  return v[v.size() / 2];
}

inline Instance random_instance(std::mt19937_64& rng, std::size_t n, double missing = 0.3, int order = 1,
                                std::size_t p = 21) {
  Instance in;
  in.grid_points = oracle::uniform_grid(p);
  in.grid = grid_of(in.grid_points);
  in.curves = oracle::random_curves(n, in.grid_points, rng);
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> u01;
  for (const auto& c : in.curves) {
    double level = c[p / 2];
    in.y.push_back(level + std::sqrt(0.5 + level * level) * z(rng));
    in.delta.push_back(u01(rng) >= missing ? 1 : 0);
  }
  in.delta[0] = 1;

  in.sample.y = in.y;
  for (std::size_t t = 0; t < n; ++t)
    if (!in.delta[t]) in.sample.y[t] = 0;
  in.sample.delta = in.delta;
  oracle::Mat d = oracle::distances(in.curves, in.grid_points, order);
  for (auto& m : in.sample.d) m = d;
  const double med = median_offdiag(d);
  std::uniform_real_distribution<double> f(0.6, 1.6);
  fvol::Bandwidths b{med * f(rng), med * f(rng), med * f(rng), med * f(rng)};
  fvol::Bandwidths bi{med * f(rng), med * f(rng), med * f(rng), b.h4};
  for (int r = 0; r < 4; ++r) in.sample.h[r] = b[static_cast<fvol::Role>(r)];
  for (int r = 0; r < 3; ++r) in.sample.hi[r] = bi[static_cast<fvol::Role>(r)];

  const auto spec = order == 0 ? fvol::SemiMetricSpec::l2() : fvol::SemiMetricSpec::deriv_l2(order);
  in.cfg.metric_m = in.cfg.metric_u = in.cfg.metric_omega = in.cfg.metric_pi = spec;
  in.cfg.bandwidths = b;
  in.cfg.imputed_bandwidths = bi;
  return in;
}

}  // namespace fixtures
