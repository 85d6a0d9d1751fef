#include "fvol/bandwidth.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fvol/stats.hpp"

namespace fvol {
namespace {

bool in_mask(std::span<const double> mask, std::size_t t) noexcept { return mask.empty() || mask[t] != 0.0; }

std::string format_stage(const char* name, Mode mode, const CvSelection& sel) {
  std::ostringstream os;
  os << name << " (" << mode_name(mode) << "): selected " << sel.bandwidth;
  std::size_t skipped = 0;
  for (const auto& c : sel.candidates) skipped += c.score ? 0 : 1;
  if (skipped) os << ", " << skipped << " of " << sel.candidates.size() << " candidates skipped";
  return os.str();
}

void append_skips(std::vector<std::string>& log, const char* name, const CvSelection& sel) {
  for (const auto& c : sel.candidates)
    if (!c.score) log.push_back(std::string("  ") + name + " skipped h=" + std::to_string(c.bandwidth) + ": " +
                                c.skip_reason);
}

struct Stage {
  std::shared_ptr<const SampleGeometry> geometry;
  std::optional<NeighborIndex> index[kRoleCount];

  const NeighborIndex& neighbors(Role r) {
    auto& slot = index[static_cast<std::size_t>(r)];
    if (!slot) slot.emplace(geometry->matrix(r));
    return *slot;
  }
};

CvSelection select_with(Stage& st, const EstimatorConfig& cfg, const BandwidthGrid& grid, const FdaDataset& data,
                        Role role, Mode mode) {
  const VolatilityEstimator est(data, cfg, st.geometry);
  const auto delta = data.delta_mask();
  const bool imputed = mode == Mode::kImputed;
  const std::span<const double> mask = imputed ? std::span<const double>{} : std::span<const double>(delta);
  const NeighborIndex& idx = st.neighbors(role);
  const Kernel& k = cfg.kernel(role);
  const std::size_t knn = cfg.knn_override;

  switch (role) {
    case Role::kRegression: {
      if (imputed) {
        const auto fit = est.regression_fit(Mode::kImputed);
        return cv_select(idx, k, grid, fit.imputed_responses, {}, {}, fit.imputed_responses, knn);
      }
      const auto y = data.responses_or_zero();
      return cv_select(idx, k, grid, y, mask, mask, y, knn);
    }
    case Role::kVariance: {
      if (imputed) {
        const auto r = est.imputed_residuals();
        return cv_select(idx, k, grid, r, {}, {}, r, knn);
      }
      std::vector<double> r(data.size(), 0.0);
      const auto rs = est.squared_residuals();
      for (std::size_t t = 0; t < r.size(); ++t) r[t] = rs[t].value_or(0.0);
      return cv_select(idx, k, grid, r, mask, mask, r, knn);
    }
    case Role::kOmega: {
      // Observations without a usable standardized residual take no part.
      const auto targets = est.omega_targets(mode);
      std::vector<double> usable(targets.size(), 0.0);
      std::vector<double> clean(targets.begin(), targets.end());
      for (std::size_t t = 0; t < targets.size(); ++t) {
        usable[t] = in_mask(mask, t) && !std::isnan(targets[t]) ? 1.0 : 0.0;
        if (std::isnan(clean[t])) clean[t] = 0.0;
      }
      if (std::none_of(usable.begin(), usable.end(), [](double u) { return u != 0.0; }))
        fail(ErrorCode::kDegenerateVarianceAtObservation, "no observation has a usable standardized residual");
      return cv_select(idx, k, grid, clean, usable, usable, clean, knn);
    }
    case Role::kPi:
      return cv_select(idx, k, grid, delta, {}, {}, delta, knn);
  }
  fail(ErrorCode::kInternal, "unknown role");
}

Stage make_stage(const FdaDataset& data, const EstimatorConfig& cfg, std::shared_ptr<const SampleGeometry> geometry) {
  Stage st;
  st.geometry = geometry ? std::move(geometry) : std::make_shared<const SampleGeometry>(data, cfg);
  return st;
}

}  // namespace

BandwidthGrid candidate_grid(const DistanceMatrix& dist, std::size_t n_candidates, double q_min, double q_max) {
  if (dist.size() == 0) fail(ErrorCode::kInvalidArgument, "empty distance matrix");
  if (n_candidates == 0) fail(ErrorCode::kInvalidArgument, "at least one candidate is required");
  if (!(q_min > 0 && q_min < q_max && q_max <= 1))
    fail(ErrorCode::kInvalidArgument, "quantile range must satisfy 0 < q_min < q_max <= 1");

  std::vector<double> positive;
  for (std::size_t i = 0; i < dist.size(); ++i)
    for (std::size_t j = i + 1; j < dist.size(); ++j)
      if (dist(i, j) > 0) positive.push_back(dist(i, j));
  if (positive.empty()) fail(ErrorCode::kAllDistancesZero, "no strictly positive pairwise distance");
  std::sort(positive.begin(), positive.end());

  BandwidthGrid grid;
  for (std::size_t c = 0; c < n_candidates; ++c) {
    const double q = n_candidates == 1
                         ? q_min
                         : q_min + (q_max - q_min) * static_cast<double>(c) / static_cast<double>(n_candidates - 1);
    grid.candidates.push_back(quantile_linear(positive, q));
  }
  grid.candidates.erase(std::unique(grid.candidates.begin(), grid.candidates.end()), grid.candidates.end());
  return grid;
}

NeighborIndex::NeighborIndex(const DistanceMatrix& dist) : rows_(dist.size()) {
  for (std::size_t t = 0; t < dist.size(); ++t) {
    auto& row = rows_[t];
    row.reserve(dist.size() - 1);
    for (std::size_t s = 0; s < dist.size(); ++s)
      if (s != t) row.push_back({dist(t, s), s});
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) {
      return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
    });
  }
}

CvSelection cv_select(const NeighborIndex& index, const Kernel& kernel, const BandwidthGrid& grid,
                      std::span<const double> values, std::span<const double> estimator_mask,
                      std::span<const double> scored_mask, std::span<const double> targets, std::size_t knn) {
  if (grid.candidates.empty()) fail(ErrorCode::kInvalidArgument, "empty bandwidth grid");
  const std::size_t n = index.size();
  if (values.size() != n || targets.size() != n) fail(ErrorCode::kMismatchedLength, "criterion inputs must have length n");

  double scale = 0.0;
  std::size_t scored = 0;
  for (std::size_t t = 0; t < n; ++t)
    if (in_mask(scored_mask, t)) {
      scale += targets[t] * targets[t];
      ++scored;
    }
  scale = scored ? scale / static_cast<double>(scored) : 0.0;

  CvSelection sel;
  std::optional<double> best;
  for (double h : grid.candidates) {
    CvCandidate cand{h, std::nullopt, {}};
    double total = 0.0;
    bool feasible = true;
    for (std::size_t t = 0; t < n && feasible; ++t) {
      if (!in_mask(scored_mask, t)) continue;
      double num = 0.0;
      double den = 0.0;
      auto accumulate = [&](double radius) {
        for (const auto& e : index.neighbors(t)) {
          if (e.distance > radius) break;
          if (!in_mask(estimator_mask, e.index)) continue;
          const double w = kernel(e.distance / radius);
          if (w <= 0) continue;
          num += w * values[e.index];
          den += w;
        }
      };
      accumulate(h);
      if (!(den > 0) && knn > 0) {
        std::size_t seen = 0;
        double kth = 0.0;
        for (const auto& e : index.neighbors(t)) {
          if (!in_mask(estimator_mask, e.index)) continue;
          kth = e.distance;
          if (++seen == knn) break;
        }
        if (seen > 0 && kth > 0) accumulate(kth * (1.0 + 1e-6));
      }
      if (!(den > 0)) {
        feasible = false;
        cand.skip_reason = "observation " + std::to_string(t) + " has no neighbor after leaving it out";
        break;
      }
      const double resid = targets[t] - num / den;
      total += resid * resid;
    }
    if (feasible) {
      cand.score = total;
      if (!best || total < *best - 1e-12 * (*best + scale)) {
        best = total;
        sel.bandwidth = h;
      }
    }
    sel.candidates.push_back(std::move(cand));
  }
  if (!best) fail(ErrorCode::kNoFeasibleCandidate, "every candidate bandwidth leaves some observation without neighbors");
  return sel;
}

CvSelection cv_select_h1(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid, Mode mode) {
  Stage st = make_stage(data, cfg, nullptr);
  return select_with(st, cfg, grid, data, Role::kRegression, mode);
}

CvSelection cv_select_h2(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid, Mode mode) {
  Stage st = make_stage(data, cfg, nullptr);
  return select_with(st, cfg, grid, data, Role::kVariance, mode);
}

CvSelection cv_select_h3(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid, Mode mode) {
  Stage st = make_stage(data, cfg, nullptr);
  return select_with(st, cfg, grid, data, Role::kOmega, mode);
}

CvSelection cv_select_h4(const FdaDataset& data, const EstimatorConfig& cfg, const BandwidthGrid& grid) {
  Stage st = make_stage(data, cfg, nullptr);
  return select_with(st, cfg, grid, data, Role::kPi, Mode::kSimplified);
}

BandwidthReport select_bandwidths(const FdaDataset& data, const EstimatorConfig& cfg_in, const CvOptions& opts,
                                  std::shared_ptr<const SampleGeometry> geometry, bool with_imputed) {
  Stage st = make_stage(data, cfg_in, std::move(geometry));
  EstimatorConfig cfg = cfg_in;
  cfg.imputed_bandwidths.reset();
  BandwidthReport report;

  auto grid_for = [&](Role r) { return candidate_grid(st.geometry->matrix(r), opts.grid_size, opts.q_min, opts.q_max); };
  auto automatic = [&](Role r) { return opts.automatic[static_cast<std::size_t>(r)]; };
  static constexpr const char* kNames[] = {"h1", "h2", "h3", "h4"};

  const Mode base = data.fully_observed() ? Mode::kComplete : Mode::kSimplified;
  for (Role r : {Role::kRegression, Role::kVariance, Role::kOmega, Role::kPi}) {
    if (!automatic(r)) continue;
    const auto sel = select_with(st, cfg, grid_for(r), data, r, base);
    cfg.bandwidths[r] = sel.bandwidth;
    report.log.push_back(format_stage(kNames[static_cast<std::size_t>(r)], base, sel));
    append_skips(report.log, kNames[static_cast<std::size_t>(r)], sel);
  }
  report.simplified = cfg.bandwidths;

  if (with_imputed && !data.fully_observed()) {
    cfg.imputed_bandwidths = cfg.bandwidths;
    for (Role r : {Role::kRegression, Role::kVariance, Role::kOmega}) {
      if (!automatic(r)) continue;
      const auto sel = select_with(st, cfg, grid_for(r), data, r, Mode::kImputed);
      (*cfg.imputed_bandwidths)[r] = sel.bandwidth;
      report.log.push_back(format_stage(kNames[static_cast<std::size_t>(r)], Mode::kImputed, sel));
      append_skips(report.log, kNames[static_cast<std::size_t>(r)], sel);
    }
    report.imputed = cfg.bandwidths_for(Mode::kImputed);
  }
  return report;
}

EstimatorConfig with_bandwidths(EstimatorConfig cfg, const BandwidthReport& report) {
  cfg.bandwidths = report.simplified;
  cfg.imputed_bandwidths = report.imputed;
  return cfg;
}

}  // namespace fvol
