#include "fvol/semimetrics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace fvol {
namespace {

void require_same_grid(const Curve& x, const Curve& y) {
  if (!x.grid().same_as(y.grid())) fail(ErrorCode::kMismatchedGrid, "curves live on different grids");
}

}  // namespace

std::string SemiMetricSpec::describe() const {
  switch (kind) {
    case Kind::kL2: return "{kind = \"l2\"}";
    case Kind::kDerivL2: return "{kind = \"deriv_l2\", order = " + std::to_string(order) + "}";
    case Kind::kPca: return "{kind = \"pca\", k = " + std::to_string(components) + "}";
  }
  return "{}";
}

PcaBasis pca_fit(const FdaDataset& data, int k) {
  std::vector<Curve> curves;
  curves.reserve(data.size());
  for (const auto& o : data.observations()) curves.push_back(o.x());
  return pca_fit(curves, k);
}

PcaBasis pca_fit(std::span<const Curve> curves, int k) {
  if (curves.empty()) fail(ErrorCode::kEmptyDataset, "PCA needs at least one curve");
  const Grid& grid = curves.front().grid();
  const auto p = static_cast<Eigen::Index>(grid.size());
  if (k < 1 || k > p) fail(ErrorCode::kKTooLarge, "k must lie in [1, grid size]");

  const auto n = static_cast<Eigen::Index>(curves.size());
  Eigen::MatrixXd x(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Curve& c = curves[static_cast<std::size_t>(i)];
    require_same_grid(curves.front(), c);
    for (Eigen::Index j = 0; j < p; ++j) x(i, j) = c[static_cast<std::size_t>(j)];
  }
  x.rowwise() -= x.colwise().mean();
  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n);

  const auto w = grid.trapezoid_weights();
  Eigen::VectorXd sw(p);
  for (Eigen::Index j = 0; j < p; ++j) sw(j) = std::sqrt(w[static_cast<std::size_t>(j)]);
  const Eigen::MatrixXd weighted = sw.asDiagonal() * cov * sw.asDiagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(weighted);
  if (solver.info() != Eigen::Success) fail(ErrorCode::kInternal, "eigen-decomposition failed");

  PcaBasis basis;
  basis.grid = curves.front().grid_ptr();
  for (int c = 0; c < k; ++c) {
    const Eigen::Index col = p - 1 - c;  // eigenvalues come out ascending
    Eigen::VectorXd phi = solver.eigenvectors().col(col).cwiseQuotient(sw);
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi(arg) < 0) phi = -phi;
    basis.eigenfunctions.emplace_back(phi.data(), phi.data() + p);
    basis.eigenvalues.push_back(solver.eigenvalues()(col));
  }
  return basis;
}

double semimetric_l2_deriv(const Curve& x, const Curve& y, int order) {
  require_same_grid(x, y);
  if (order < 0) fail(ErrorCode::kInvalidArgument, "derivative order must be >= 0");
  const Curve dx = order == 0 ? x : finite_diff_derivative(x, order);
  const Curve dy = order == 0 ? y : finite_diff_derivative(y, order);
  std::vector<double> sq(x.size());
  for (std::size_t i = 0; i < sq.size(); ++i) {
    const double d = dx[i] - dy[i];
    sq[i] = d * d;
  }
  return std::sqrt(std::max(0.0, trapezoid_integrate(sq, x.grid())));
}

double semimetric_pca(const Curve& x, const Curve& y, const PcaBasis& basis) {
  require_same_grid(x, y);
  if (!basis.grid || !x.grid().same_as(*basis.grid))
    fail(ErrorCode::kMismatchedGrid, "curve grid differs from the PCA basis grid");
  const auto w = x.grid().trapezoid_weights();
  double total = 0.0;
  for (const auto& phi : basis.eigenfunctions) {
    double score = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) score += w[i] * (x[i] - y[i]) * phi[i];
    total += score * score;
  }
  return std::sqrt(total);
}

SemiMetric::SemiMetric(SemiMetricSpec spec, std::optional<PcaBasis> basis)
    : spec_(spec), basis_(std::move(basis)) {
  if (spec_.kind == SemiMetricSpec::Kind::kPca) {
    if (!basis_) fail(ErrorCode::kPcaNotFitted, "pca semi-metric needs a fitted basis");
    if (spec_.components < 1) fail(ErrorCode::kInvalidArgument, "pca needs k >= 1");
  }
  if (spec_.kind == SemiMetricSpec::Kind::kDerivL2 && spec_.order < 0)
    fail(ErrorCode::kInvalidArgument, "derivative order must be >= 0");
}

SemiMetric SemiMetric::fit(const SemiMetricSpec& spec, const FdaDataset& data) {
  if (spec.kind == SemiMetricSpec::Kind::kPca) return SemiMetric(spec, pca_fit(data, spec.components));
  return SemiMetric(spec);
}

std::vector<double> SemiMetric::embed(const Curve& x) const {
  const auto w = x.grid().trapezoid_weights();
  if (spec_.kind == SemiMetricSpec::Kind::kPca) {
    if (!x.grid().same_as(*basis_->grid))
      fail(ErrorCode::kMismatchedGrid, "curve grid differs from the PCA basis grid");
    std::vector<double> scores;
    scores.reserve(basis_->components());
    for (const auto& phi : basis_->eigenfunctions) {
      double s = 0.0;
      for (std::size_t i = 0; i < phi.size(); ++i) s += w[i] * x[i] * phi[i];
      scores.push_back(s);
    }
    return scores;
  }
  const int order = spec_.kind == SemiMetricSpec::Kind::kL2 ? 0 : spec_.order;
  const Curve d = order == 0 ? x : finite_diff_derivative(x, order);
  std::vector<double> out(d.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::sqrt(w[i]) * d[i];
  return out;
}

double SemiMetric::embedded_distance(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double SemiMetric::operator()(const Curve& x, const Curve& y) const {
  require_same_grid(x, y);
  return embedded_distance(embed(x), embed(y));
}

DistanceMatrix distance_matrix(const FdaDataset& data, const SemiMetric& metric) {
  const std::size_t n = data.size();
  std::vector<std::vector<double>> emb;
  emb.reserve(n);
  for (const auto& o : data.observations()) emb.push_back(metric.embed(o.x()));
  DistanceMatrix d(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) d.set(i, j, SemiMetric::embedded_distance(emb[i], emb[j]));
  return d;
}

DistanceMatrix distance_matrix(const FdaDataset& data, const SemiMetricSpec& spec) {
  if (data.empty()) return DistanceMatrix(0);
  return distance_matrix(data, SemiMetric::fit(spec, data));
}

}  // namespace fvol
