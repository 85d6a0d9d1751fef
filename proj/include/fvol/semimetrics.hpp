#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fvol/fda_core.hpp"

namespace fvol {

struct SemiMetricSpec {
  enum class Kind { kL2, kDerivL2, kPca };

  Kind kind = Kind::kDerivL2;
  int order = 1;       // kDerivL2 only
  int components = 4;  // kPca only

  static SemiMetricSpec l2() { return {Kind::kL2, 0, 0}; }
  static SemiMetricSpec deriv_l2(int order) { return {Kind::kDerivL2, order, 0}; }
  static SemiMetricSpec pca(int k) { return {Kind::kPca, 0, k}; }

  // e.g. {kind = "deriv_l2", order = 1}
  std::string describe() const;

  friend bool operator==(const SemiMetricSpec&, const SemiMetricSpec&) = default;
};

// Leading eigenpairs of the empirical covariance operator, with eigenfunctions
// orthonormal under the grid's trapezoid inner product.
struct PcaBasis {
  GridPtr grid;
  std::vector<std::vector<double>> eigenfunctions;
  std::vector<double> eigenvalues;

  std::size_t components() const noexcept { return eigenvalues.size(); }
};

PcaBasis pca_fit(const FdaDataset& data, int k);
PcaBasis pca_fit(std::span<const Curve> curves, int k);

// sqrt(int (x^(order) - y^(order))^2); order 0 is the plain L2 distance.
double semimetric_l2_deriv(const Curve& x, const Curve& y, int order);
// Euclidean norm of the differences of the quadrature scores on the basis.
double semimetric_pca(const Curve& x, const Curve& y, const PcaBasis& basis);

// A resolved semi-metric. Every supported kind is a Euclidean distance after
// embedding, so curves are embedded once and compared cheaply afterwards.
class SemiMetric {
 public:
  explicit SemiMetric(SemiMetricSpec spec, std::optional<PcaBasis> basis = std::nullopt);
  // Fits the PCA basis on the dataset curves when the spec needs one.
  static SemiMetric fit(const SemiMetricSpec& spec, const FdaDataset& data);

  const SemiMetricSpec& spec() const noexcept { return spec_; }
  const std::optional<PcaBasis>& basis() const noexcept { return basis_; }

  std::vector<double> embed(const Curve& x) const;
  static double embedded_distance(std::span<const double> a, std::span<const double> b) noexcept;
  double operator()(const Curve& x, const Curve& y) const;

 private:
  SemiMetricSpec spec_;
  std::optional<PcaBasis> basis_;
};

// Dense symmetric matrix with an exactly zero diagonal.
class DistanceMatrix {
 public:
  DistanceMatrix() = default;
  explicit DistanceMatrix(std::size_t n) : n_(n), d_(n * n, 0.0) {}

  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return d_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {d_.data() + i * n_, n_}; }
  void set(std::size_t i, std::size_t j, double v) noexcept {
    d_[i * n_ + j] = v;
    d_[j * n_ + i] = v;
  }

 private:
  std::size_t n_ = 0;
  std::vector<double> d_;
};

DistanceMatrix distance_matrix(const FdaDataset& data, const SemiMetric& metric);
DistanceMatrix distance_matrix(const FdaDataset& data, const SemiMetricSpec& spec);

}  // namespace fvol
