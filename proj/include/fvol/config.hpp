#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "fvol/bandwidth.hpp"
#include "fvol/estimators.hpp"
#include "fvol/pipeline.hpp"
#include "fvol/simulation.hpp"

namespace fvol {

// Settings shared by every CLI subcommand. Keys match the long CLI flags:
//
//   seed = 7
//   level = 0.05
//   h1 = "auto"                  # or a number
//   cv-quantile-range = [0.05, 0.5]
//   semimetric = { kind = "deriv_l2", order = 1 }
//
//   [simulate]
//   model = 1
//   n = 300
//
// Keys inside [estimator] and [cv] may also be written without the section
// (cv keys then take the `cv-` prefix); [simulate] and [finance] keys are
// addressed as `simulate.n`, `finance.zeta`.
inline constexpr std::size_t kSimulationKnn = 5;

struct RunConfig {
  std::uint64_t seed = 1;
  std::size_t threads = 1;
  double level = 0.05;
  Mode mode = Mode::kImputed;
  EstimatorConfig estimator;
  CvOptions cv;
  bool semimetric_set = false;
  bool knn_set = false;

  int model = 1;
  std::size_t n = 300;
  double eta = 0.2;
  std::size_t replications = 500;
  std::size_t eval_size = 100;
  std::size_t grid_size = 100;

  double zeta = 0.0;  // 0: responses left fully observed
  int pca_components = 4;

  void set(std::string_view key, std::string_view value);

  // The kNN fallback defaults to kSimulationKnn here unless set explicitly.
  SimConfig simulation() const;
  // Semi-metrics default to PCA unless one was configured explicitly.
  PipelineOptions pipeline() const;
};

SemiMetricSpec parse_semimetric(std::string_view text);
std::vector<std::string> config_keys();

void parse_config(std::istream& in, RunConfig& cfg, const std::string& source = "<config>");
void load_config(const std::string& path, RunConfig& cfg);

}  // namespace fvol
