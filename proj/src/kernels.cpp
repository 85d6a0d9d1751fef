#include "fvol/kernels.hpp"

#include <cmath>

#include "fvol/error.hpp"

namespace fvol {
namespace {

double base_value(KernelFamily f, double u) noexcept {
  switch (f) {
    case KernelFamily::kQuadratic: return 1.5 * (1.0 - u * u);
    case KernelFamily::kTriangular: return 2.0 * (1.0 - u);
    case KernelFamily::kUniform: return 1.0;
  }
  return 0.0;
}

double base_derivative(KernelFamily f, double u) noexcept {
  switch (f) {
    case KernelFamily::kQuadratic: return -3.0 * u;
    case KernelFamily::kTriangular: return -2.0;
    case KernelFamily::kUniform: return 0.0;
  }
  return 0.0;
}

void check_power(int j) {
  if (j != 1 && j != 2) fail(ErrorCode::kInvalidArgument, "kernel power must be 1 or 2");
}

}  // namespace

Kernel Kernel::from_name(std::string_view name) {
  if (name == "quadratic") return Kernel(KernelFamily::kQuadratic);
  if (name == "triangular") return Kernel(KernelFamily::kTriangular);
  if (name == "uniform") return Kernel(KernelFamily::kUniform);
  fail(ErrorCode::kInvalidArgument, "unknown kernel '" + std::string(name) + "'");
}

std::string_view Kernel::name() const noexcept {
  switch (family_) {
    case KernelFamily::kQuadratic: return "quadratic";
    case KernelFamily::kTriangular: return "triangular";
    case KernelFamily::kUniform: return "uniform";
  }
  return "quadratic";
}

double Kernel::operator()(double u) const noexcept {
  if (!(u >= 0.0 && u <= 1.0)) return 0.0;
  return base_value(family_, u);
}

double Kernel::power_on_support(int j, double u) const {
  check_power(j);
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::kOutOfSupport, "u must lie in [0, 1]");
  const double k = base_value(family_, u);
  return j == 1 ? k : k * k;
}

double Kernel::power_derivative(int j, double u) const {
  check_power(j);
  if (!(u >= 0.0 && u <= 1.0)) fail(ErrorCode::kOutOfSupport, "u must lie in [0, 1]");
  const double d = base_derivative(family_, u);
  return j == 1 ? d : 2.0 * base_value(family_, u) * d;
}

}  // namespace fvol
