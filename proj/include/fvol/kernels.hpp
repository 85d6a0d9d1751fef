#pragma once

#include <string>
#include <string_view>

namespace fvol {

enum class KernelFamily { kQuadratic, kTriangular, kUniform };

// Kernel supported on [0, 1] and nonincreasing there.
//   quadratic  K(u) = 1.5 (1 - u^2)
//   triangular K(u) = 2 (1 - u)
//   uniform    K(u) = 1
class Kernel {
 public:
  constexpr Kernel() = default;
  constexpr explicit Kernel(KernelFamily family) : family_(family) {}

  static Kernel from_name(std::string_view name);
  std::string_view name() const noexcept;
  KernelFamily family() const noexcept { return family_; }

  // Zero outside [0, 1].
  double operator()(double u) const noexcept;

  // K^j on the closed support [0, 1], without the indicator; used for exact
  // integrals of (K^j)' between knots.
  double power_on_support(int j, double u) const;

  // d/du K(u)^j for u in [0, 1], j in {1, 2}.
  double power_derivative(int j, double u) const;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  KernelFamily family_ = KernelFamily::kQuadratic;
};

inline double kernel_eval(const Kernel& k, double u) noexcept { return k(u); }
inline double kernel_deriv(const Kernel& k, int j, double u) { return k.power_derivative(j, u); }

}  // namespace fvol
