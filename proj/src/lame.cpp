#include "hpbem/lame.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpbem {

double Material::c1() const {
  const double l = lambda(), u = mu();
  return (l + 3.0 * u) / (4.0 * std::numbers::pi * u * (l + 2.0 * u));
}

double Material::beta0() const {
  const double l = lambda(), u = mu();
  return (l + u) / (l + 3.0 * u);
}

void Material::validate() const {
  if (!(E > 0.0)) throw std::invalid_argument("Young's modulus must be positive");
  if (!(nu > 0.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in (0, 1/2)");
}

Mat2 fundamental_solution(const Vec2& x, const Vec2& y, const Material& m) {
  Vec2 r = x - y;
  double n = r.norm();
  if (n == 0.0) throw std::domain_error("fundamental solution is singular at x = y");
  Vec2 rh = r / n;
  return m.c1() * (-std::log(n) * Mat2::Identity() + m.beta0() * rh * rh.transpose());
}

Mat2 kelvin_gradient(const Vec2& x, const Vec2& y, const Vec2& e, const Material& m) {
  Vec2 r = x - y;
  double r2 = r.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("fundamental solution is singular at x = y");
  const double c1 = m.c1(), b0 = m.beta0();
  Mat2 g = Mat2::Zero();
  for (int i = 0; i < 2; ++i)
    for (int k = 0; k < 2; ++k) {
      double v = 0.0;
      for (int j = 0; j < 2; ++j) {
        double dlog = (i == j) ? -r(k) / r2 : 0.0;
        double ddy = ((i == k ? r(j) : 0.0) + (j == k ? r(i) : 0.0)) / r2 - 2.0 * r(i) * r(j) * r(k) / (r2 * r2);
        v += c1 * (dlog + b0 * ddy) * e(j);
      }
      g(i, k) = v;
    }
  return g;
}

Mat2 stress(const Material& m, const Mat2& grad) {
  Mat2 eps = 0.5 * (grad + grad.transpose());
  return m.lambda() * eps.trace() * Mat2::Identity() + 2.0 * m.mu() * eps;
}

KernelCoeffs single_layer_kernel(const Material& m) { return {m.c1(), m.c1() * m.beta0(), 0.0}; }

KernelCoeffs laplace_double_layer_kernel() { return {0.0, 0.0, 1.0 / (2.0 * std::numbers::pi)}; }

KernelCoeffs double_layer_companion_kernel(const Material& m) {
  const double u = m.mu();
  return {2.0 * u * m.c1() - 1.0 / (2.0 * std::numbers::pi), 2.0 * u * m.c1() * m.beta0(), 0.0};
}

KernelCoeffs hypersingular_kernel(const Material& m) {
  const double l = m.lambda(), u = m.mu();
  const double kappa = u * (l + u) / (std::numbers::pi * (l + 2.0 * u));
  return {kappa, kappa, 0.0};
}

Mat2 evaluate_kernel(const KernelCoeffs& k, const Vec2& x, const Vec2& y, const Vec2& ny) {
  Vec2 r = x - y;
  double r2 = r.squaredNorm();
  if (r2 == 0.0) throw std::domain_error("kernel is singular at x = y");
  double n = std::sqrt(r2);
  Mat2 out = (k.log * -std::log(n) + k.dlayer * r.dot(ny) / r2) * Mat2::Identity();
  if (k.dyad != 0.0) out += k.dyad * (r * r.transpose()) / r2;
  return out;
}

}  // namespace hpbem
