#pragma once

#include <Eigen/Dense>

#include "hpbem/mesh.hpp"

namespace hpbem {

using Mat2 = Eigen::Matrix2d;

// PlaneStress pairs lambda = E nu / (1 - nu^2) with the shear modulus
// E / (2 (1 + nu)); Printed uses E / (1 + nu) with the same lambda.
enum class LameConvention { PlaneStress, Printed };

struct Material {
  double E = 1.0;
  double nu = 0.3;
  LameConvention convention = LameConvention::PlaneStress;

  double lambda() const { return E * nu / (1.0 - nu * nu); }
  double mu() const { return convention == LameConvention::PlaneStress ? E / (2.0 * (1.0 + nu)) : E / (1.0 + nu); }
  // G(x,y) = c1 (-log r I + beta0 rhat rhat^T)
  double c1() const;
  double beta0() const;
  void validate() const;  // throws std::invalid_argument
};

Mat2 fundamental_solution(const Vec2& x, const Vec2& y, const Material& m);
// Jacobian d/dx of the Kelvin field x -> G(x,y) e; entry (i,k) = d_k (G e)_i.
Mat2 kelvin_gradient(const Vec2& x, const Vec2& y, const Vec2& e, const Material& m);
// Cauchy stress of a displacement gradient (entry (i,k) = d_k u_i).
Mat2 stress(const Material& m, const Mat2& grad);

// Kernels of the form  log (-log r) I + dyad rhat rhat^T + dlayer ((x-y).n_y / r^2) I
// with r = x - y.
struct KernelCoeffs {
  double log = 0.0;
  double dyad = 0.0;
  double dlayer = 0.0;
  bool zero() const { return log == 0.0 && dyad == 0.0 && dlayer == 0.0; }
};

// Fundamental solution (single layer kernel).
KernelCoeffs single_layer_kernel(const Material& m);
// Laplace double layer part of the double layer operator.
KernelCoeffs laplace_double_layer_kernel();
// 2 mu G - E I, paired with R d/ds u in the double layer operator.
KernelCoeffs double_layer_companion_kernel(const Material& m);
// Kernel paired with tangential derivatives in the hypersingular operator.
KernelCoeffs hypersingular_kernel(const Material& m);

Mat2 evaluate_kernel(const KernelCoeffs& k, const Vec2& x, const Vec2& y, const Vec2& ny);

// Rotation by +90 degrees: R (a,b) = (-b,a).
inline Mat2 rot90() {
  Mat2 R;
  R << 0, -1, 1, 0;
  return R;
}

}  // namespace hpbem
