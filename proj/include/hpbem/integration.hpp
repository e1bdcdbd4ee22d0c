#pragma once

#include <vector>

#include "hpbem/mesh.hpp"

namespace hpbem {

// Quadrature point for a double integral over (test element, trial element)
// in reference coordinates (s, t). Geometry is resolved into three kernel
// factors so that any kernel
//   log (-log r) I + dyad rhat rhat^T + dlayer ((x-y).n_y / r^2) I
// evaluates to  log*a0 I + dyad*A1 + dlayer*a2 I.
// Singular parts of -log r are absorbed into the weights: such points carry
// a0 = 1 and A1 = 0, a2 = 0.
struct KernelPoint {
  double s = 0, t = 0, w = 0;
  double a0 = 0;
  double a1xx = 0, a1xy = 0, a1yy = 0;
  double a2 = 0;
};

// Rule for int_{T_x} int_{T_y} f(s) k(x,y) g(t), the reference Jacobians
// h_x/2 and h_y/2 included in w. deg_x, deg_y bound the polynomial degrees
// of f and g.
void pair_rule(const BoundaryMesh& mesh, int ex, int ey, int deg_x, int deg_y, double tol,
               std::vector<KernelPoint>& out);

// Rule for int_{T_y} k(z, y(t)) g(t) dt (Jacobian included); s is unused.
// z may lie anywhere, including on T_y.
void point_rule(const BoundaryMesh& mesh, const Vec2& z, int ey, int deg_y, double tol,
                std::vector<KernelPoint>& out);

// Distance between two segments.
double segment_distance(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2);

}  // namespace hpbem
