#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hpbem/mesh.hpp"
#include "hpbem/quadrature.hpp"

namespace hpbem {

enum class ShapeKind { None, Primal, Legendre, LagrangeGauss };

// Local scalar functions on the reference element [-1,1].
struct ShapeSet {
  ShapeKind kind = ShapeKind::None;
  int degree = 0;

  int size() const { return kind == ShapeKind::None ? 0 : degree + 1; }
  // v[i], dv[i] = value and d/dt of shape i at t.
  void eval(double t, double* v, double* dv = nullptr) const;
};

// One vector-valued global basis function restricted to an element:
// shape function `f` times the constant direction `dir`.
struct LocalEntry {
  int f;
  Vec2 dir;
  int dof;
};

struct Pin {
  Vec2 point;
  bool fix[2] = {true, true};
};

// A finite element space on the boundary mesh, described element by element.
struct DiscreteSpace {
  std::vector<ShapeSet> shapes;                 // per element
  std::vector<std::vector<LocalEntry>> local;   // per element
  std::vector<int> elements;                    // supporting elements (chain order)
  int ndofs = 0;

  bool supports(int e) const { return !local[e].empty(); }
  Vec2 eval(const Eigen::VectorXd& coeff, int e, double t) const;
  Vec2 eval_dt(const Eigen::VectorXd& coeff, int e, double t) const;  // d/dt on the reference element
};

// Continuous, degree p_T, two components, zero on Dirichlet parts and at the
// pinned components of pin points.
DiscreteSpace primal_space(const BoundaryMesh& mesh, const std::vector<Pin>& pins = {});
// Discontinuous Legendre of degree p_T - 1 on every element.
DiscreteSpace dual_space(const BoundaryMesh& mesh);
// Discontinuous Legendre of degree p_T + extra on the listed elements
// (ascending ids), Cartesian directions.
DiscreteSpace legendre_space(const BoundaryMesh& mesh, const std::vector<int>& elements, int extra_degree);
// Discontinuous Legendre of degree p_T + extra on contact elements.
DiscreteSpace projection_space(const BoundaryMesh& mesh, int extra_degree = 0);
// Nodal Lagrange at the p_T+1 Gauss points of each contact element;
// components along (normal, tangent); on each element the entries come in
// node order, normal before tangent.
DiscreteSpace multiplier_space(const BoundaryMesh& mesh);

struct ConstraintNode {
  int element;
  double t;       // reference coordinate
  double weight;  // Gauss weight times h_T/2
  Vec2 x, normal, tangent;
  int dof_n, dof_t;
};
std::vector<ConstraintNode> constraint_nodes(const BoundaryMesh& mesh, const DiscreteSpace& multiplier);

// Number of free vertices of a primal space (for dimension checks).
int count_free_vertices(const BoundaryMesh& mesh, const std::vector<Pin>& pins = {});

// Coefficients in a primal space: vertex values of f, interior shapes from
// the H^1-seminorm projection on each element. Removed dofs are ignored.
Eigen::VectorXd interpolate_primal(const BoundaryMesh& mesh, const DiscreteSpace& X,
                                   const std::function<Vec2(const Vec2&)>& f, int quad_points = 20);
// Elementwise L2 projection into a Legendre space (dual or projection space).
// f receives the element id so that one-sided values at corners are possible.
Eigen::VectorXd project_legendre(const BoundaryMesh& mesh, const DiscreteSpace& Y,
                                 const std::function<Vec2(int, const Vec2&)>& f, int quad_points = 20);

using ElementWeight = std::function<double(int element, const Vec2& x)>;

// Entry (i,j) = int w a_i . b_j ds over elements carrying both spaces.
Eigen::MatrixXd assemble_mass(const BoundaryMesh& mesh, const DiscreteSpace& a, const DiscreteSpace& b,
                              const ElementWeight& w = nullptr, int extra_points = 0);

// Piecewise polynomial vector field stored as Legendre coefficients per
// element (2 x (degree+1)); elements without data have zero columns.
struct PiecewisePoly {
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> coeff;

  Vec2 eval(int e, double t) const;
  int degree(int e) const { return (int)coeff[e].cols() - 1; }
  bool defined(int e) const { return coeff[e].cols() > 0; }
};

PiecewisePoly to_piecewise(const BoundaryMesh& mesh, const DiscreteSpace& space, const Eigen::VectorXd& c);
// Arc-length derivative of each element polynomial.
PiecewisePoly arc_derivative(const BoundaryMesh& mesh, const PiecewisePoly& f);
// Element polynomial from a callback, projected onto degree `deg` per element.
PiecewisePoly project_piecewise(const BoundaryMesh& mesh, const std::vector<int>& elements,
                                const std::function<int(int)>& degree,
                                const std::function<Vec2(int, double)>& f, int extra_points = 4);

}  // namespace hpbem
