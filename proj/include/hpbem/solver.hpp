#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hpbem/lame.hpp"
#include "hpbem/operators.hpp"
#include "hpbem/spaces.hpp"
#include "hpbem/stabilization.hpp"

namespace hpbem {

using ScalarField = std::function<double(const Vec2&)>;
using VectorField = std::function<Vec2(const Vec2&)>;

enum class FrictionLaw { Tresca, Coulomb };

struct ProblemData {
  Material material;
  ScalarField gap;       // on the contact part, >= 0
  ScalarField friction;  // Tresca threshold or Coulomb coefficient
  FrictionLaw law = FrictionLaw::Tresca;
  std::vector<VectorField> traction;  // per geometry part id; empty entries mean zero
  std::vector<Pin> pins;

  Vec2 traction_at(int part, const Vec2& x) const;
  void validate(const BoundaryMesh& mesh) const;  // throws std::invalid_argument
};

// Dimension of the rigid motions that vanish on the Dirichlet part and at the
// pinned components (the kernel of W on the primal space).
int rigid_kernel_dimension(const BoundaryMesh& mesh, const std::vector<Pin>& pins);

struct DiscretizationOptions {
  double gamma_bar = 1e-3;
  double tol = 1e-10;  // quadrature
  int z_extra = 0;     // degree of Z above p
};

// Everything assembled on one mesh.
struct Discretization {
  BoundaryMesh mesh;
  DiscreteSpace X, Y, L;
  std::vector<ConstraintNode> nodes;
  OperatorSet ops;
  Eigen::MatrixXd C;  // <(K+1/2)u, psi>, Y x X
  Eigen::MatrixXd D;  // <mu_j, v_i>, X x Lambda
  Eigen::VectorXd load;
  StabilizationAssembly stab;
  DiscretizationOptions options;

  int nu() const { return X.ndofs; }
  int nphi() const { return Y.ndofs; }
  int nlam() const { return L.ndofs; }
};

Discretization discretize(const BoundaryMesh& mesh, const ProblemData& problem, const DiscretizationOptions& opt);
void set_gamma(Discretization& d, double gamma_bar);

Eigen::VectorXd neumann_load(const BoundaryMesh& mesh, const DiscreteSpace& X, const ProblemData& problem);

// Linear equations  A x + B lam = rhs  for x = (u, phi), and the argument of
// the multiplier projection  s = E x - diag(gamma) lam + e0  (nodal normal
// and tangential components, one entry per multiplier dof).
struct BilinearSystem {
  int nu = 0, nphi = 0, nlam = 0;
  Eigen::MatrixXd A, B;
  Eigen::VectorXd rhs;
  Eigen::MatrixXd E;
  Eigen::VectorXd gamma_node, e0;
  std::vector<ConstraintNode> nodes;
  Eigen::VectorXd friction_node;  // per node
  FrictionLaw law = FrictionLaw::Tresca;
};

BilinearSystem assemble_system(const Discretization& d, const ProblemData& problem);

// Componentwise projection onto {lam_n >= 0, |lam_t| <= b}.
Vec2 project_pair(double lam_n, double lam_t, double bound);
Eigen::VectorXd project_multiplier(const Eigen::VectorXd& lam, const std::vector<ConstraintNode>& nodes,
                                   const Eigen::VectorXd& bound);

struct NewtonOptions {
  double r = 1.0;
  double tol = 1e-12;  // on sqrt(merit)
  int max_iter = 50;
  int max_outer = 100;  // Coulomb two-loop fallback
  bool allow_two_loop = true;
};

struct SolverState {
  Eigen::VectorXd u, phi, lam;
  std::vector<bool> contact_active, slip_active;  // per node
  int iterations = 0;
  int outer_iterations = 0;
  double merit = 0.0;  // squared residual norm
  bool converged = false;
  bool two_loop = false;
};

// Nonsmooth residual (linear equations; lam - P(lam + r s)) and its squared norm.
double merit(const BilinearSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
             const Eigen::VectorXd& lam, double r);

SolverState solve_tresca(const BilinearSystem& sys, const NewtonOptions& opt = {});
SolverState solve_coulomb(const BilinearSystem& sys, const NewtonOptions& opt = {});
SolverState solve(const BilinearSystem& sys, const NewtonOptions& opt = {});

// Projected fixed-point iteration lam <- P(lam + r s(lam)); r <= 0 selects
// 1 / ||dS/dlam||.
SolverState solve_fixed_point(const BilinearSystem& sys, double r = 0.0, double tol = 1e-15,
                              int max_iter = 2000000);
// Coulomb by an outer fixed point on the threshold F lam_n with Tresca inner solves.
SolverState solve_coulomb_two_loop(const BilinearSystem& sys, const NewtonOptions& opt = {});

}  // namespace hpbem
