#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hpbem/integration.hpp"
#include "hpbem/lame.hpp"
#include "hpbem/spaces.hpp"

namespace hpbem {

// Basis functions of a space, optionally replaced by their arc-length
// derivatives and/or rotated by R.
struct FunctionView {
  const DiscreteSpace* space = nullptr;
  bool derivative = false;
  bool rotate = false;
};

// out(i,j) += scale * int int test_i(x)^T k(x,y) trial_j(y) ds_y ds_x
struct OperatorTerm {
  FunctionView test, trial;
  KernelCoeffs kernel;
  Eigen::MatrixXd* out = nullptr;
  double scale = 1.0;
};

// Assembles all terms in one sweep over element pairs (rules shared).
void assemble_terms(const BoundaryMesh& mesh, const std::vector<OperatorTerm>& terms, double tol);

// 2 x ndofs matrix G with G c = int k(z,y) f_c(y) ds_y for the function f_c
// with coefficients c in the view's space.
Eigen::MatrixXd point_matrix(const BoundaryMesh& mesh, const Vec2& z, const FunctionView& view,
                             const KernelCoeffs& kernel, double tol);

struct OperatorSet {
  Eigen::MatrixXd V;  // Y x Y
  Eigen::MatrixXd K;  // Y x X, <K u, psi>; the adjoint pairing is K^T
  Eigen::MatrixXd W;  // X x X
  double tol = 1e-10;
};

Eigen::MatrixXd assemble_V(const BoundaryMesh& mesh, const DiscreteSpace& Y, const Material& m, double tol);
Eigen::MatrixXd assemble_K(const BoundaryMesh& mesh, const DiscreteSpace& Y, const DiscreteSpace& X,
                           const Material& m, double tol);
Eigen::MatrixXd assemble_W(const BoundaryMesh& mesh, const DiscreteSpace& X, const Material& m, double tol);
OperatorSet assemble_operators(const BoundaryMesh& mesh, const DiscreteSpace& X, const DiscreteSpace& Y,
                               const Material& m, double tol);

// <W phi_j, xi_i> for xi in the discontinuous projection space Z (rows) and
// phi in X (columns).
Eigen::MatrixXd assemble_W_hat(const BoundaryMesh& mesh, const DiscreteSpace& Z, const DiscreteSpace& X,
                               const Material& m, double tol);
// <K' psi_j, xi_i> for xi in Z (rows), psi in Y (columns).
Eigen::MatrixXd assemble_Kp_hat(const BoundaryMesh& mesh, const DiscreteSpace& Z, const DiscreteSpace& Y,
                                const Material& m, double tol);

// Mixed identity block <u, psi> (Y x X).
Eigen::MatrixXd identity_pairing(const BoundaryMesh& mesh, const DiscreteSpace& Y, const DiscreteSpace& X);

}  // namespace hpbem
