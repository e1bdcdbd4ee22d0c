#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "hpbem/lame.hpp"
#include "hpbem/operators.hpp"
#include "hpbem/spaces.hpp"

namespace hpbem {

// gamma|_T = gamma_bar h_T / p_T^2 on contact elements, 0 elsewhere.
struct GammaWeights {
  double gamma_bar = 0.0;
  std::vector<double> value;  // per element

  double operator()(int e) const { return value[e]; }
  double min_contact() const;
  double max_contact() const;
};

GammaWeights gamma_weights(const BoundaryMesh& mesh, double gamma_bar);

// Elementwise L2 projection onto Z (a projection_space).
Eigen::VectorXd project_PiHP(const BoundaryMesh& mesh, const DiscreteSpace& Z,
                             const std::function<Vec2(int, const Vec2&)>& f, int quad_points = 20);

// Operator approximations as maps into Z coefficients together with the
// gamma-weighted Gram matrices of the stabilization term
//   <gamma (lam + W~u + (K~+1/2)'phi), W~v + (K~+1/2)'psi>.
struct StabilizationAssembly {
  DiscreteSpace Z;
  Eigen::VectorXd M;       // Z mass (diagonal: Legendre basis)
  Eigen::MatrixXd W_hat;   // Z x X
  Eigen::MatrixXd Kp_hat;  // Z x Y, K' only
  Eigen::MatrixXd I_ZY;    // Z x Y
  Eigen::MatrixXd I_ZL;    // Z x Lambda
  // Z coefficients of W~u, (K~+1/2)'phi and lambda.
  Eigen::MatrixXd A_u, A_phi, A_lam;

  GammaWeights gamma;
  Eigen::VectorXd M_gamma;  // diagonal of the gamma-weighted Z mass
  Eigen::MatrixXd S_uu, S_uphi, S_phiphi, S_ulam, S_philam, S_lamlam;
};

// Builds the gamma-independent blocks; z_extra raises the degree of Z above p.
StabilizationAssembly assemble_stabilization(const BoundaryMesh& mesh, const DiscreteSpace& X,
                                             const DiscreteSpace& Y, const DiscreteSpace& L, const Material& m,
                                             double tol, int z_extra = 0);
// (Re)computes M_gamma and the S blocks for a new gamma_bar.
void set_gamma(StabilizationAssembly& s, const BoundaryMesh& mesh, double gamma_bar);

// Symmetric part of the stabilized (u,phi) block:
//   [[W - S_uu, -S_uphi], [-S_phiu, V - S_phiphi]]
// (the K blocks cancel).
Eigen::MatrixXd stabilized_symmetric_part(const OperatorSet& ops, const StabilizationAssembly& s);
// Smallest eigenvalue of the matrix above.
double coercivity_margin(const OperatorSet& ops, const StabilizationAssembly& s);

// Observed constants C_W, C_K with ||gamma^1/2 W~v||^2 <= gamma_bar C_W^2 <Wv,v>
// and ||gamma^1/2 (K~+1/2)'psi||^2 <= gamma_bar C_K^2 <V psi,psi>.
struct InverseConstants {
  double C_W = 0.0, C_K = 0.0;
};
InverseConstants inverse_inequality_constants(const OperatorSet& ops, const StabilizationAssembly& s);

}  // namespace hpbem
