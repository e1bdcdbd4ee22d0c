#include "hpbem/stabilization.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hpbem {

double GammaWeights::min_contact() const {
  double r = std::numeric_limits<double>::infinity();
  for (double v : value)
    if (v > 0) r = std::min(r, v);
  return std::isfinite(r) ? r : 0.0;
}

double GammaWeights::max_contact() const {
  double r = 0.0;
  for (double v : value) r = std::max(r, v);
  return r;
}

GammaWeights gamma_weights(const BoundaryMesh& mesh, double gamma_bar) {
  if (gamma_bar < 0) throw std::invalid_argument("gamma_bar must be non-negative");
  GammaWeights g;
  g.gamma_bar = gamma_bar;
  g.value.assign(mesh.size(), 0.0);
  for (int e = 0; e < mesh.size(); ++e)
    if (mesh[e].label == Label::Contact) {
      double p = mesh[e].degree;
      g.value[e] = gamma_bar * mesh[e].h() / (p * p);
    }
  return g;
}

Eigen::VectorXd project_PiHP(const BoundaryMesh& mesh, const DiscreteSpace& Z,
                             const std::function<Vec2(int, const Vec2&)>& f, int quad_points) {
  return project_legendre(mesh, Z, f, quad_points);
}

StabilizationAssembly assemble_stabilization(const BoundaryMesh& mesh, const DiscreteSpace& X,
                                             const DiscreteSpace& Y, const DiscreteSpace& L, const Material& m,
                                             double tol, int z_extra) {
  StabilizationAssembly s;
  s.Z = projection_space(mesh, z_extra);
  Eigen::MatrixXd Mfull = assemble_mass(mesh, s.Z, s.Z);
  s.M = Mfull.diagonal();
  if ((Mfull - Eigen::MatrixXd(s.M.asDiagonal())).cwiseAbs().maxCoeff() > 1e-12 * s.M.cwiseAbs().maxCoeff())
    throw std::logic_error("projection space mass is not diagonal");
  s.W_hat = assemble_W_hat(mesh, s.Z, X, m, tol);
  s.Kp_hat = assemble_Kp_hat(mesh, s.Z, Y, m, tol);
  s.I_ZY = assemble_mass(mesh, s.Z, Y);
  s.I_ZL = assemble_mass(mesh, s.Z, L);
  const Eigen::VectorXd Minv = s.M.cwiseInverse();
  s.A_u = Minv.asDiagonal() * s.W_hat;
  s.A_phi = Minv.asDiagonal() * (s.Kp_hat + 0.5 * s.I_ZY);
  s.A_lam = Minv.asDiagonal() * s.I_ZL;
  return s;
}

void set_gamma(StabilizationAssembly& s, const BoundaryMesh& mesh, double gamma_bar) {
  s.gamma = gamma_weights(mesh, gamma_bar);
  s.M_gamma.resize(s.Z.ndofs);
  for (int e : s.Z.elements)
    for (const auto& le : s.Z.local[e]) s.M_gamma(le.dof) = s.gamma(e) * s.M(le.dof);
  const auto G = s.M_gamma.asDiagonal();
  s.S_uu = s.A_u.transpose() * G * s.A_u;
  s.S_uphi = s.A_u.transpose() * G * s.A_phi;
  s.S_phiphi = s.A_phi.transpose() * G * s.A_phi;
  s.S_ulam = s.A_u.transpose() * G * s.A_lam;
  s.S_philam = s.A_phi.transpose() * G * s.A_lam;
  s.S_lamlam = s.A_lam.transpose() * G * s.A_lam;
}

Eigen::MatrixXd stabilized_symmetric_part(const OperatorSet& ops, const StabilizationAssembly& s) {
  const int nu = (int)ops.W.rows(), np = (int)ops.V.rows();
  Eigen::MatrixXd A(nu + np, nu + np);
  A.topLeftCorner(nu, nu) = ops.W - s.S_uu;
  A.topRightCorner(nu, np) = -s.S_uphi;
  A.bottomLeftCorner(np, nu) = -s.S_uphi.transpose();
  A.bottomRightCorner(np, np) = ops.V - s.S_phiphi;
  return 0.5 * (A + A.transpose());
}

double coercivity_margin(const OperatorSet& ops, const StabilizationAssembly& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(stabilized_symmetric_part(ops, s), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

InverseConstants inverse_inequality_constants(const OperatorSet& ops, const StabilizationAssembly& s) {
  InverseConstants c;
  if (s.gamma.gamma_bar <= 0) return c;
  auto top = [](const Eigen::MatrixXd& A, const Eigen::MatrixXd& B) {
    if (A.rows() == 0) return 0.0;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (A + A.transpose()),
                                                                 0.5 * (B + B.transpose()), Eigen::EigenvaluesOnly);
    return std::max(0.0, es.eigenvalues().maxCoeff());
  };
  c.C_W = std::sqrt(top(s.S_uu, ops.W) / s.gamma.gamma_bar);
  c.C_K = std::sqrt(top(s.S_phiphi, ops.V) / s.gamma.gamma_bar);
  return c;
}

}  // namespace hpbem
