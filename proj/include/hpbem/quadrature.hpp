#pragma once

#include <Eigen/Dense>
#include <vector>

namespace hpbem {

enum class RuleKind { GaussLegendre, GaussLobatto, GaussLog };

// Nodes and weights. Legendre/Lobatto rules live on [-1,1]; the log rule
// lives on (0,1) with weight -log(x).
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
  RuleKind kind = RuleKind::GaussLegendre;
  std::size_t size() const { return nodes.size(); }
};

QuadratureRule gauss_legendre(int n);
QuadratureRule gauss_lobatto(int n);
QuadratureRule gauss_log(int n);

// Cached rules; the reference stays valid for the process lifetime.
const QuadratureRule& cached_gauss_legendre(int n);
const QuadratureRule& cached_gauss_log(int n);

// P_0..P_n at t, optionally with derivatives.
void legendre(int n, double t, double* p, double* dp = nullptr);

// Legendre functions of the second kind Q_0..Q_n on (-1,1). They give the
// principal value pv int_{-1}^{1} P_k(t)/(s-t) dt = 2 Q_k(s).
void legendre_q(int n, double s, double* q);

// Integrated Legendre shape functions on [-1,1]: index 0,1 are the affine
// vertex functions (1-t)/2, (1+t)/2; index k>=2 is
// (P_k - P_{k-2}) / sqrt(2(2k-1)), which vanishes at both ends.
void primal_shapes(int p, double t, double* v, double* dv);

// Lagrange polynomials through the given nodes.
void lagrange(const std::vector<double>& nodes, double t, double* v, double* dv = nullptr);

// Legendre expansion a_0..a_p fitted to samples (least squares when there are
// more samples than coefficients; exact for polynomial data of degree <= p).
Eigen::VectorXd legendre_coefficients(const std::vector<double>& nodes,
                                      const std::vector<double>& values, int p);

// Evaluate a Legendre series at t.
double legendre_series(const double* a, int n, double t);

}  // namespace hpbem
