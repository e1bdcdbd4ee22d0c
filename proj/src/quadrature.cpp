#include "hpbem/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace hpbem {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
void legendre_pair(int n, double x, double& p, double& dp) {
  double p0 = 1.0, p1 = x;
  if (n == 0) {
    p = 1.0;
    dp = 0.0;
    return;
  }
  for (int k = 1; k < n; ++k) {
    double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  if (std::abs(1.0 - x * x) < 1e-300)
    dp = 0.5 * n * (n + 1.0) * (x > 0 ? 1.0 : ((n % 2) ? 1.0 : -1.0));
  else
    dp = n * (p0 - x * p1) / (1.0 - x * x);
}

}  // namespace

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  QuadratureRule r;
  r.kind = RuleKind::GaussLegendre;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double p = 0, dp = 0;
    for (int it = 0; it < 100; ++it) {
      legendre_pair(n, x, p, dp);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    legendre_pair(n, x, p, dp);
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2) r.nodes[n / 2] = 0.0;
  return r;
}

QuadratureRule gauss_lobatto(int n) {
  if (n < 2) throw std::invalid_argument("gauss_lobatto: n must be >= 2");
  QuadratureRule r;
  r.kind = RuleKind::GaussLobatto;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  const int m = n - 1;
  r.nodes[0] = -1.0;
  r.nodes[m] = 1.0;
  r.weights[0] = r.weights[m] = 2.0 / (n * (n - 1.0));
  // Interior nodes are the roots of P_m'; Newton on P_m' with P_m'' from the
  // Legendre ODE.
  for (int i = 1; i <= (m - 1 + 1) / 2; ++i) {
    double x = -std::cos(std::numbers::pi * i / m);
    for (int it = 0; it < 100; ++it) {
      double p, dp;
      legendre_pair(m, x, p, dp);
      double d2p = (2.0 * x * dp - m * (m + 1.0) * p) / (1.0 - x * x);
      double dx = dp / d2p;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p, dp;
    legendre_pair(m, x, p, dp);
    double w = 2.0 / (n * (n - 1.0) * p * p);
    r.nodes[i] = x;
    r.nodes[m - i] = -x;
    r.weights[i] = r.weights[m - i] = w;
  }
  if (n % 2 == 1) r.nodes[m / 2] = 0.0;
  return r;
}

QuadratureRule gauss_log(int n) {
  if (n < 1) throw std::invalid_argument("gauss_log: n must be >= 1");
  // Modified Chebyshev algorithm with monic shifted Legendre polynomials as
  // reference system, followed by Golub-Welsch.
  const int N2 = 2 * n;
  std::vector<long double> a(N2, 0.5L), b(N2, 0.0L), mom(N2);
  for (int k = 1; k < N2; ++k) b[k] = (long double)k * k / (4.0L * (4.0L * k * k - 1.0L));
  mom[0] = 1.0L;
  long double ratio = 1.0L;  // (k!)^2 / (2k)!
  for (int k = 1; k < N2; ++k) {
    ratio *= (long double)k * k / ((2.0L * k - 1.0L) * (2.0L * k));
    long double sgn = (k % 2) ? -1.0L : 1.0L;
    mom[k] = sgn / ((long double)k * (k + 1.0L)) * ratio;
  }
  std::vector<long double> alpha(n), beta(n);
  std::vector<std::vector<long double>> sig(n + 1, std::vector<long double>(N2 + 1, 0.0L));
  // sig[k+1][l] stores sigma_{k,l}; sig[0] is sigma_{-1} = 0.
  for (int l = 0; l < N2; ++l) sig[1][l] = mom[l];
  alpha[0] = a[0] + mom[1] / mom[0];
  beta[0] = mom[0];
  for (int k = 1; k < n; ++k) {
    for (int l = k; l < N2 - k; ++l) {
      sig[k + 1][l] = sig[k][l + 1] - (alpha[k - 1] - a[l]) * sig[k][l] - beta[k - 1] * sig[k - 1][l] +
                      b[l] * sig[k][l - 1];
    }
    alpha[k] = a[k] + sig[k + 1][k + 1] / sig[k + 1][k] - sig[k][k] / sig[k][k - 1];
    beta[k] = sig[k + 1][k] / sig[k][k - 1];
  }
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) J(k, k) = (double)alpha[k];
  for (int k = 1; k < n; ++k) J(k, k - 1) = J(k - 1, k) = (double)std::sqrt(beta[k]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule r;
  r.kind = RuleKind::GaussLog;
  r.nodes.resize(n);
  r.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    r.nodes[k] = es.eigenvalues()(k);
    double v0 = es.eigenvectors()(0, k);
    r.weights[k] = (double)beta[0] * v0 * v0;
  }
  return r;
}

const QuadratureRule& cached_gauss_legendre(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_legendre(n)).first;
  return it->second;
}

const QuadratureRule& cached_gauss_log(int n) {
  static std::map<int, QuadratureRule> cache;
  static std::mutex m;
  std::lock_guard<std::mutex> lock(m);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, gauss_log(n)).first;
  return it->second;
}

void legendre(int n, double t, double* p, double* dp) {
  p[0] = 1.0;
  if (dp) dp[0] = 0.0;
  if (n == 0) return;
  p[1] = t;
  if (dp) dp[1] = 1.0;
  for (int k = 1; k < n; ++k) {
    p[k + 1] = ((2.0 * k + 1.0) * t * p[k] - k * p[k - 1]) / (k + 1.0);
    if (dp) dp[k + 1] = dp[k - 1] + (2.0 * k + 1.0) * p[k];
  }
}

void legendre_q(int n, double s, double* q) {
  q[0] = 0.5 * std::log((1.0 + s) / (1.0 - s));
  if (n == 0) return;
  q[1] = s * q[0] - 1.0;
  for (int k = 1; k < n; ++k) q[k + 1] = ((2.0 * k + 1.0) * s * q[k] - k * q[k - 1]) / (k + 1.0);
}

void primal_shapes(int p, double t, double* v, double* dv) {
  v[0] = 0.5 * (1.0 - t);
  v[1] = 0.5 * (1.0 + t);
  if (dv) {
    dv[0] = -0.5;
    dv[1] = 0.5;
  }
  if (p < 2) return;
  double P[64], dP[64];
  legendre(p, t, P, dP);
  for (int k = 2; k <= p; ++k) {
    double c = 1.0 / std::sqrt(2.0 * (2.0 * k - 1.0));
    v[k] = c * (P[k] - P[k - 2]);
    if (dv) dv[k] = c * (2.0 * k - 1.0) * P[k - 1];
  }
}

void lagrange(const std::vector<double>& nodes, double t, double* v, double* dv) {
  const int n = (int)nodes.size();
  for (int i = 0; i < n; ++i) {
    double val = 1.0, der = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      double inv = 1.0 / (nodes[i] - nodes[j]);
      der = der * (t - nodes[j]) * inv + val * inv;
      val *= (t - nodes[j]) * inv;
    }
    v[i] = val;
    if (dv) dv[i] = der;
  }
}

Eigen::VectorXd legendre_coefficients(const std::vector<double>& nodes, const std::vector<double>& values,
                                      int p) {
  if (p < 0 || (int)nodes.size() < p + 1 || nodes.size() != values.size())
    throw std::invalid_argument("legendre_coefficients: need at least p+1 samples");
  const int m = (int)nodes.size();
  Eigen::MatrixXd A(m, p + 1);
  Eigen::VectorXd b(m);
  double P[64];
  for (int i = 0; i < m; ++i) {
    legendre(p, nodes[i], P);
    for (int k = 0; k <= p; ++k) A(i, k) = P[k];
    b(i) = values[i];
  }
  return A.colPivHouseholderQr().solve(b);
}

double legendre_series(const double* a, int n, double t) {
  // Clenshaw recurrence for sum_{k<n} a_k P_k(t).
  double b1 = 0.0, b2 = 0.0;
  for (int k = n - 1; k >= 0; --k) {
    double alpha = (2.0 * k + 1.0) / (k + 1.0) * t;
    double beta = -(k + 1.0) / (k + 2.0);
    double b0 = a[k] + alpha * b1 + beta * b2;
    b2 = b1;
    b1 = b0;
  }
  return b1;
}

}  // namespace hpbem
