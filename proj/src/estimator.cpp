#include "hpbem/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hpbem {

const char* term_name(Term t) {
  switch (t) {
    case Term::N: return "N";
    case Term::C: return "C";
    case Term::V: return "V";
    case Term::W: return "W";
    case Term::K: return "K";
    case Term::Complementarity: return "complementarity";
    case Term::Penetration: return "penetration";
    case Term::NegativePressure: return "negative_pressure";
    case Term::FrictionExcess: return "friction_excess";
    case Term::StickSign: return "stick_sign";
    case Term::SlipDirection: return "slip_direction";
  }
  return "?";
}

double IndicatorReport::total() const { return std::sqrt(std::max(0.0, total_squared)); }

double IndicatorReport::raw_sum(Term t) const {
  const int i = (int)t;
  if (i >= 5) throw std::invalid_argument("raw_sum: only the residual terms are stored unweighted");
  return std::accumulate(raw[i].begin(), raw[i].end(), 0.0);
}

namespace {

using Coeffs = Eigen::Matrix<double, 2, Eigen::Dynamic>;

// Per-element Legendre coefficient blocks of a vector in a legendre_space.
Coeffs block(const DiscreteSpace& E, const Eigen::VectorXd& c, int e) {
  const int n = E.shapes[e].degree + 1;
  Coeffs B = Coeffs::Zero(2, n);
  for (const auto& le : E.local[e]) B.col(le.f) += c(le.dof) * le.dir;
  return B;
}

// int_T |sum_k B_k P_k|^2 ds, starting at degree k0.
double legendre_norm2(const Coeffs& B, double h, int k0 = 0) {
  double s = 0.0;
  for (int k = std::max(k0, 0); k < B.cols(); ++k) s += B.col(k).squaredNorm() * h / (2.0 * k + 1.0);
  return s;
}

Vec2 series(const Coeffs& B, double t) {
  double P[64];
  legendre((int)B.cols() - 1, t, P);
  Vec2 r = Vec2::Zero();
  for (int k = 0; k < B.cols(); ++k) r += B.col(k) * P[k];
  return r;
}

}  // namespace

IndicatorReport compute_indicators(const Discretization& d, const ProblemData& problem, const SolverState& state,
                                   const EstimatorOptions& opt) {
  const BoundaryMesh& mesh = d.mesh;
  const int n = mesh.size();
  const double tol = d.options.tol;
  const Material& m = problem.material;
  if (state.u.size() != d.nu() || state.phi.size() != d.nphi() || state.lam.size() != d.nlam())
    throw std::invalid_argument("compute_indicators: state does not match the discretization");

  IndicatorReport rep;
  rep.gamma_bar = d.options.gamma_bar;
  for (auto& v : rep.local) v.assign(n, 0.0);
  for (auto& v : rep.raw) v.assign(n, 0.0);
  rep.element.assign(n, 0.0);

  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  const DiscreteSpace E = legendre_space(mesh, all, opt.extra_degree);
  Eigen::VectorXd Minv(E.ndofs);
  for (int e = 0; e < n; ++e)
    for (const auto& le : E.local[e]) Minv(le.dof) = (2.0 * le.f + 1.0) / mesh[e].h();

  // Legendre coefficients (degree p_T + extra) of Wu, K'phi, phi, lam and of
  // the second Calderon row V phi - (K+1/2) u.
  const Eigen::VectorXd cW = Minv.cwiseProduct(assemble_W_hat(mesh, E, d.X, m, tol) * state.u);
  const Eigen::VectorXd cK = Minv.cwiseProduct(assemble_Kp_hat(mesh, E, d.Y, m, tol) * state.phi);
  const Eigen::VectorXd cPhi = Minv.cwiseProduct(assemble_mass(mesh, E, d.Y) * state.phi);
  const Eigen::VectorXd cLam = Minv.cwiseProduct(assemble_mass(mesh, E, d.L) * state.lam);
  Eigen::MatrixXd VE = Eigen::MatrixXd::Zero(E.ndofs, d.nphi());
  Eigen::MatrixXd KE = Eigen::MatrixXd::Zero(E.ndofs, d.nu());
  assemble_terms(mesh,
                 {{{&E}, {&d.Y}, single_layer_kernel(m), &VE},
                  {{&E}, {&d.X}, laplace_double_layer_kernel(), &KE},
                  {{&E}, {&d.X, true, true}, double_layer_companion_kernel(m), &KE}},
                 tol);
  const Eigen::VectorXd cV =
      Minv.cwiseProduct(VE * state.phi - KE * state.u - 0.5 * (assemble_mass(mesh, E, d.X) * state.u));

  PiecewisePoly rv;
  rv.coeff.assign(n, Coeffs(2, 0));
  for (int e = 0; e < n; ++e) rv.coeff[e] = block(E, cV, e);
  const PiecewisePoly drv = arc_derivative(mesh, rv);

  const double wNV = opt.benchmark_weighting ? 0.01 : 1.0;
  const double g2 = rep.gamma_bar * rep.gamma_bar;
  auto put = [&](Term t, int e, double v) { rep.local[(int)t][e] = v; };

  for (int e = 0; e < n; ++e) {
    const Element& el = mesh[e];
    const double h = el.h(), p = el.degree;
    const Coeffs bW = block(E, cW, e), bK = block(E, cK, e), bPhi = block(E, cPhi, e);
    const Coeffs bTrac = bW + bK + 0.5 * bPhi;  // Wu + (K+1/2)'phi

    const double etaV = h * legendre_norm2(drv.coeff[e], h);
    rep.raw[(int)Term::V][e] = etaV;
    put(Term::V, e, wNV * etaV);

    if (el.label == Label::Neumann) {
      const int nq = (int)bTrac.cols() + 10;
      const auto& rule = cached_gauss_legendre(nq);
      double s = 0.0;
      for (int q = 0; q < nq; ++q) {
        const double t = rule.nodes[q];
        const Vec2 r = problem.traction_at(el.part, el.point(t)) - series(bTrac, t);
        s += rule.weights[q] * 0.5 * h * r.squaredNorm();
      }
      const double etaN = h / p * s;
      rep.raw[(int)Term::N][e] = etaN;
      put(Term::N, e, wNV * etaN);
    }

    if (el.label != Label::Contact) continue;
    const Coeffs bLam = block(E, cLam, e);
    const double etaC = h / p * legendre_norm2(bLam + bTrac, h);
    const int PZ = d.stab.Z.shapes[e].degree;
    const double etaW = h / (p * p) * legendre_norm2(bW, h, PZ + 1);
    const double etaK = h / (p * p) * legendre_norm2(bK, h, PZ + 1);
    rep.raw[(int)Term::C][e] = etaC;
    rep.raw[(int)Term::W][e] = etaW;
    rep.raw[(int)Term::K][e] = etaK;
    put(Term::C, e, (1.0 + g2) * etaC);
    put(Term::W, e, g2 * etaW);
    put(Term::K, e, g2 * etaK);

    // Contact and friction conditions by a composite Gauss rule.
    const Vec2 nn = el.normal(), tt = el.tangent();
    const int S = std::max(1, opt.sub_intervals);
    const int nq = el.degree + 8;
    const auto& rule = cached_gauss_legendre(nq);
    const double dg = 1e-7;
    double comp = 0, pen_l2 = 0, pen_h1 = 0, lneg = 0, texc = 0, stick = 0, slip = 0;
    for (int j = 0; j < S; ++j) {
      const double a = -1.0 + 2.0 * j / S, b = -1.0 + 2.0 * (j + 1) / S;
      for (int q = 0; q < nq; ++q) {
        const double t = 0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q];
        const double w = rule.weights[q] * 0.5 * (b - a) * 0.5 * h;
        const Vec2 x = el.point(t);
        const Vec2 u = d.X.eval(state.u, e, t);
        const Vec2 lam = d.L.eval(state.lam, e, t);
        const double un = u.dot(nn), ut = u.dot(tt);
        const double ln = lam.dot(nn), lt = lam.dot(tt);
        const double gap = problem.gap(x);
        const double F = problem.friction(x);
        const double bound = problem.law == FrictionLaw::Coulomb ? F * ln : F;
        const double slack = gap - un;
        comp += w * std::max(0.0, ln) * std::max(0.0, slack);
        if (slack < 0) {
          const double dgap = (problem.gap(x + dg * tt) - problem.gap(x - dg * tt)) / (2.0 * dg);
          const double dun = d.X.eval_dt(state.u, e, t).dot(nn) * 2.0 / h;
          pen_l2 += w * slack * slack;
          pen_h1 += w * (dgap - dun) * (dgap - dun);
        }
        lneg += w * std::pow(std::min(0.0, ln), 2);
        const double exc = std::abs(lt) - bound;
        texc += w * std::pow(std::max(0.0, exc), 2);
        stick -= w * std::min(0.0, exc) * std::abs(ut);
        slip += w * (std::abs(lt) * std::abs(ut) - lt * ut);
      }
    }
    put(Term::Complementarity, e, comp);
    put(Term::Penetration, e, std::sqrt(pen_l2 * (pen_l2 + pen_h1)));
    put(Term::NegativePressure, e, h / p * lneg);
    put(Term::FrictionExcess, e, h / p * texc);
    put(Term::StickSign, e, std::max(0.0, stick));
    put(Term::SlipDirection, e, std::max(0.0, slip));
  }

  for (int i = 0; i < kNumTerms; ++i) {
    rep.sum[i] = std::accumulate(rep.local[i].begin(), rep.local[i].end(), 0.0);
    for (int e = 0; e < n; ++e) rep.element[e] += rep.local[i][e];
  }
  rep.total_squared = std::accumulate(rep.sum.begin(), rep.sum.end(), 0.0);
  return rep;
}

std::vector<int> dorfler_mark(const std::vector<double>& eta_squared, double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("dorfler_mark: theta must lie in (0,1)");
  const int n = (int)eta_squared.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return eta_squared[a] > eta_squared[b]; });
  double total = 0.0;
  for (int i : order) total += eta_squared[i];
  std::vector<int> marked;
  if (!(total > 0.0)) return marked;
  double acc = 0.0;
  for (int i : order) {
    if (acc >= theta * total || !(eta_squared[i] > 0.0)) break;
    acc += eta_squared[i];
    marked.push_back(i);
  }
  std::sort(marked.begin(), marked.end());
  return marked;
}

double legendre_decay(const std::vector<double>& a) {
  const int n = (int)a.size();
  double amax = 0.0;
  for (double v : a) amax = std::max(amax, std::abs(v));
  if (n == 0 || amax == 0.0) return 0.0;
  if (n == 1) return 1.0;
  // Monotone envelope from the tail removes the zeros of parity-symmetric
  // data; values below round-off are floored.
  const double floor = 1e-15 * amax;
  std::vector<double> y(n);
  double run = 0.0;
  for (int i = n - 1; i >= 0; --i) {
    run = std::max(run, std::abs(a[i]));
    y[i] = std::log(std::max(run, floor));
  }
  const double xm = 0.5 * (n - 1);
  double ym = 0.0;
  for (double v : y) ym += v;
  ym /= n;
  double sxy = 0.0, sxx = 0.0;
  for (int i = 0; i < n; ++i) {
    sxy += (i - xm) * (y[i] - ym);
    sxx += (i - xm) * (i - xm);
  }
  return std::exp(sxy / sxx);
}

double element_decay(const BoundaryMesh& mesh, const DiscreteSpace& X, const Eigen::VectorXd& u, int e) {
  const int p = mesh[e].degree;
  const QuadratureRule rule = gauss_lobatto(p + 1);
  std::vector<double> vx(rule.size()), vy(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Vec2 v = X.eval(u, e, rule.nodes[i]);
    vx[i] = v.x();
    vy[i] = v.y();
  }
  const Eigen::VectorXd ax = legendre_coefficients(rule.nodes, vx, p);
  const Eigen::VectorXd ay = legendre_coefficients(rule.nodes, vy, p);
  const Eigen::VectorXd& a = ax.norm() >= ay.norm() ? ax : ay;
  return legendre_decay(std::vector<double>(a.data(), a.data() + a.size()));
}

HpMarks hp_decide(const BoundaryMesh& mesh, const DiscreteSpace& X, const Eigen::VectorXd& u,
                  const std::vector<int>& marked, double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("hp_decide: delta must lie in (0,1)");
  HpMarks out;
  for (int e : marked) {
    if (element_decay(mesh, X, u, e) <= delta) out.p.insert(e);
    else out.h.insert(e);
  }
  return out;
}

}  // namespace hpbem
