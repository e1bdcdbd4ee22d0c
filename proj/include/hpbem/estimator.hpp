#pragma once

#include <array>
#include <set>
#include <string>
#include <vector>

#include "hpbem/solver.hpp"

namespace hpbem {

// Contributions of the residual error estimate. The first five are the
// elementwise residual terms; the rest come from the contact and friction
// conditions on the contact part.
enum class Term {
  N,                 // Neumann residual
  C,                 // contact residual  lam + Wu + (K+1/2)'phi
  V,                 // gradient of the second Calderon row
  W,                 // projection error of the stabilized hypersingular term
  K,                 // projection error of the stabilized adjoint double layer term
  Complementarity,   // <(lam_n)^+, (g-u_n)^+>
  Penetration,       // |(g-u_n)^-|^2 in H^1/2
  NegativePressure,  // |(lam_n)^-|^2 in H~^-1/2
  FrictionExcess,    // |(|lam_t|-b)^+|^2 in H~^-1/2
  StickSign,         // -<(|lam_t|-b)^-, |u_t|>
  SlipDirection,     // <|lam_t|,|u_t|> - <lam_t,u_t>
};
inline constexpr int kNumTerms = 11;
const char* term_name(Term t);  // short column suffix, e.g. "N", "complementarity"

struct EstimatorOptions {
  bool benchmark_weighting = true;  // N and V terms enter the total divided by 100
  int extra_degree = 4;         // residuals are resolved in Legendre degree p_T + extra_degree
  int sub_intervals = 8;        // composite rule for the nonsmooth contact terms
};

struct IndicatorReport {
  // Squared contributions per element, already weighted as they enter the
  // total (N, V: 1/100 with paper weighting; C: 1+gamma_bar^2; W, K: gamma_bar^2).
  std::array<std::vector<double>, kNumTerms> local;
  // Unweighted eta^2_{X,T} for the five residual terms.
  std::array<std::vector<double>, 5> raw;
  std::vector<double> element;  // eta_T^2, sum over the terms
  std::array<double, kNumTerms> sum{};
  double total_squared = 0.0;
  double gamma_bar = 0.0;

  double total() const;
  double term(Term t) const { return sum[(int)t]; }
  double raw_sum(Term t) const;  // t in {N,C,V,W,K}
};

IndicatorReport compute_indicators(const Discretization& d, const ProblemData& problem, const SolverState& state,
                                   const EstimatorOptions& opt = {});

// Smallest set whose squared indicators reach theta times the total: greedy
// by descending value, ties by ascending element id. Returned ascending.
std::vector<int> dorfler_mark(const std::vector<double>& eta_squared, double theta);

// Decay ratio of the Legendre coefficients of u on element e: samples at
// p_T+1 Gauss-Lobatto points, coefficients of the component with the larger
// coefficient norm, monotone envelope from the tail, least-squares slope of
// log|a_i|; returns exp(slope). Zero data gives 0.
double legendre_decay(const std::vector<double>& coefficients);
double element_decay(const BoundaryMesh& mesh, const DiscreteSpace& X, const Eigen::VectorXd& u, int e);

struct HpMarks {
  std::set<int> h, p;
};
// decay <= delta selects p-refinement, otherwise h-refinement.
HpMarks hp_decide(const BoundaryMesh& mesh, const DiscreteSpace& X, const Eigen::VectorXd& u,
                  const std::vector<int>& marked, double delta);

}  // namespace hpbem
