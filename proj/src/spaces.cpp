#include "hpbem/spaces.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

namespace hpbem {

void ShapeSet::eval(double t, double* v, double* dv) const {
  switch (kind) {
    case ShapeKind::None: return;
    case ShapeKind::Primal: primal_shapes(degree, t, v, dv); return;
    case ShapeKind::Legendre: legendre(degree, t, v, dv); return;
    case ShapeKind::LagrangeGauss: lagrange(cached_gauss_legendre(degree + 1).nodes, t, v, dv); return;
  }
}

Vec2 DiscreteSpace::eval(const Eigen::VectorXd& coeff, int e, double t) const {
  double v[64];
  shapes[e].eval(t, v);
  Vec2 r = Vec2::Zero();
  for (auto& le : local[e])
    if (le.dof >= 0) r += coeff(le.dof) * v[le.f] * le.dir;
  return r;
}

Vec2 DiscreteSpace::eval_dt(const Eigen::VectorXd& coeff, int e, double t) const {
  double v[64], dv[64];
  shapes[e].eval(t, v, dv);
  Vec2 r = Vec2::Zero();
  for (auto& le : local[e])
    if (le.dof >= 0) r += coeff(le.dof) * dv[le.f] * le.dir;
  return r;
}

namespace {

const Vec2 kE[2] = {Vec2(1, 0), Vec2(0, 1)};

std::vector<std::array<bool, 2>> fixed_vertices(const BoundaryMesh& mesh, const std::vector<Pin>& pins) {
  const int n = mesh.size();
  // vertex i = start of element i
  std::vector<std::array<bool, 2>> fixed(n, {false, false});
  for (int i = 0; i < n; ++i)
    if (mesh[i].label == Label::Dirichlet) {
      fixed[i] = {true, true};
      fixed[mesh.next(i)] = {true, true};
    }
  for (auto& p : pins) {
    int v = mesh.vertex_at(p.point, 1e-10);
    if (v < 0) throw std::invalid_argument("pin point is not a mesh vertex");
    for (int c = 0; c < 2; ++c) fixed[v][c] = fixed[v][c] || p.fix[c];
  }
  return fixed;
}

}  // namespace

int count_free_vertices(const BoundaryMesh& mesh, const std::vector<Pin>& pins) {
  auto fixed = fixed_vertices(mesh, pins);
  int n = 0;
  for (auto& f : fixed) n += !f[0] && !f[1];
  return n;
}

DiscreteSpace primal_space(const BoundaryMesh& mesh, const std::vector<Pin>& pins) {
  const int n = mesh.size();
  auto fixed = fixed_vertices(mesh, pins);
  DiscreteSpace s;
  s.shapes.resize(n);
  s.local.resize(n);
  std::vector<std::array<int, 2>> vdof(n, {-1, -1});
  int next = 0;
  for (int v = 0; v < n; ++v)
    for (int c = 0; c < 2; ++c)
      if (!fixed[v][c]) vdof[v][c] = next++;
  for (int e = 0; e < n; ++e) {
    const Element& el = mesh[e];
    s.shapes[e] = {ShapeKind::Primal, el.degree};
    s.elements.push_back(e);
    auto& loc = s.local[e];
    for (int c = 0; c < 2; ++c) {
      loc.push_back({0, kE[c], vdof[e][c]});
      loc.push_back({1, kE[c], vdof[mesh.next(e)][c]});
    }
    if (el.label == Label::Dirichlet) continue;
    for (int k = 2; k <= el.degree; ++k)
      for (int c = 0; c < 2; ++c) loc.push_back({k, kE[c], next++});
  }
  // Drop removed entries so that every listed entry is a real dof.
  for (auto& loc : s.local)
    loc.erase(std::remove_if(loc.begin(), loc.end(), [](const LocalEntry& le) { return le.dof < 0; }), loc.end());
  s.ndofs = next;
  return s;
}

DiscreteSpace dual_space(const BoundaryMesh& mesh) {
  const int n = mesh.size();
  DiscreteSpace s;
  s.shapes.resize(n);
  s.local.resize(n);
  int next = 0;
  for (int e = 0; e < n; ++e) {
    int p = mesh[e].degree;
    s.shapes[e] = {ShapeKind::Legendre, p - 1};
    s.elements.push_back(e);
    for (int k = 0; k < p; ++k)
      for (int c = 0; c < 2; ++c) s.local[e].push_back({k, kE[c], next++});
  }
  s.ndofs = next;
  return s;
}

DiscreteSpace legendre_space(const BoundaryMesh& mesh, const std::vector<int>& elements, int extra_degree) {
  const int n = mesh.size();
  DiscreteSpace s;
  s.shapes.resize(n);
  s.local.resize(n);
  int next = 0;
  for (int e : elements) {
    int P = mesh[e].degree + extra_degree;
    if (P < 0) throw std::invalid_argument("legendre_space: negative degree");
    s.shapes[e] = {ShapeKind::Legendre, P};
    s.elements.push_back(e);
    for (int k = 0; k <= P; ++k)
      for (int c = 0; c < 2; ++c) s.local[e].push_back({k, kE[c], next++});
  }
  s.ndofs = next;
  return s;
}

DiscreteSpace projection_space(const BoundaryMesh& mesh, int extra_degree) {
  return legendre_space(mesh, mesh.elements_with(Label::Contact), extra_degree);
}

DiscreteSpace multiplier_space(const BoundaryMesh& mesh) {
  const int n = mesh.size();
  DiscreteSpace s;
  s.shapes.resize(n);
  s.local.resize(n);
  int next = 0;
  for (int e = 0; e < n; ++e) {
    if (mesh[e].label != Label::Contact) continue;
    int q = mesh[e].degree;
    s.shapes[e] = {ShapeKind::LagrangeGauss, q};
    s.elements.push_back(e);
    Vec2 nn = mesh[e].normal(), tt = mesh[e].tangent();
    for (int i = 0; i <= q; ++i) {
      s.local[e].push_back({i, nn, next++});
      s.local[e].push_back({i, tt, next++});
    }
  }
  s.ndofs = next;
  return s;
}

std::vector<ConstraintNode> constraint_nodes(const BoundaryMesh& mesh, const DiscreteSpace& m) {
  std::vector<ConstraintNode> out;
  for (int e : m.elements) {
    const Element& el = mesh[e];
    const auto& rule = cached_gauss_legendre(el.degree + 1);
    for (int i = 0; i <= el.degree; ++i) {
      ConstraintNode cn;
      cn.element = e;
      cn.t = rule.nodes[i];
      cn.weight = rule.weights[i] * 0.5 * el.h();
      cn.x = el.point(cn.t);
      cn.normal = el.normal();
      cn.tangent = el.tangent();
      cn.dof_n = m.local[e][2 * i].dof;
      cn.dof_t = m.local[e][2 * i + 1].dof;
      out.push_back(cn);
    }
  }
  return out;
}

Eigen::VectorXd interpolate_primal(const BoundaryMesh& mesh, const DiscreteSpace& X,
                                   const std::function<Vec2(const Vec2&)>& f, int quad_points) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(X.ndofs);
  const auto& rule = cached_gauss_legendre(quad_points);
  double v[64], dv[64];
  for (int e : X.elements) {
    const Element& el = mesh[e];
    Vec2 fa = f(el.a), fb = f(el.b);
    for (const auto& le : X.local[e]) {
      if (le.f == 0) c(le.dof) = le.dir.dot(fa);
      else if (le.f == 1) c(le.dof) = le.dir.dot(fb);
    }
    if (el.degree < 2) continue;
    // N_k' = sqrt((2k-1)/2) P_{k-1} are orthonormal on [-1,1]; the bubble
    // coefficient int f_t N_k' is integrated by parts to avoid derivatives.
    std::vector<Vec2> ck(el.degree + 1, Vec2::Zero());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double t = rule.nodes[q];
      Vec2 val = f(el.point(t));
      legendre(el.degree, t, v, dv);
      for (int k = 2; k <= el.degree; ++k) ck[k] -= rule.weights[q] * dv[k - 1] * val;
    }
    for (int k = 2; k <= el.degree; ++k) {
      double sgn = ((k - 1) % 2) ? -1.0 : 1.0;  // P_{k-1}(-1)
      ck[k] = std::sqrt((2.0 * k - 1.0) / 2.0) * (ck[k] + fb - sgn * fa);
    }
    for (const auto& le : X.local[e])
      if (le.f >= 2) c(le.dof) = le.dir.dot(ck[le.f]);
  }
  return c;
}

Eigen::VectorXd project_legendre(const BoundaryMesh& mesh, const DiscreteSpace& Y,
                                 const std::function<Vec2(int, const Vec2&)>& f, int quad_points) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(Y.ndofs);
  const auto& rule = cached_gauss_legendre(quad_points);
  double P[64];
  for (int e : Y.elements) {
    const Element& el = mesh[e];
    const int d = Y.shapes[e].degree;
    std::vector<Vec2> ck(d + 1, Vec2::Zero());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double t = rule.nodes[q];
      Vec2 val = f(e, el.point(t));
      legendre(d, t, P);
      for (int k = 0; k <= d; ++k) ck[k] += rule.weights[q] * (k + 0.5) * P[k] * val;
    }
    for (const auto& le : Y.local[e]) c(le.dof) = le.dir.dot(ck[le.f]);
  }
  return c;
}

Eigen::MatrixXd assemble_mass(const BoundaryMesh& mesh, const DiscreteSpace& a, const DiscreteSpace& b,
                              const ElementWeight& w, int extra_points) {
  if ((int)a.local.size() != mesh.size() || (int)b.local.size() != mesh.size())
    throw std::invalid_argument("assemble_mass: spaces do not match the mesh");
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(a.ndofs, b.ndofs);
  double va[64], vb[64];
  for (int e = 0; e < mesh.size(); ++e) {
    if (!a.supports(e) || !b.supports(e)) continue;
    const Element& el = mesh[e];
    int n = (a.shapes[e].degree + b.shapes[e].degree) / 2 + 1 + extra_points;
    const auto& rule = cached_gauss_legendre(n);
    const double J = 0.5 * el.h();
    for (int q = 0; q < n; ++q) {
      double t = rule.nodes[q];
      double wt = rule.weights[q] * J * (w ? w(e, el.point(t)) : 1.0);
      a.shapes[e].eval(t, va);
      b.shapes[e].eval(t, vb);
      for (auto& la : a.local[e])
        for (auto& lb : b.local[e]) M(la.dof, lb.dof) += wt * va[la.f] * vb[lb.f] * la.dir.dot(lb.dir);
    }
  }
  return M;
}

Vec2 PiecewisePoly::eval(int e, double t) const {
  const auto& c = coeff[e];
  const int n = (int)c.cols();
  if (n == 0) return Vec2::Zero();
  double P[64];
  legendre(n - 1, t, P);
  Vec2 r = Vec2::Zero();
  for (int k = 0; k < n; ++k) r += c.col(k) * P[k];
  return r;
}

PiecewisePoly project_piecewise(const BoundaryMesh& mesh, const std::vector<int>& elements,
                                const std::function<int(int)>& degree, const std::function<Vec2(int, double)>& f,
                                int extra_points) {
  PiecewisePoly out;
  out.coeff.assign(mesh.size(), Eigen::Matrix<double, 2, Eigen::Dynamic>(2, 0));
  double P[64];
  for (int e : elements) {
    int d = degree(e);
    int n = d + 1 + extra_points;
    const auto& rule = cached_gauss_legendre(n);
    Eigen::Matrix<double, 2, Eigen::Dynamic> c = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, d + 1);
    for (int q = 0; q < n; ++q) {
      Vec2 v = f(e, rule.nodes[q]);
      legendre(d, rule.nodes[q], P);
      for (int k = 0; k <= d; ++k) c.col(k) += rule.weights[q] * P[k] * v;
    }
    for (int k = 0; k <= d; ++k) c.col(k) *= (2.0 * k + 1.0) / 2.0;
    out.coeff[e] = c;
  }
  return out;
}

PiecewisePoly to_piecewise(const BoundaryMesh& mesh, const DiscreteSpace& space, const Eigen::VectorXd& c) {
  return project_piecewise(
      mesh, space.elements, [&](int e) { return space.shapes[e].degree; },
      [&](int e, double t) { return space.eval(c, e, t); }, 1);
}

PiecewisePoly arc_derivative(const BoundaryMesh& mesh, const PiecewisePoly& f) {
  PiecewisePoly out;
  out.coeff.assign(mesh.size(), Eigen::Matrix<double, 2, Eigen::Dynamic>(2, 0));
  for (int e = 0; e < mesh.size(); ++e) {
    const auto& c = f.coeff[e];
    const int n = (int)c.cols();
    if (n == 0) continue;
    // d/dt sum a_k P_k = sum_k b_k P_k with b_k = (2k+1) sum_{j>k, j-k odd} a_j
    Eigen::Matrix<double, 2, Eigen::Dynamic> d = Eigen::Matrix<double, 2, Eigen::Dynamic>::Zero(2, std::max(n - 1, 1));
    for (int k = 0; k + 1 < n; ++k)
      for (int j = k + 1; j < n; j += 2) d.col(k) += (2.0 * k + 1.0) * c.col(j);
    out.coeff[e] = d * (2.0 / mesh[e].h());
  }
  return out;
}

}  // namespace hpbem
