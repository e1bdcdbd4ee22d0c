#include "hpbem/operators.hpp"

#include <algorithm>
#include <stdexcept>

namespace hpbem {

namespace {

Vec2 map_dir(const FunctionView& v, const Vec2& d) { return v.rotate ? Vec2(rot90() * d) : d; }

// Shape values (or arc-length derivatives) of the view on element e at the
// given reference points; one row per shape, one column per point.
void shape_table(const FunctionView& v, const Element& el, int e, const std::vector<KernelPoint>& pts, bool use_s,
                 Eigen::MatrixXd& T) {
  const ShapeSet& sh = v.space->shapes[e];
  const int n = sh.size();
  const int q = (int)pts.size();
  T.resize(n, q);
  double val[64], der[64];
  const double scale = 2.0 / el.h();
  for (int k = 0; k < q; ++k) {
    double t = use_s ? pts[k].s : pts[k].t;
    sh.eval(t, val, der);
    if (v.derivative)
      for (int i = 0; i < n; ++i) T(i, k) = der[i] * scale;
    else
      for (int i = 0; i < n; ++i) T(i, k) = val[i];
  }
}

int view_degree(const FunctionView& v, int e) { return v.space->shapes[e].degree; }

struct Weighted {
  Eigen::RowVectorXd w0, w1xx, w1xy, w1yy, w2;
};

void weighted_factors(const std::vector<KernelPoint>& pts, Weighted& W) {
  const int q = (int)pts.size();
  W.w0.resize(q);
  W.w1xx.resize(q);
  W.w1xy.resize(q);
  W.w1yy.resize(q);
  W.w2.resize(q);
  for (int k = 0; k < q; ++k) {
    const auto& p = pts[k];
    W.w0(k) = p.w * p.a0;
    W.w1xx(k) = p.w * p.a1xx;
    W.w1xy(k) = p.w * p.a1xy;
    W.w1yy(k) = p.w * p.a1yy;
    W.w2(k) = p.w * p.a2;
  }
}

void accumulate(const OperatorTerm& term, int ex, int ey, const Eigen::MatrixXd& Ta, const Eigen::MatrixXd& Tb,
                const Weighted& W) {
  const KernelCoeffs& k = term.kernel;
  Eigen::MatrixXd Siso = Eigen::MatrixXd::Zero(Ta.rows(), Tb.rows());
  if (k.log != 0.0) Siso += k.log * (Ta * W.w0.asDiagonal()) * Tb.transpose();
  if (k.dlayer != 0.0) Siso += k.dlayer * (Ta * W.w2.asDiagonal()) * Tb.transpose();
  Eigen::MatrixXd Sxx, Sxy, Syy;
  const bool dyad = k.dyad != 0.0;
  if (dyad) {
    Sxx = k.dyad * (Ta * W.w1xx.asDiagonal()) * Tb.transpose();
    Sxy = k.dyad * (Ta * W.w1xy.asDiagonal()) * Tb.transpose();
    Syy = k.dyad * (Ta * W.w1yy.asDiagonal()) * Tb.transpose();
  }
  Eigen::MatrixXd& out = *term.out;
  for (const auto& la : term.test.space->local[ex]) {
    Vec2 da = map_dir(term.test, la.dir);
    for (const auto& lb : term.trial.space->local[ey]) {
      Vec2 db = map_dir(term.trial, lb.dir);
      double v = Siso(la.f, lb.f) * da.dot(db);
      if (dyad)
        v += da.x() * (Sxx(la.f, lb.f) * db.x() + Sxy(la.f, lb.f) * db.y()) +
             da.y() * (Sxy(la.f, lb.f) * db.x() + Syy(la.f, lb.f) * db.y());
      out(la.dof, lb.dof) += term.scale * v;
    }
  }
}

}  // namespace

void assemble_terms(const BoundaryMesh& mesh, const std::vector<OperatorTerm>& terms, double tol) {
  const int n = mesh.size();
  for (const auto& t : terms) {
    if (!t.out || !t.test.space || !t.trial.space) throw std::invalid_argument("incomplete operator term");
    if ((int)t.test.space->local.size() != n || (int)t.trial.space->local.size() != n)
      throw std::invalid_argument("operator term spaces do not match the mesh");
    if (t.out->rows() != t.test.space->ndofs || t.out->cols() != t.trial.space->ndofs)
      throw std::invalid_argument("operator term output has wrong shape");
  }
  std::vector<KernelPoint> pts;
  Weighted W;
  Eigen::MatrixXd Ta, Tb;
  std::vector<int> active;
  for (int ex = 0; ex < n; ++ex) {
    for (int ey = 0; ey < n; ++ey) {
      active.clear();
      int dx = 0, dy = 0;
      for (int i = 0; i < (int)terms.size(); ++i) {
        const auto& t = terms[i];
        if (t.kernel.zero() || !t.test.space->supports(ex) || !t.trial.space->supports(ey)) continue;
        active.push_back(i);
        dx = std::max(dx, view_degree(t.test, ex));
        dy = std::max(dy, view_degree(t.trial, ey));
      }
      if (active.empty()) continue;
      pair_rule(mesh, ex, ey, dx, dy, tol, pts);
      weighted_factors(pts, W);
      for (int i : active) {
        const auto& t = terms[i];
        shape_table(t.test, mesh[ex], ex, pts, true, Ta);
        shape_table(t.trial, mesh[ey], ey, pts, false, Tb);
        accumulate(t, ex, ey, Ta, Tb, W);
      }
    }
  }
}

Eigen::MatrixXd point_matrix(const BoundaryMesh& mesh, const Vec2& z, const FunctionView& view,
                             const KernelCoeffs& k, double tol) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2, view.space->ndofs);
  std::vector<KernelPoint> pts;
  Eigen::MatrixXd T;
  for (int e : view.space->elements) {
    point_rule(mesh, z, e, view_degree(view, e), tol, pts);
    shape_table(view, mesh[e], e, pts, false, T);
    // Per shape: int k(z,y) shape(y) as a 2x2 matrix.
    const int ns = (int)T.rows();
    std::vector<Mat2> M(ns, Mat2::Zero());
    for (int q = 0; q < (int)pts.size(); ++q) {
      const auto& p = pts[q];
      Mat2 K;
      K << k.log * p.a0 + k.dlayer * p.a2 + k.dyad * p.a1xx, k.dyad * p.a1xy, k.dyad * p.a1xy,
          k.log * p.a0 + k.dlayer * p.a2 + k.dyad * p.a1yy;
      for (int s = 0; s < ns; ++s) M[s] += (p.w * T(s, q)) * K;
    }
    for (const auto& le : view.space->local[e]) G.col(le.dof) += M[le.f] * map_dir(view, le.dir);
  }
  return G;
}

Eigen::MatrixXd assemble_V(const BoundaryMesh& mesh, const DiscreteSpace& Y, const Material& m, double tol) {
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(Y.ndofs, Y.ndofs);
  assemble_terms(mesh, {{{&Y}, {&Y}, single_layer_kernel(m), &V}}, tol);
  return V;
}

Eigen::MatrixXd assemble_K(const BoundaryMesh& mesh, const DiscreteSpace& Y, const DiscreteSpace& X,
                           const Material& m, double tol) {
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(Y.ndofs, X.ndofs);
  assemble_terms(mesh,
                 {{{&Y}, {&X}, laplace_double_layer_kernel(), &K},
                  {{&Y}, {&X, true, true}, double_layer_companion_kernel(m), &K}},
                 tol);
  return K;
}

Eigen::MatrixXd assemble_W(const BoundaryMesh& mesh, const DiscreteSpace& X, const Material& m, double tol) {
  Eigen::MatrixXd W = Eigen::MatrixXd::Zero(X.ndofs, X.ndofs);
  assemble_terms(mesh, {{{&X, true}, {&X, true}, hypersingular_kernel(m), &W}}, tol);
  return W;
}

OperatorSet assemble_operators(const BoundaryMesh& mesh, const DiscreteSpace& X, const DiscreteSpace& Y,
                               const Material& m, double tol) {
  OperatorSet ops;
  ops.tol = tol;
  ops.V = Eigen::MatrixXd::Zero(Y.ndofs, Y.ndofs);
  ops.K = Eigen::MatrixXd::Zero(Y.ndofs, X.ndofs);
  ops.W = Eigen::MatrixXd::Zero(X.ndofs, X.ndofs);
  assemble_terms(mesh,
                 {{{&Y}, {&Y}, single_layer_kernel(m), &ops.V},
                  {{&Y}, {&X}, laplace_double_layer_kernel(), &ops.K},
                  {{&Y}, {&X, true, true}, double_layer_companion_kernel(m), &ops.K},
                  {{&X, true}, {&X, true}, hypersingular_kernel(m), &ops.W}},
                 tol);
  return ops;
}

Eigen::MatrixXd assemble_W_hat(const BoundaryMesh& mesh, const DiscreteSpace& Z, const DiscreteSpace& X,
                               const Material& m, double tol) {
  Eigen::MatrixXd Wh = Eigen::MatrixXd::Zero(Z.ndofs, X.ndofs);
  const KernelCoeffs k = hypersingular_kernel(m);
  assemble_terms(mesh, {{{&Z, true}, {&X, true}, k, &Wh}}, tol);
  // Jumps of the discontinuous test functions at element ends.
  double v[64];
  for (int e : Z.elements) {
    const Element& el = mesh[e];
    for (int end = 0; end < 2; ++end) {
      const Vec2 z = end == 0 ? el.a : el.b;
      const double sign = end == 0 ? 1.0 : -1.0;
      Z.shapes[e].eval(end == 0 ? -1.0 : 1.0, v);
      Eigen::MatrixXd G = point_matrix(mesh, z, {&X, true}, k, tol);
      for (const auto& le : Z.local[e]) Wh.row(le.dof) += sign * v[le.f] * (le.dir.transpose() * G);
    }
  }
  return Wh;
}

Eigen::MatrixXd assemble_Kp_hat(const BoundaryMesh& mesh, const DiscreteSpace& Z, const DiscreteSpace& Y,
                                const Material& m, double tol) {
  // Assemble <psi_i, K xi_j> (Y x Z) and transpose.
  Eigen::MatrixXd Kz = Eigen::MatrixXd::Zero(Y.ndofs, Z.ndofs);
  const KernelCoeffs q = double_layer_companion_kernel(m);
  assemble_terms(mesh,
                 {{{&Y}, {&Z}, laplace_double_layer_kernel(), &Kz}, {{&Y}, {&Z, true, true}, q, &Kz}}, tol);
  double v[64];
  const Mat2 R = rot90();
  for (int e : Z.elements) {
    const Element& el = mesh[e];
    for (int end = 0; end < 2; ++end) {
      const Vec2 z = end == 0 ? el.a : el.b;
      const double sign = end == 0 ? 1.0 : -1.0;
      Z.shapes[e].eval(end == 0 ? -1.0 : 1.0, v);
      Eigen::MatrixXd G = point_matrix(mesh, z, {&Y}, q, tol);
      for (const auto& le : Z.local[e]) Kz.col(le.dof) += sign * v[le.f] * (G.transpose() * (R * le.dir));
    }
  }
  return Kz.transpose();
}

Eigen::MatrixXd identity_pairing(const BoundaryMesh& mesh, const DiscreteSpace& Y, const DiscreteSpace& X) {
  return assemble_mass(mesh, Y, X);
}

}  // namespace hpbem
