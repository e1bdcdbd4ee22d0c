#include "hpbem/solver.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace hpbem {

Vec2 ProblemData::traction_at(int part, const Vec2& x) const {
  if (part < 0 || part >= (int)traction.size() || !traction[part]) return Vec2::Zero();
  return traction[part](x);
}

void ProblemData::validate(const BoundaryMesh& mesh) const {
  material.validate();
  if (!gap || !friction) throw std::invalid_argument("problem needs gap and friction functions");
  const DiscreteSpace L = multiplier_space(mesh);
  for (const auto& n : constraint_nodes(mesh, L)) {
    double g = gap(n.x), F = friction(n.x);
    if (!std::isfinite(g) || g < 0) throw std::invalid_argument("gap must be non-negative on the contact part");
    if (!std::isfinite(F)) throw std::invalid_argument("friction function is not finite");
    if (law == FrictionLaw::Tresca && F <= 0) throw std::invalid_argument("Tresca threshold must be positive");
    if (law == FrictionLaw::Coulomb && F < 0) throw std::invalid_argument("Coulomb coefficient must be >= 0");
  }
}

int rigid_kernel_dimension(const BoundaryMesh& mesh, const std::vector<Pin>& pins) {
  // rows: fixed component c at point x, columns: rigid motions (1,0),(0,1),(x2,-x1)
  std::vector<Eigen::RowVector3d> rows;
  auto add = [&](const Vec2& x, int c) {
    Eigen::RowVector3d r;
    r << (c == 0 ? 1.0 : 0.0), (c == 1 ? 1.0 : 0.0), (c == 0 ? x.y() : -x.x());
    rows.push_back(r);
  };
  for (const auto& el : mesh.elements)
    if (el.label == Label::Dirichlet)
      for (int c = 0; c < 2; ++c) add(el.a, c), add(el.b, c);
  for (const auto& p : pins)
    for (int c = 0; c < 2; ++c)
      if (p.fix[c]) add(p.point, c);
  if (rows.empty()) return 3;
  Eigen::MatrixXd R(rows.size(), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) R.row(i) = rows[i];
  Eigen::FullPivLU<Eigen::MatrixXd> lu(R);
  lu.setThreshold(1e-10);
  return 3 - (int)lu.rank();
}

Eigen::VectorXd neumann_load(const BoundaryMesh& mesh, const DiscreteSpace& X, const ProblemData& problem) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(X.ndofs);
  double v[64];
  for (int e : X.elements) {
    const Element& el = mesh[e];
    if (el.label != Label::Neumann) continue;
    const int part = el.part;
    if (part >= (int)problem.traction.size() || !problem.traction[part]) continue;
    const auto& rule = cached_gauss_legendre(el.degree + 12);
    const double J = 0.5 * el.h();
    for (std::size_t q = 0; q < rule.size(); ++q) {
      double t = rule.nodes[q];
      Vec2 f = problem.traction[part](el.point(t));
      X.shapes[e].eval(t, v);
      for (const auto& le : X.local[e]) b(le.dof) += rule.weights[q] * J * v[le.f] * le.dir.dot(f);
    }
  }
  return b;
}

Discretization discretize(const BoundaryMesh& mesh, const ProblemData& problem, const DiscretizationOptions& opt) {
  problem.validate(mesh);
  if (rigid_kernel_dimension(mesh, problem.pins) > 0)
    throw std::invalid_argument("rigid body motions are not removed: add pins or a Dirichlet part");
  Discretization d;
  d.mesh = mesh;
  d.options = opt;
  d.X = primal_space(mesh, problem.pins);
  d.Y = dual_space(mesh);
  d.L = multiplier_space(mesh);
  d.nodes = constraint_nodes(mesh, d.L);
  d.ops = assemble_operators(mesh, d.X, d.Y, problem.material, opt.tol);
  d.C = d.ops.K + 0.5 * assemble_mass(mesh, d.Y, d.X);
  d.D = assemble_mass(mesh, d.X, d.L);
  d.load = neumann_load(mesh, d.X, problem);
  d.stab = assemble_stabilization(mesh, d.X, d.Y, d.L, problem.material, opt.tol, opt.z_extra);
  set_gamma(d.stab, mesh, opt.gamma_bar);
  return d;
}

void set_gamma(Discretization& d, double gamma_bar) {
  d.options.gamma_bar = gamma_bar;
  set_gamma(d.stab, d.mesh, gamma_bar);
}

BilinearSystem assemble_system(const Discretization& d, const ProblemData& problem) {
  const auto& s = d.stab;
  BilinearSystem sys;
  sys.nu = d.nu();
  sys.nphi = d.nphi();
  sys.nlam = d.nlam();
  const int nu = sys.nu, np = sys.nphi, nl = sys.nlam, nx = nu + np;
  sys.A.resize(nx, nx);
  sys.A.topLeftCorner(nu, nu) = d.ops.W - s.S_uu;
  sys.A.topRightCorner(nu, np) = d.C.transpose() - s.S_uphi;
  sys.A.bottomLeftCorner(np, nu) = -d.C - s.S_uphi.transpose();
  sys.A.bottomRightCorner(np, np) = d.ops.V - s.S_phiphi;
  sys.B.resize(nx, nl);
  sys.B.topRows(nu) = d.D - s.S_ulam;
  sys.B.bottomRows(np) = -s.S_philam;
  sys.rhs = Eigen::VectorXd::Zero(nx);
  sys.rhs.head(nu) = d.load;

  // Point values at the constraint nodes in the (normal, tangent) frame.
  Eigen::MatrixXd Ex = Eigen::MatrixXd::Zero(nl, nu);
  Eigen::MatrixXd Ez = Eigen::MatrixXd::Zero(nl, s.Z.ndofs);
  sys.gamma_node = Eigen::VectorXd::Zero(nl);
  sys.e0 = Eigen::VectorXd::Zero(nl);
  sys.friction_node.resize(d.nodes.size());
  double v[64];
  for (std::size_t k = 0; k < d.nodes.size(); ++k) {
    const auto& n = d.nodes[k];
    const int e = n.element;
    d.X.shapes[e].eval(n.t, v);
    for (const auto& le : d.X.local[e]) {
      Ex(n.dof_n, le.dof) += v[le.f] * le.dir.dot(n.normal);
      Ex(n.dof_t, le.dof) += v[le.f] * le.dir.dot(n.tangent);
    }
    s.Z.shapes[e].eval(n.t, v);
    for (const auto& le : s.Z.local[e]) {
      Ez(n.dof_n, le.dof) += v[le.f] * le.dir.dot(n.normal);
      Ez(n.dof_t, le.dof) += v[le.f] * le.dir.dot(n.tangent);
    }
    sys.gamma_node(n.dof_n) = sys.gamma_node(n.dof_t) = s.gamma(e);
    sys.e0(n.dof_n) = -problem.gap(n.x);
    sys.friction_node(k) = problem.friction(n.x);
  }
  const Eigen::MatrixXd GEz = sys.gamma_node.asDiagonal() * Ez;
  sys.E.resize(nl, nx);
  sys.E.leftCols(nu) = Ex - GEz * s.A_u;
  sys.E.rightCols(np) = -GEz * s.A_phi;
  sys.nodes = d.nodes;
  sys.law = problem.law;
  return sys;
}

Vec2 project_pair(double lam_n, double lam_t, double bound) {
  return Vec2(std::max(0.0, lam_n), std::clamp(lam_t, -bound, bound));
}

Eigen::VectorXd project_multiplier(const Eigen::VectorXd& lam, const std::vector<ConstraintNode>& nodes,
                                   const Eigen::VectorXd& bound) {
  Eigen::VectorXd out = lam;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    Vec2 p = project_pair(lam(nodes[k].dof_n), lam(nodes[k].dof_t), bound(k));
    out(nodes[k].dof_n) = p.x();
    out(nodes[k].dof_t) = p.y();
  }
  return out;
}

namespace {

Eigen::VectorXd bounds_for(const BilinearSystem& sys, const Eigen::VectorXd& lam) {
  Eigen::VectorXd b = sys.friction_node;
  if (sys.law == FrictionLaw::Coulomb)
    for (std::size_t k = 0; k < sys.nodes.size(); ++k) b(k) *= std::max(0.0, lam(sys.nodes[k].dof_n));
  return b;
}

// Shared factorization and the reduction x = x0 - X1 lam, s = s0 + H lam.
// A is factored after symmetric diagonal equilibration; graded meshes give
// basis functions whose Galerkin entries differ by many orders of magnitude.
struct Reduced {
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  Eigen::VectorXd scale;
  Eigen::VectorXd x0, s0;
  Eigen::MatrixXd X1, H;

  Eigen::MatrixXd solve(const Eigen::MatrixXd& b) const {
    return scale.asDiagonal() * lu.solve(scale.asDiagonal() * b);
  }
};

Reduced reduce(const BilinearSystem& sys) {
  Reduced R;
  const int nx = sys.nu + sys.nphi;
  if (nx == 0) throw std::invalid_argument("empty system");
  R.scale = sys.A.diagonal().cwiseAbs().cwiseSqrt().cwiseInverse();
  for (int i = 0; i < nx; ++i)
    if (!std::isfinite(R.scale(i))) R.scale(i) = 1.0;
  R.lu.compute(R.scale.asDiagonal() * sys.A * R.scale.asDiagonal());
  if (!std::isfinite(R.lu.rcond()) || R.lu.rcond() < 1e-15)
    throw std::runtime_error("linear block is singular (gamma_bar too large or broken mesh)");
  R.x0 = R.solve(sys.rhs);
  R.X1 = R.solve(sys.B);
  R.s0 = sys.E * R.x0 + sys.e0;
  R.H = -sys.E * R.X1;
  R.H.diagonal() -= sys.gamma_node;
  return R;
}

Eigen::VectorXd solve_x(const BilinearSystem& sys, const Reduced& R, const Eigen::VectorXd& lam) {
  Eigen::VectorXd b = sys.rhs - sys.B * lam;
  Eigen::VectorXd x = R.solve(b);
  x += R.solve(b - sys.A * x);
  return x;
}

SolverState finish(const BilinearSystem& sys, const Reduced& R, Eigen::VectorXd lam, double r, SolverState st) {
  // Exact admissibility at the nodes: the last update is a projection, so
  // this only removes round-off.
  lam = project_multiplier(lam, sys.nodes, bounds_for(sys, lam));
  Eigen::VectorXd x = solve_x(sys, R, lam);
  st.u = x.head(sys.nu);
  st.phi = x.tail(sys.nphi);
  st.lam = lam;
  st.merit = merit(sys, st.u, st.phi, lam, r);
  Eigen::VectorXd s = sys.E * x - sys.gamma_node.cwiseProduct(lam) + sys.e0;
  Eigen::VectorXd z = lam + r * s;
  Eigen::VectorXd b = bounds_for(sys, lam);
  st.contact_active.assign(sys.nodes.size(), false);
  st.slip_active.assign(sys.nodes.size(), false);
  for (std::size_t k = 0; k < sys.nodes.size(); ++k) {
    st.contact_active[k] = z(sys.nodes[k].dof_n) > 0;
    st.slip_active[k] = std::abs(z(sys.nodes[k].dof_t)) > b(k);
  }
  return st;
}

// Semi-smooth Newton on F(lam) = lam - P(lam + r s(lam)). With `fixed` the
// tangential bounds are frozen (Tresca inner solve of the two-loop scheme).
SolverState newton(const BilinearSystem& sys, const Reduced& R, const NewtonOptions& opt, Eigen::VectorXd lam,
                   const Eigen::VectorXd* fixed) {
  const int nl = sys.nlam;
  const double r = opt.r;
  if (r <= 0) throw std::invalid_argument("r must be positive");
  const bool coulomb = sys.law == FrictionLaw::Coulomb && !fixed;
  // Coulomb: the threshold is F times the projected normal argument, i.e.
  // the normal component of the updated multiplier.
  auto boundsz = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& zz) {
    if (fixed) return *fixed;
    return bounds_for(sys, coulomb ? zz : l);
  };
  auto residual = [&](const Eigen::VectorXd& l, Eigen::VectorXd* zout) {
    Eigen::VectorXd z = l + r * (R.s0 + R.H * l);
    if (zout) *zout = z;
    return Eigen::VectorXd(l - project_multiplier(z, sys.nodes, boundsz(l, z)));
  };
  // Merit of the reduced problem plus the explicit linear residual.
  auto full_merit = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& F2) {
    Eigen::VectorXd x = R.x0 - R.X1 * l;
    return (sys.A * x + sys.B * l - sys.rhs).squaredNorm() + F2.squaredNorm();
  };

  // Active-set signature: contact flag and stick/slip(+/-) per node.
  auto signature = [&](const Eigen::VectorXd& l, const Eigen::VectorXd& zz) {
    const Eigen::VectorXd b = boundsz(l, zz);
    std::vector<signed char> sig(2 * sys.nodes.size());
    for (std::size_t k = 0; k < sys.nodes.size(); ++k) {
      sig[2 * k] = zz(sys.nodes[k].dof_n) > 0;
      const double zt = zz(sys.nodes[k].dof_t);
      sig[2 * k + 1] = std::abs(zt) <= b(k) ? 0 : (zt > 0 ? 1 : -1);
    }
    return sig;
  };

  SolverState st;
  Eigen::VectorXd z;
  Eigen::VectorXd F = residual(lam, &z);
  double m = full_merit(lam, F);
  std::set<std::vector<signed char>> visited{signature(lam, z)};
  std::vector<double> history{m};
  for (int it = 1; it <= opt.max_iter; ++it) {
    st.iterations = it;
    if (std::sqrt(m) < opt.tol) {
      st.converged = true;
      break;
    }
    if (it == opt.max_iter) break;
    const Eigen::VectorXd b = boundsz(lam, z);
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(nl, nl);
    for (std::size_t k = 0; k < sys.nodes.size(); ++k) {
      const int dn = sys.nodes[k].dof_n, dt = sys.nodes[k].dof_t;
      if (z(dn) > 0) J.row(dn) -= Eigen::RowVectorXd::Unit(nl, dn) + r * R.H.row(dn);
      const double zt = z(dt);
      if (std::abs(zt) <= b(k)) {
        J.row(dt) -= Eigen::RowVectorXd::Unit(nl, dt) + r * R.H.row(dt);
      } else if (coulomb && z(dn) > 0) {
        J.row(dt) -= (zt > 0 ? 1.0 : -1.0) * sys.friction_node(k) * (Eigen::RowVectorXd::Unit(nl, dn) + r * R.H.row(dn));
      }
    }
    Eigen::VectorXd step = J.partialPivLu().solve(-F);
    if (!step.allFinite()) throw std::runtime_error("Newton step is not finite");
    // Full steps into unvisited active sets (primal-dual active set
    // behaviour); otherwise nonmonotone backtracking against the recent
    // merit history, which breaks cycles.
    const double ref = *std::max_element(history.end() - std::min<std::ptrdiff_t>(history.size(), 8), history.end());
    double t = 1.0;
    Eigen::VectorXd trial, Ft, zt;
    double mt = 0;
    for (;;) {
      trial = lam + t * step;
      Ft = residual(trial, &zt);
      mt = full_merit(trial, Ft);
      if (t == 1.0 && visited.insert(signature(trial, zt)).second) break;
      if (mt <= (1.0 - 1e-4 * t) * ref || t < 1e-10) break;
      t *= 0.5;
    }
    lam = trial;
    F = Ft;
    z = zt;
    m = mt;
    history.push_back(m);
  }
  st = finish(sys, R, lam, r, st);
  if (st.converged && std::sqrt(st.merit) >= opt.tol) st.converged = false;
  return st;
}

}  // namespace

double merit(const BilinearSystem& sys, const Eigen::VectorXd& u, const Eigen::VectorXd& phi,
             const Eigen::VectorXd& lam, double r) {
  Eigen::VectorXd x(sys.nu + sys.nphi);
  x << u, phi;
  Eigen::VectorXd F1 = sys.A * x + sys.B * lam - sys.rhs;
  Eigen::VectorXd s = sys.E * x - sys.gamma_node.cwiseProduct(lam) + sys.e0;
  Eigen::VectorXd F2 = lam - project_multiplier(lam + r * s, sys.nodes, bounds_for(sys, lam));
  return F1.squaredNorm() + F2.squaredNorm();
}

SolverState solve_tresca(const BilinearSystem& sys, const NewtonOptions& opt) {
  if (sys.law != FrictionLaw::Tresca) throw std::invalid_argument("solve_tresca needs a Tresca system");
  Reduced R = reduce(sys);
  return newton(sys, R, opt, Eigen::VectorXd::Zero(sys.nlam), nullptr);
}

SolverState solve_coulomb_two_loop(const BilinearSystem& sys, const NewtonOptions& opt) {
  if (sys.law != FrictionLaw::Coulomb) throw std::invalid_argument("two-loop solver needs a Coulomb system");
  Reduced R = reduce(sys);
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(sys.nlam);
  SolverState st;
  int total = 0;
  for (int outer = 1; outer <= opt.max_outer; ++outer) {
    Eigen::VectorXd b = bounds_for(sys, lam);
    SolverState inner = newton(sys, R, opt, lam, &b);
    total += inner.iterations;
    lam = inner.lam;
    st = inner;
    st.outer_iterations = outer;
    st.iterations = total;
    st.two_loop = true;
    // Coulomb residual with the bound taken from the new lam_n.
    st.merit = merit(sys, inner.u, inner.phi, inner.lam, opt.r);
    st.converged = std::sqrt(st.merit) < opt.tol;
    if (st.converged) break;
  }
  return st;
}

SolverState solve_coulomb(const BilinearSystem& sys, const NewtonOptions& opt) {
  if (sys.law != FrictionLaw::Coulomb) throw std::invalid_argument("solve_coulomb needs a Coulomb system");
  Reduced R = reduce(sys);
  SolverState st = newton(sys, R, opt, Eigen::VectorXd::Zero(sys.nlam), nullptr);
  if (st.converged || !opt.allow_two_loop) return st;
  SolverState fb = solve_coulomb_two_loop(sys, opt);
  fb.iterations += st.iterations;
  return fb;
}

SolverState solve(const BilinearSystem& sys, const NewtonOptions& opt) {
  return sys.law == FrictionLaw::Tresca ? solve_tresca(sys, opt) : solve_coulomb(sys, opt);
}

SolverState solve_fixed_point(const BilinearSystem& sys, double r, double tol, int max_iter) {
  Reduced R = reduce(sys);
  if (r <= 0) {
    // Contraction is measured in the nodal L2 inner product.
    Eigen::VectorXd w(sys.nlam);
    for (const auto& n : sys.nodes) w(n.dof_n) = w(n.dof_t) = std::sqrt(n.weight);
    Eigen::MatrixXd Hw = w.asDiagonal() * R.H * w.cwiseInverse().asDiagonal();
    r = 1.0 / Eigen::JacobiSVD<Eigen::MatrixXd>(Hw).singularValues()(0);
  }
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(sys.nlam);
  SolverState st;
  for (int it = 1; it <= max_iter; ++it) {
    Eigen::VectorXd z = lam + r * (R.s0 + R.H * lam);
    Eigen::VectorXd next = project_multiplier(z, sys.nodes, bounds_for(sys, lam));
    double inc = (next - lam).lpNorm<Eigen::Infinity>();
    lam = next;
    st.iterations = it;
    if (inc <= tol * std::max(1.0, lam.lpNorm<Eigen::Infinity>())) {
      st.converged = true;
      break;
    }
  }
  bool conv = st.converged;
  st = finish(sys, R, lam, r, st);
  st.converged = conv;
  return st;
}

}  // namespace hpbem
