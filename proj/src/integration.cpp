#include "hpbem/integration.hpp"

#include <algorithm>
#include <cmath>

#include "hpbem/quadrature.hpp"

namespace hpbem {

namespace {

void set_geometry(KernelPoint& p, const Vec2& r, const Vec2& ny) {
  double r2 = r.squaredNorm();
  p.a0 = -0.5 * std::log(r2);
  p.a1xx = r.x() * r.x() / r2;
  p.a1xy = r.x() * r.y() / r2;
  p.a1yy = r.y() * r.y() / r2;
  p.a2 = r.dot(ny) / r2;
}

void set_constant(KernelPoint& p, double a0, const Vec2& tau) {
  p.a0 = a0;
  p.a1xx = tau.x() * tau.x();
  p.a1xy = tau.x() * tau.y();
  p.a1yy = tau.y() * tau.y();
  p.a2 = 0.0;
}

void set_log_only(KernelPoint& p) {
  p.a0 = 1.0;
  p.a1xx = p.a1xy = p.a1yy = p.a2 = 0.0;
}

int gauss_count(double tol, double q, int deg) {
  double rho = q + std::sqrt(q * q + 1.0);
  int n = (int)std::ceil(std::log(1.0 / tol) / (2.0 * std::log(rho))) + (deg + 2) / 2;
  return std::clamp(n, 2, 40);
}

// Map a rule on [-1,1] to [0,1].
inline double unit_node(double x) { return 0.5 * (x + 1.0); }

void identical_rule(const Element& el, int deg_x, int deg_y, std::vector<KernelPoint>& out) {
  const int D = deg_x + deg_y;
  const int nv = (D + 2) / 2 + 1;
  const int nm = (D + 1) / 2 + 1;
  const auto& gl_v = cached_gauss_legendre(nv);
  const auto& lg_v = cached_gauss_log(nv);
  const auto& gl_m = cached_gauss_legendre(nm);
  const double h = el.h();
  const double J = 0.25 * h * h;
  const Vec2 tau = el.tangent();
  const double same = -std::log(h);  // r = h v
  for (int side = 0; side < 2; ++side) {
    for (int pass = 0; pass < 2; ++pass) {
      const auto& rv = pass == 0 ? lg_v : gl_v;
      for (int i = 0; i < nv; ++i) {
        double v = pass == 0 ? rv.nodes[i] : unit_node(rv.nodes[i]);
        double wv = pass == 0 ? rv.weights[i] : 0.5 * rv.weights[i];
        for (int k = 0; k < nm; ++k) {
          double a = -1.0 + (1.0 - v) * (gl_m.nodes[k] + 1.0);
          double b = a + 2.0 * v;
          KernelPoint p;
          p.s = side == 0 ? a : b;
          p.t = side == 0 ? b : a;
          p.w = 2.0 * (1.0 - v) * wv * gl_m.weights[k] * J;
          if (pass == 0) set_log_only(p);
          else set_constant(p, same, tau);
          out.push_back(p);
        }
      }
    }
  }
}

// Elements sharing one vertex z; sx, sy = reference coordinate of z on each.
void adjacent_rule(const Element& ex, const Element& ey, double sx, double sy, int deg_x, int deg_y, double tol,
                   std::vector<KernelPoint>& out) {
  const int D = deg_x + deg_y;
  const int nr = (D + 3) / 2 + 1;
  const int nw = std::min(40, (int)std::ceil(std::log(1.0 / tol) / (2.0 * std::log(2.0))) + D / 2 + 2);
  const auto& gl_r = cached_gauss_legendre(nr);
  const auto& lg_r = cached_gauss_log(nr);
  const auto& gl_w = cached_gauss_legendre(nw);
  const double hx = ex.h(), hy = ey.h();
  const double J = 0.25 * hx * hy;
  const Vec2 dx = -sx * ex.tangent();  // from z into T_x
  const Vec2 dy = -sy * ey.tangent();
  const Vec2 ny = ey.normal();
  for (int tri = 0; tri < 2; ++tri) {
    for (int j = 0; j < nw; ++j) {
      double w = unit_node(gl_w.nodes[j]);
      double ww = 0.5 * gl_w.weights[j];
      double ua = tri == 0 ? 1.0 : w;  // a = rho*ua, b = rho*ub
      double ub = tri == 0 ? w : 1.0;
      Vec2 rdir = hx * ua * dx - hy * ub * dy;  // r / rho
      for (int pass = 0; pass < 2; ++pass) {
        const auto& rr = pass == 0 ? lg_r : gl_r;
        for (int i = 0; i < nr; ++i) {
          double rho = pass == 0 ? rr.nodes[i] : unit_node(rr.nodes[i]);
          double wr = pass == 0 ? rr.weights[i] : 0.5 * rr.weights[i];
          KernelPoint p;
          p.s = sx * (1.0 - 2.0 * rho * ua);
          p.t = sy * (1.0 - 2.0 * rho * ub);
          p.w = 4.0 * rho * wr * ww * J;
          if (pass == 0) {
            set_log_only(p);
          } else {
            set_geometry(p, rdir, ny);
            p.a2 /= rho;
          }
          out.push_back(p);
        }
      }
    }
  }
}

void far_rule(const Element& ex, double s0, double s1, const Element& ey, double t0, double t1, int deg_x, int deg_y,
              double tol, int depth, std::vector<KernelPoint>& out) {
  Vec2 xa = ex.point(s0), xb = ex.point(s1), ya = ey.point(t0), yb = ey.point(t1);
  double Lx = (xb - xa).norm(), Ly = (yb - ya).norm();
  double d = segment_distance(xa, xb, ya, yb);
  if (d < std::max(Lx, Ly) && depth < 60) {
    if (Lx >= Ly) {
      double m = 0.5 * (s0 + s1);
      far_rule(ex, s0, m, ey, t0, t1, deg_x, deg_y, tol, depth + 1, out);
      far_rule(ex, m, s1, ey, t0, t1, deg_x, deg_y, tol, depth + 1, out);
    } else {
      double m = 0.5 * (t0 + t1);
      far_rule(ex, s0, s1, ey, t0, m, deg_x, deg_y, tol, depth + 1, out);
      far_rule(ex, s0, s1, ey, m, t1, deg_x, deg_y, tol, depth + 1, out);
    }
    return;
  }
  const int nx = gauss_count(tol, d / (0.5 * Lx), deg_x);
  const int ny_ = gauss_count(tol, d / (0.5 * Ly), deg_y);
  const auto& rx = cached_gauss_legendre(nx);
  const auto& ry = cached_gauss_legendre(ny_);
  const double J = 0.25 * ex.h() * ey.h() * 0.25 * (s1 - s0) * (t1 - t0);
  const Vec2 n_y = ey.normal();
  for (int i = 0; i < nx; ++i) {
    double s = s0 + 0.5 * (rx.nodes[i] + 1.0) * (s1 - s0);
    Vec2 x = ex.point(s);
    for (int j = 0; j < ny_; ++j) {
      double t = t0 + 0.5 * (ry.nodes[j] + 1.0) * (t1 - t0);
      KernelPoint p;
      p.s = s;
      p.t = t;
      p.w = rx.weights[i] * ry.weights[j] * J;
      set_geometry(p, x - ey.point(t), n_y);
      out.push_back(p);
    }
  }
}

double point_segment_distance(const Vec2& z, const Vec2& a, const Vec2& b) {
  Vec2 d = b - a;
  double t = std::clamp((z - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
  return (a + t * d - z).norm();
}

void graded_point_rule(const Vec2& z, const Element& ey, double t0, double t1, int deg, double tol, int depth,
                       std::vector<KernelPoint>& out) {
  Vec2 ya = ey.point(t0), yb = ey.point(t1);
  double L = (yb - ya).norm();
  double d = point_segment_distance(z, ya, yb);
  if (d < L && depth < 60) {
    double m = 0.5 * (t0 + t1);
    graded_point_rule(z, ey, t0, m, deg, tol, depth + 1, out);
    graded_point_rule(z, ey, m, t1, deg, tol, depth + 1, out);
    return;
  }
  const int n = gauss_count(tol, d / (0.5 * L), deg);
  const auto& r = cached_gauss_legendre(n);
  const double J = 0.5 * ey.h() * 0.5 * (t1 - t0);
  const Vec2 ny = ey.normal();
  for (int j = 0; j < n; ++j) {
    double t = t0 + 0.5 * (r.nodes[j] + 1.0) * (t1 - t0);
    KernelPoint p;
    p.t = t;
    p.w = r.weights[j] * J;
    set_geometry(p, z - ey.point(t), ny);
    out.push_back(p);
  }
}

}  // namespace

double segment_distance(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto cross = [](const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); };
  double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return 0.0;
  return std::min({point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
                   point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2)});
}

void pair_rule(const BoundaryMesh& mesh, int ex, int ey, int deg_x, int deg_y, double tol,
               std::vector<KernelPoint>& out) {
  out.clear();
  const Element& X = mesh[ex];
  const Element& Y = mesh[ey];
  if (ex == ey) {
    identical_rule(X, deg_x, deg_y, out);
  } else if (mesh.next(ex) == ey) {
    adjacent_rule(X, Y, 1.0, -1.0, deg_x, deg_y, tol, out);
  } else if (mesh.prev(ex) == ey) {
    adjacent_rule(X, Y, -1.0, 1.0, deg_x, deg_y, tol, out);
  } else {
    far_rule(X, -1.0, 1.0, Y, -1.0, 1.0, deg_x, deg_y, tol, 0, out);
  }
}

void point_rule(const BoundaryMesh& mesh, const Vec2& z, int ey, int deg_y, double tol,
                std::vector<KernelPoint>& out) {
  out.clear();
  const Element& Y = mesh[ey];
  const double h = Y.h();
  const Vec2 tau = Y.tangent();
  double off = (z - Y.a).dot(Y.normal());
  double t0 = 2.0 * (z - Y.a).dot(tau) / h - 1.0;
  if (std::abs(off) <= 1e-13 * h && t0 >= -1.0 - 1e-12 && t0 <= 1.0 + 1e-12) {
    t0 = std::clamp(t0, -1.0, 1.0);
    const int n = (deg_y + 1) / 2 + 2;
    const auto& lg = cached_gauss_log(n);
    const auto& gl = cached_gauss_legendre(n);
    for (int side = 0; side < 2; ++side) {
      double L = side == 0 ? 1.0 - t0 : 1.0 + t0;
      double dir = side == 0 ? 1.0 : -1.0;
      if (L <= 1e-15) continue;
      const double J = 0.5 * h * L;
      const double same = -std::log(0.5 * h * L);
      for (int i = 0; i < n; ++i) {
        KernelPoint p;
        p.t = t0 + dir * L * lg.nodes[i];
        p.w = lg.weights[i] * J;
        set_log_only(p);
        out.push_back(p);
        KernelPoint q;
        q.t = t0 + dir * L * unit_node(gl.nodes[i]);
        q.w = 0.5 * gl.weights[i] * J;
        set_constant(q, same, tau);
        out.push_back(q);
      }
    }
    return;
  }
  graded_point_rule(z, Y, -1.0, 1.0, deg_y, tol, 0, out);
}

}  // namespace hpbem
