#include "hpbem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hpbem {

std::string to_string(Label l) {
  switch (l) {
    case Label::Dirichlet: return "dirichlet";
    case Label::Neumann: return "neumann";
    case Label::Contact: return "contact";
  }
  return "?";
}

Label label_from_string(const std::string& s) {
  if (s == "dirichlet") return Label::Dirichlet;
  if (s == "neumann") return Label::Neumann;
  if (s == "contact") return Label::Contact;
  throw std::invalid_argument("unknown boundary label '" + s + "'");
}

int BoundaryGeometry::part_id(int edge, int local) const {
  int id = 0;
  for (int e = 0; e < edge; ++e) id += (int)parts[e].size();
  return id + local;
}

int BoundaryGeometry::num_parts() const {
  int n = 0;
  for (auto& p : parts) n += (int)p.size();
  return n;
}

Label BoundaryGeometry::part_label(int id) const {
  for (auto& p : parts) {
    if (id < (int)p.size()) return p[id].label;
    id -= (int)p.size();
  }
  throw std::out_of_range("part id");
}

double BoundaryGeometry::diameter() const {
  double d = 0;
  for (auto& a : vertices)
    for (auto& b : vertices) d = std::max(d, (a - b).norm());
  return d;
}

double BoundaryGeometry::perimeter() const {
  double s = 0;
  const int n = (int)vertices.size();
  for (int i = 0; i < n; ++i) s += (vertices[(i + 1) % n] - vertices[i]).norm();
  return s;
}

namespace {

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](const Vec2& a, const Vec2& b, const Vec2& c, double d) {
    return std::abs(d) < 1e-14 && std::min(a.x(), b.x()) - 1e-14 <= c.x() && c.x() <= std::max(a.x(), b.x()) + 1e-14 &&
           std::min(a.y(), b.y()) - 1e-14 <= c.y() && c.y() <= std::max(a.y(), b.y()) + 1e-14;
  };
  return on(p1, p2, q1, d1) || on(p1, p2, q2, d2) || on(q1, q2, p1, d3) || on(q1, q2, p2, d4);
}

}  // namespace

void BoundaryGeometry::validate() const {
  const int n = (int)vertices.size();
  if (n < 3) throw std::invalid_argument("polygon needs at least 3 vertices");
  if ((int)parts.size() != n) throw std::invalid_argument("one part list per polygon edge required");
  double area = 0;
  for (int i = 0; i < n; ++i) {
    if ((vertices[(i + 1) % n] - vertices[i]).norm() == 0) throw std::invalid_argument("degenerate polygon edge");
    area += cross(vertices[i], vertices[(i + 1) % n]);
  }
  if (area <= 0) throw std::invalid_argument("polygon must be counterclockwise");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n]))
        throw std::invalid_argument("polygon is not simple");
    }
  for (int e = 0; e < n; ++e) {
    if (parts[e].empty()) throw std::invalid_argument("edge without parts");
    double prev = 0;
    for (auto& p : parts[e]) {
      if (!(p.until > prev) || p.until > 1.0) throw std::invalid_argument("edge parts must increase within (0,1]");
      prev = p.until;
    }
    if (parts[e].back().until != 1.0) throw std::invalid_argument("last edge part must end at 1");
  }
  // Dirichlet and contact pieces may not share a point.
  struct Piece {
    Vec2 a, b;
    Label l;
  };
  std::vector<Piece> pieces;
  for (int e = 0; e < n; ++e) {
    Vec2 A = vertices[e], B = vertices[(e + 1) % n];
    double prev = 0;
    for (auto& p : parts[e]) {
      pieces.push_back({A + prev * (B - A), A + p.until * (B - A), p.label});
      prev = p.until;
    }
  }
  for (auto& p : pieces)
    for (auto& q : pieces)
      if (p.l == Label::Dirichlet && q.l == Label::Contact && segments_intersect(p.a, p.b, q.a, q.b))
        throw std::invalid_argument("Dirichlet part touches contact part");
  if (diameter() >= 2.0) throw std::invalid_argument("capacity check failed: diameter must be < 2");
}

std::vector<int> BoundaryMesh::elements_with(Label l) const {
  std::vector<int> r;
  for (int i = 0; i < size(); ++i)
    if (elements[i].label == l) r.push_back(i);
  return r;
}

int BoundaryMesh::max_degree() const {
  int p = 0;
  for (auto& e : elements) p = std::max(p, e.degree);
  return p;
}

double BoundaryMesh::perimeter() const {
  double s = 0;
  for (auto& e : elements) s += e.h();
  return s;
}

int BoundaryMesh::vertex_at(const Vec2& z, double tol) const {
  for (int i = 0; i < size(); ++i)
    if ((elements[i].a - z).norm() <= tol) return i;
  return -1;
}

namespace {

Element make_element(const BoundaryGeometry& g, int edge, double t0, double t1, int level, int degree) {
  const int n = (int)g.vertices.size();
  Vec2 A = g.vertices[edge], B = g.vertices[(edge + 1) % n];
  Element el;
  el.edge = edge;
  el.t0 = t0;
  el.t1 = t1;
  el.a = (t0 == 0.0) ? A : Vec2(A + t0 * (B - A));
  el.b = (t1 == 1.0) ? B : Vec2(A + t1 * (B - A));
  el.level = level;
  el.degree = degree;
  double tm = 0.5 * (t0 + t1);
  int local = 0;
  while (g.parts[edge][local].until < tm) ++local;
  el.part = g.part_id(edge, local);
  el.label = g.parts[edge][local].label;
  return el;
}

}  // namespace

BoundaryMesh build_mesh(const BoundaryGeometry& geometry, int elements_per_edge, int degree) {
  if (elements_per_edge < 1) throw std::invalid_argument("elements_per_edge must be >= 1");
  if (degree < 1) throw std::invalid_argument("degree must be >= 1");
  geometry.validate();
  BoundaryMesh mesh;
  mesh.geometry = geometry;
  const int n = (int)geometry.vertices.size();
  for (int e = 0; e < n; ++e) {
    Vec2 A = geometry.vertices[e], B = geometry.vertices[(e + 1) % n];
    std::vector<double> ts;
    for (int k = 0; k <= elements_per_edge; ++k) ts.push_back((double)k / elements_per_edge);
    for (auto& p : geometry.parts[e]) ts.push_back(p.until);
    for (auto& z : geometry.breakpoints) {
      Vec2 d = B - A;
      double t = (z - A).dot(d) / d.squaredNorm();
      if (t > 0 && t < 1 && (A + t * d - z).norm() < 1e-12 * d.norm()) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    std::vector<double> u;
    for (double t : ts)
      if (u.empty() || t - u.back() > 1e-12) u.push_back(t);
      else if (t != u.back() && std::abs(t - 0.5) < std::abs(u.back() - 0.5)) u.back() = t;
    u.front() = 0.0;
    u.back() = 1.0;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) mesh.elements.push_back(make_element(geometry, e, u[k], u[k + 1], 0, degree));
  }
  return mesh;
}

ElementMap element_map(const BoundaryMesh& mesh, int id, double t) {
  if (id < 0 || id >= mesh.size()) throw std::out_of_range("element id out of range");
  const Element& e = mesh[id];
  return {e.point(t), e.tangent(), e.normal(), 0.5 * e.h()};
}

BoundaryMesh refine(const BoundaryMesh& mesh, const std::set<int>& h_marks, const std::set<int>& p_marks,
                    int max_degree) {
  for (int i : h_marks)
    if (p_marks.count(i)) throw std::invalid_argument("element marked for both h and p refinement");
  std::vector<Element> cur = mesh.elements;
  std::vector<char> bisect(cur.size(), 0);
  for (int i : h_marks) bisect.at(i) = 1;
  for (int i : p_marks) cur.at(i).degree = std::min(cur[i].degree + 1, max_degree);
  const BoundaryGeometry& g = mesh.geometry;
  for (int pass = 0; pass < 1000; ++pass) {
    std::vector<Element> nxt;
    nxt.reserve(cur.size() * 2);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const Element& e = cur[i];
      if (!bisect[i]) {
        nxt.push_back(e);
        continue;
      }
      double tm = 0.5 * (e.t0 + e.t1);
      Element c0 = make_element(g, e.edge, e.t0, tm, e.level + 1, e.degree);
      Element c1 = make_element(g, e.edge, tm, e.t1, e.level + 1, e.degree);
      c0.a = e.a;
      c1.b = e.b;
      c0.b = c1.a;
      nxt.push_back(c0);
      nxt.push_back(c1);
    }
    cur.swap(nxt);
    const int n = (int)cur.size();
    bisect.assign(n, 0);
    bool changed = false;
    for (int i = 0; i < n; ++i) {
      int j = (i + 1) % n;
      double hi = cur[i].h(), hj = cur[j].h();
      if (hi > 4.0 * hj * (1 + 1e-12)) bisect[i] = 1, changed = true;
      if (hj > 4.0 * hi * (1 + 1e-12)) bisect[j] = 1, changed = true;
    }
    for (int sweep = 0; sweep < n + 1; ++sweep) {
      bool moved = false;
      for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        if (cur[i].degree > cur[j].degree + 1) cur[j].degree = cur[i].degree - 1, moved = true;
        if (cur[j].degree > cur[i].degree + 1) cur[i].degree = cur[j].degree - 1, moved = true;
      }
      if (!moved) break;
    }
    if (!changed) break;
  }
  BoundaryMesh out;
  out.geometry = g;
  out.elements = std::move(cur);
  return out;
}

bool contains(const Element& coarse, const Element& fine) {
  return coarse.edge == fine.edge && coarse.t0 <= fine.t0 && fine.t1 <= coarse.t1;
}

}  // namespace hpbem
