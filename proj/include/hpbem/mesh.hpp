#pragma once

#include <Eigen/Dense>
#include <set>
#include <string>
#include <vector>

namespace hpbem {

using Vec2 = Eigen::Vector2d;

enum class Label { Dirichlet, Neumann, Contact };

std::string to_string(Label l);
Label label_from_string(const std::string& s);

// One labelled piece of a polygon edge: covers edge parameters up to `until`
// (the previous piece's `until`, or 0, is the start).
struct EdgePart {
  double until = 1.0;
  Label label = Label::Neumann;
};

struct BoundaryGeometry {
  std::vector<Vec2> vertices;                  // counterclockwise polygon corners
  std::vector<std::vector<EdgePart>> parts;    // per edge i (vertex i -> i+1)
  std::vector<Vec2> breakpoints;               // extra points forced onto element boundaries

  int part_id(int edge, int local) const;      // global numbering of parts
  int num_parts() const;
  Label part_label(int id) const;
  void validate() const;                       // throws std::invalid_argument
  double diameter() const;
  double perimeter() const;
};

struct Element {
  Vec2 a, b;            // start and end point (counterclockwise)
  int edge = 0;
  int part = 0;
  Label label = Label::Neumann;
  double t0 = 0, t1 = 1;  // edge parameter interval
  int level = 0;
  int degree = 1;

  double h() const { return (b - a).norm(); }
  Vec2 tangent() const { return (b - a).normalized(); }
  Vec2 normal() const {
    Vec2 t = tangent();
    return Vec2(t.y(), -t.x());
  }
  Vec2 point(double t) const { return 0.5 * (1.0 - t) * a + 0.5 * (1.0 + t) * b; }
  Vec2 mid() const { return 0.5 * (a + b); }
};

struct ElementMap {
  Vec2 point, tangent, normal;
  double jacobian;
};

struct BoundaryMesh {
  BoundaryGeometry geometry;
  std::vector<Element> elements;  // closed chain, element i ends where i+1 starts

  int size() const { return (int)elements.size(); }
  int next(int i) const { return (i + 1) % size(); }
  int prev(int i) const { return (i + size() - 1) % size(); }
  const Element& operator[](int i) const { return elements[i]; }
  std::vector<int> elements_with(Label l) const;
  int max_degree() const;
  double perimeter() const;
  // Index of the element starting at point z (a mesh vertex), or -1.
  int vertex_at(const Vec2& z, double tol = 1e-12) const;
};

BoundaryMesh build_mesh(const BoundaryGeometry& geometry, int elements_per_edge, int degree);

ElementMap element_map(const BoundaryMesh& mesh, int id, double t);

// Bisect h_marks, raise the degree of p_marks, then restore adjacent size
// ratio <= 4 and degree gap <= 1. Degrees are capped at max_degree.
BoundaryMesh refine(const BoundaryMesh& mesh, const std::set<int>& h_marks, const std::set<int>& p_marks,
                    int max_degree = 12);

// True when fine element f lies inside coarse element c (same edge, nested
// parameter interval).
bool contains(const Element& coarse, const Element& fine);

}  // namespace hpbem
