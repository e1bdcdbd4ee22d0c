#pragma once

#include <array>
#include <string>
#include <vector>

#include "hpbem/expression.hpp"
#include "hpbem/solver.hpp"

namespace hpbem {

enum class RefinementMode { UniformH, HAdaptive, HpAdaptive };
std::string to_string(RefinementMode m);
RefinementMode mode_from_string(const std::string& s);  // "uniform" | "h-adaptive" | "hp-adaptive"

struct RunConfig {
  std::string name;
  BoundaryGeometry geometry;
  Material material;
  Expression gap, friction;
  FrictionLaw law = FrictionLaw::Tresca;
  std::vector<std::array<Expression, 2>> traction;  // per part id; empty expressions mean zero
  std::vector<Pin> pins;

  double gamma_bar = 1e-3;
  RefinementMode mode = RefinementMode::UniformH;
  double theta = 0.3;
  double delta = 0.5;
  int elements_per_edge = 4;
  int degree = 1;
  int max_steps = 8;
  int max_dofs = 4000;  // total u + phi + lambda dofs of the last solved step
  int max_degree = 12;
  bool benchmark_weighting = true;
  bool approximate_error = true;
  double quadrature_tol = 1e-10;
  int z_extra = 0;
  int estimator_extra_degree = 4;
  NewtonOptions newton;
  std::string output = "out";

  ProblemData problem() const;
  void validate() const;  // throws std::invalid_argument
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace hpbem
