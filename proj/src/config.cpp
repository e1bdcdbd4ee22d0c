#include "hpbem/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace hpbem {

using json = nlohmann::json;

std::string to_string(RefinementMode m) {
  switch (m) {
    case RefinementMode::UniformH: return "uniform";
    case RefinementMode::HAdaptive: return "h-adaptive";
    case RefinementMode::HpAdaptive: return "hp-adaptive";
  }
  return "?";
}

RefinementMode mode_from_string(const std::string& s) {
  if (s == "uniform" || s == "uniform-h") return RefinementMode::UniformH;
  if (s == "h-adaptive") return RefinementMode::HAdaptive;
  if (s == "hp-adaptive") return RefinementMode::HpAdaptive;
  throw std::invalid_argument("unknown refinement mode '" + s + "'");
}

ProblemData RunConfig::problem() const {
  ProblemData p;
  p.material = material;
  p.law = law;
  p.gap = [g = gap](const Vec2& x) { return g(x); };
  p.friction = [f = friction](const Vec2& x) { return f(x); };
  p.traction.resize(traction.size());
  for (std::size_t i = 0; i < traction.size(); ++i) {
    const auto& t = traction[i];
    if (t[0].empty() && t[1].empty()) continue;
    p.traction[i] = [t](const Vec2& x) { return Vec2(t[0].empty() ? 0.0 : t[0](x), t[1].empty() ? 0.0 : t[1](x)); };
  }
  p.pins = pins;
  return p;
}

void RunConfig::validate() const {
  geometry.validate();
  material.validate();
  if (gap.empty() || friction.empty()) throw std::invalid_argument("config needs gap and friction expressions");
  if (!(gamma_bar >= 0)) throw std::invalid_argument("gamma_bar must be >= 0");
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("theta must lie in (0,1)");
  if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
  if (elements_per_edge < 1 || degree < 1) throw std::invalid_argument("initial mesh needs >= 1 element per edge and degree >= 1");
  if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
  if (degree > max_degree) throw std::invalid_argument("initial degree exceeds max_degree");
  if ((int)traction.size() != geometry.num_parts()) throw std::invalid_argument("traction table does not match parts");
  if (newton.r <= 0) throw std::invalid_argument("newton r must be positive");
}

namespace {

template <class T>
T get_or(const json& j, const char* key, T def) {
  return j.contains(key) ? j.at(key).get<T>() : def;
}

Vec2 point(const json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("points are [x1, x2] arrays");
  return Vec2(j[0].get<double>(), j[1].get<double>());
}

Expression expr(const json& j) {
  if (j.is_number()) return Expression(j.dump());
  return Expression(j.get<std::string>());
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    c.name = get_or<std::string>(j, "name", "custom");
    const json& g = j.at("geometry");
    for (const auto& v : g.at("vertices")) c.geometry.vertices.push_back(point(v));
    const json& edges = g.at("edges");
    if (edges.size() != c.geometry.vertices.size())
      throw std::invalid_argument("geometry needs one entry in 'edges' per vertex");
    for (const auto& edge : edges) {
      std::vector<EdgePart> parts;
      for (const auto& part : edge) {
        EdgePart ep;
        ep.until = get_or<double>(part, "until", 1.0);
        ep.label = label_from_string(part.at("label").get<std::string>());
        parts.push_back(ep);
        std::array<Expression, 2> t;
        if (part.contains("traction")) {
          const json& tj = part.at("traction");
          if (!tj.is_array() || tj.size() != 2) throw std::invalid_argument("traction is a pair of expressions");
          t = {expr(tj[0]), expr(tj[1])};
        }
        c.traction.push_back(t);
      }
      c.geometry.parts.push_back(parts);
    }
    if (g.contains("breakpoints"))
      for (const auto& p : g.at("breakpoints")) c.geometry.breakpoints.push_back(point(p));

    const json& m = j.at("material");
    c.material.E = m.at("E").get<double>();
    c.material.nu = m.at("nu").get<double>();
    const std::string conv = get_or<std::string>(m, "lame_convention", "plane_stress");
    if (conv == "plane_stress") c.material.convention = LameConvention::PlaneStress;
    else if (conv == "printed") c.material.convention = LameConvention::Printed;
    else throw std::invalid_argument("lame_convention is 'plane_stress' or 'printed'");

    c.gap = expr(j.at("gap"));
    const json& f = j.at("friction");
    const std::string law = f.at("law").get<std::string>();
    if (law == "tresca") c.law = FrictionLaw::Tresca;
    else if (law == "coulomb") c.law = FrictionLaw::Coulomb;
    else throw std::invalid_argument("friction law is 'tresca' or 'coulomb'");
    c.friction = expr(f.at("value"));

    if (j.contains("pins"))
      for (const auto& p : j.at("pins")) {
        Pin pin;
        pin.point = point(p.at("point"));
        if (p.contains("fix")) {
          pin.fix[0] = p.at("fix").at(0).get<bool>();
          pin.fix[1] = p.at("fix").at(1).get<bool>();
        }
        c.pins.push_back(pin);
      }

    c.gamma_bar = get_or<double>(j, "gamma_bar", c.gamma_bar);
    if (j.contains("mode")) c.mode = mode_from_string(j.at("mode").get<std::string>());
    c.theta = get_or<double>(j, "theta", c.theta);
    c.delta = get_or<double>(j, "delta", c.delta);
    c.elements_per_edge = get_or<int>(j, "elements_per_edge", c.elements_per_edge);
    c.degree = get_or<int>(j, "degree", c.degree);
    c.max_steps = get_or<int>(j, "max_steps", c.max_steps);
    c.max_dofs = get_or<int>(j, "max_dofs", c.max_dofs);
    c.max_degree = get_or<int>(j, "max_degree", c.max_degree);
    c.benchmark_weighting = get_or<bool>(j, "benchmark_weighting", c.benchmark_weighting);
    c.approximate_error = get_or<bool>(j, "approximate_error", c.approximate_error);
    c.quadrature_tol = get_or<double>(j, "quadrature_tol", c.quadrature_tol);
    c.z_extra = get_or<int>(j, "z_extra", c.z_extra);
    c.estimator_extra_degree = get_or<int>(j, "estimator_extra_degree", c.estimator_extra_degree);
    if (j.contains("newton")) {
      const json& n = j.at("newton");
      c.newton.r = get_or<double>(n, "r", c.newton.r);
      c.newton.tol = get_or<double>(n, "tol", c.newton.tol);
      c.newton.max_iter = get_or<int>(n, "max_iter", c.newton.max_iter);
    }
    c.output = get_or<std::string>(j, "output", c.output);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace hpbem
