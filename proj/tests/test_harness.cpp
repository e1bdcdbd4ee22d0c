#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "hpbem/harness.hpp"
#include "hpbem/matrix_io.hpp"
#include "test_helpers.hpp"

using namespace hpbem;
using testing_util::benchmark;

namespace {

std::string strip_seconds(const std::string& csv) {
  // drop the wall-time column, the only nondeterministic one
  std::istringstream in(csv);
  std::ostringstream out;
  std::string line;
  int col = -1;
  while (std::getline(in, line)) {
    if (line[0] == '#') {
      out << line << "\n";
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (col < 0) col = (int)(std::find(cells.begin(), cells.end(), "seconds") - cells.begin());
    cells.erase(cells.begin() + col);
    for (auto& x : cells) out << x << ",";
    out << "\n";
  }
  return out.str();
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("hpbem_test_" + name)).string();
}

}  // namespace

TEST_CASE("expression grammar") {
  const Vec2 x(0.3, -0.2);
  CHECK(Expression("1 + 2*3")(x) == 7.0);
  CHECK(Expression("2^3^2")(x) == 512.0);
  CHECK(Expression("-2^2")(x) == -4.0);
  CHECK(Expression("(1-2)*-3")(x) == 3.0);
  CHECK(Expression("x1 - 2*x2")(x) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(Expression("1 - sqrt(1 - 0.01*x1^2)")(x) == doctest::Approx(1 - std::sqrt(1 - 0.01 * 0.09)).epsilon(1e-15));
  CHECK(Expression("sign(x2) + abs(x2) + min(x1, x2) + max(x1, x2)")(x) == doctest::Approx(-1 + 0.2 - 0.2 + 0.3));
  CHECK(Expression("exp(log(2)) + sin(0) + cos(0) + pi")(x) == doctest::Approx(3 + M_PI));
  CHECK(Expression("1.5e-3")(x) == 1.5e-3);
  CHECK(Expression("4/10")(x) == 0.4);
  CHECK(Expression().empty());
  for (const char* bad : {"", "1 +", "foo(1)", "sqrt 2", "(1", "1)", "min(1)", "x3", "2 $ 3"})
    CHECK_THROWS_AS(Expression{bad}, std::invalid_argument);
}

TEST_CASE("benchmark configs carry the published data") {
  const RunConfig t = benchmark("tresca2d");
  CHECK(t.material.E == 500);
  CHECK(t.material.nu == 0.33);
  CHECK(t.law == FrictionLaw::Tresca);
  CHECK(t.gamma_bar == 1e-3);
  const ProblemData p = t.problem();
  for (double x1 : {-0.5, -0.1, 0.0, 0.37}) {
    const Vec2 x(x1, -0.5);
    CHECK(p.gap(x) == doctest::Approx(1 - std::sqrt(1 - 0.01 * x1 * x1)).epsilon(1e-15));
    CHECK(p.friction(x) == doctest::Approx(0.211 + 0.412 * x1).epsilon(1e-15));
  }
  const BoundaryMesh mesh = build_mesh(t.geometry, 4, 1);
  // nonzero tractions only on the left edge and on [-1/2,-1/4] x {1/2}
  for (int e = 0; e < mesh.size(); ++e) {
    const Element& el = mesh[e];
    const Vec2 x = el.mid();
    const Vec2 f = p.traction_at(el.part, x);
    if (el.label != Label::Neumann) continue;
    if (std::abs(x.x() + 0.5) < 1e-12)
      CHECK((f - Vec2(-(0.5 - x.y()) * (-0.5 - x.y()), 0)).norm() < 1e-15);
    else if (std::abs(x.y() - 0.5) < 1e-12 && x.x() < -0.25)
      CHECK((f - Vec2(0, 20 * (-0.5 - x.x()) * (-0.25 - x.x()))).norm() < 1e-14);
    else
      CHECK(f.norm() == 0.0);
    if (std::abs(x.y() - 0.5) < 1e-12) CHECK((x.x() < 0.25) == (el.label == Label::Neumann));
  }
  for (int e = 0; e < mesh.size(); ++e) {
    const Vec2 x = mesh[e].mid();
    if (std::abs(x.y() - 0.5) < 1e-12 && x.x() > 0.25) CHECK(mesh[e].label == Label::Dirichlet);
    if (std::abs(x.y() + 0.5) < 1e-12) CHECK(mesh[e].label == Label::Contact);
  }

  const RunConfig c = benchmark("coulomb2d");
  CHECK(c.material.E == 5);
  CHECK(c.material.nu == 0.45);
  CHECK(c.law == FrictionLaw::Coulomb);
  CHECK(c.problem().friction(Vec2(0.2, -0.5)) == 0.3);
  CHECK(c.problem().gap(Vec2(0.2, -0.5)) == 0.0);
  REQUIRE(c.pins.size() == 2);
  CHECK(c.pins[0].point == Vec2(0, -0.5));
  CHECK((c.pins[0].fix[0] && c.pins[0].fix[1]));
  CHECK(c.pins[1].point == Vec2(0, 0.5));
  CHECK((c.pins[1].fix[0] && !c.pins[1].fix[1]));
  CHECK(c.theta == 0.4);
}

TEST_CASE("config validation errors") {
  const std::string base = R"({
    "geometry": {"vertices": [[0,0],[1,0],[1,1],[0,1]],
                 "edges": [[{"label":"contact"}], [{"label":"neumann"}], [{"label":"dirichlet"}], [{"label":"neumann"}]]},
    "material": {"E": 1, "nu": 0.3}, "gap": "0", "friction": {"law": "tresca", "value": "1"})";
  CHECK_NOTHROW(parse_config(base + "}"));
  CHECK_THROWS_AS(parse_config(base), std::invalid_argument);  // truncated JSON
  CHECK_THROWS_AS(parse_config(base + R"(, "theta": 1.5})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + R"(, "delta": 0})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + R"(, "mode": "p-only"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + R"(, "gamma_bar": -1})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(base + R"(, "degree": 14})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"geometry": {}})"), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), std::invalid_argument);
  CHECK(parse_config(base + R"(, "mode": "uniform-h"})").mode == RefinementMode::UniformH);
  CHECK(parse_config(base + R"(, "mode": "hp-adaptive"})").mode == RefinementMode::HpAdaptive);
}

TEST_CASE("rate fit on synthetic data") {
  std::vector<double> dofs, inv, cst, sq;
  for (int k = 0; k < 8; ++k) {
    const double n = 50.0 * std::pow(2.0, k);
    dofs.push_back(n);
    inv.push_back(3.0 / n);
    cst.push_back(0.7);
    sq.push_back(std::pow(n, -0.5) * (k % 2 ? 1.0 : 1.0));
  }
  CHECK(rate_fit(dofs, inv) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(rate_fit(dofs, cst)) < 1e-12);
  CHECK(rate_fit(dofs, sq, 6) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS(rate_fit({1, 2}, {1, 2}));
  CHECK_THROWS(rate_fit({1, 2, 3}, {1, 2}));
  CHECK_THROWS(rate_fit({1, 2, 3}, {1, 0, 2}));

  std::vector<RunRecord> recs;
  for (int k = 0; k < 8; ++k) {
    RunRecord r;
    r.dof_u = 10 << k;
    r.dof_phi = 20 << k;
    r.dof_lambda = 2 << k;
    r.eta_total = 1.0 / r.dofs();
    r.converged = true;
    recs.push_back(r);
  }
  recs[0].eta_total = 99;  // outside the last 6
  CHECK(rate_fit(recs, "eta_total") == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("CSV header, round trip and reader") {
  const auto h = csv_header();
  const std::vector<std::string> lead = {"step", "dof_u", "dof_phi", "dof_lambda", "eta_total", "eta_N",
                                         "eta_C", "eta_V", "eta_W", "eta_K"};
  for (std::size_t i = 0; i < lead.size(); ++i) CHECK(h[i] == lead[i]);
  const auto at = [&](const std::string& s) { return std::find(h.begin(), h.end(), s) - h.begin(); };
  CHECK(at("newton_iters") == 10 + kNumTerms - 5);
  CHECK(at("merit") == at("newton_iters") + 1);
  CHECK(at("seconds") == at("merit") + 1);
  CHECK(at("approx_error") == at("seconds") + 1);

  std::vector<RunRecord> recs(3);
  for (int k = 0; k < 3; ++k) {
    auto& r = recs[k];
    r.step = k;
    r.dof_u = 10 + k;
    r.dof_phi = 20 + k;
    r.dof_lambda = 4;
    r.eta_total = 0.1 / (k + 1) + 1e-17;
    for (int i = 0; i < kNumTerms; ++i) r.eta[i] = std::sqrt(2.0) * (i + 1) / (k + 3);
    r.newton_iters = 5 + k;
    r.merit = 1e-30;
    r.seconds = 0.125;
    r.approx_error = k == 2 ? 0.0 : 1.0 / 3.0;
    r.elements = 16 << k;
    r.max_degree = 1;
    r.converged = k != 1;
  }
  recs[1].approx_error = std::numeric_limits<double>::quiet_NaN();
  const std::string path = temp_path("roundtrip.csv");
  write_csv(path, recs);
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first.rfind("# ", 0) == 0);
  const auto table = read_csv(path);
  CHECK(table.size() == h.size());
  for (int k = 0; k < 3; ++k)
    for (const auto& col : h) {
      const double want = record_value(recs[k], col);
      const double got = table.at(col)[k];
      if (std::isnan(want)) CHECK(std::isnan(got));
      else CHECK(got == want);  // %.17g round-trips exactly
    }
  std::remove(path.c_str());
  CHECK_THROWS(read_csv(temp_path("missing.csv")));
  CHECK_THROWS(record_value(recs[0], "nope"));
}

TEST_CASE("prolongation is an exact embedding") {
  auto c = benchmark("tresca2d");
  c.degree = 2;
  const BoundaryMesh coarse = build_mesh(c.geometry, 4, 2);
  std::set<int> h = {0, 1, 5, 9}, p = {2, 3, 12};
  const BoundaryMesh fine = refine(refine(coarse, h, p, 12), {0, 3, 7}, {1}, 12);
  CHECK_NOTHROW(parent_map(coarse, fine));
  CHECK_THROWS(parent_map(fine, coarse));

  const DiscreteSpace Xc = primal_space(coarse), Xf = primal_space(fine);
  const DiscreteSpace Yc = dual_space(coarse), Yf = dual_space(fine);
  const DiscreteSpace Lc = multiplier_space(coarse), Lf = multiplier_space(fine);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> U(-1, 1);
  Eigen::VectorXd u(Xc.ndofs), phi(Yc.ndofs), lam(Lc.ndofs);
  for (auto* v : {&u, &phi, &lam})
    for (int i = 0; i < v->size(); ++i) (*v)(i) = U(rng);
  const Eigen::VectorXd uf = prolong_primal(coarse, Xc, u, fine, Xf);
  const Eigen::VectorXd pf = prolong_dual(coarse, Yc, phi, fine, Yf);
  const Eigen::VectorXd lf = prolong_multiplier(coarse, Lc, lam, fine, Lf);

  const auto map = parent_map(coarse, fine);
  for (int e = 0; e < fine.size(); ++e)
    for (double t : {-0.9, -0.2, 0.4, 1.0}) {
      const Vec2 x = fine[e].point(t);
      const Element& ce = coarse[map[e]];
      const double tc = 2.0 * (x - ce.a).dot(ce.tangent()) / ce.h() - 1.0;
      CHECK((Xf.eval(uf, e, t) - Xc.eval(u, map[e], tc)).norm() < 1e-12);
      CHECK((Yf.eval(pf, e, t) - Yc.eval(phi, map[e], tc)).norm() < 1e-12);
      if (Lf.supports(e)) CHECK((Lf.eval(lf, e, t) - Lc.eval(lam, map[e], tc)).norm() < 1e-12);
    }

  // energy norms are unchanged by the embedding
  const Material m = c.material;
  const OperatorSet oc = assemble_operators(coarse, Xc, Yc, m, 1e-12);
  const OperatorSet of = assemble_operators(fine, Xf, Yf, m, 1e-12);
  CHECK(uf.dot(of.W * uf) == doctest::Approx(u.dot(oc.W * u)).epsilon(1e-10));
  CHECK(pf.dot(of.V * pf) == doctest::Approx(phi.dot(oc.V * phi)).epsilon(1e-10));
}

TEST_CASE("harness run: records, reference error, determinism") {
  auto c = benchmark("tresca2d", 2);
  c.max_steps = 4;
  std::vector<int> seen;
  RunResult a = run(c, [&](const RunRecord& r) { seen.push_back(r.step); });
  REQUIRE(!a.failed);
  REQUIRE(a.records.size() == 4);
  CHECK(seen == std::vector<int>{0, 1, 2, 3});
  CHECK(a.records.back().approx_error == 0.0);
  for (std::size_t k = 0; k + 1 < a.records.size(); ++k) {
    CHECK(a.records[k + 1].elements == 2 * a.records[k].elements);
    CHECK(a.records[k].approx_error > 0);
    if (k > 0) CHECK(a.records[k].approx_error <= 1.05 * a.records[k - 1].approx_error);
    CHECK(a.records[k + 1].eta_total < a.records[k].eta_total);
  }
  for (const auto& r : a.records) {
    double s = 0;
    for (double e : r.eta) s += e * e;
    CHECK(r.eta_total == doctest::Approx(std::sqrt(s)).epsilon(1e-13));
    CHECK(r.converged);
    CHECK(std::sqrt(r.merit) < 1e-12);
  }
  RunResult b = run(c);
  CHECK(strip_seconds(to_csv(a.records)) == strip_seconds(to_csv(b.records)));

  // the DOF budget stops the loop before an oversized mesh is solved
  c.max_dofs = a.records[1].dofs();
  RunResult capped = run(c);
  CHECK(capped.records.size() == 2);

  // error of the reference against itself, and of its exact copy
  const Snapshot& last = a.snapshots.back();
  const auto errs = approximate_errors({last, last}, c.pins,
                                       assemble_W(a.snapshots.back().mesh, primal_space(a.snapshots.back().mesh),
                                                  c.material, 1e-10),
                                       assemble_V(a.snapshots.back().mesh, dual_space(a.snapshots.back().mesh),
                                                  c.material, 1e-10));
  REQUIRE(errs.size() == 2);
  CHECK(errs[0] < 1e-12);
  CHECK(errs[1] == 0.0);
}

TEST_CASE("harness run: adaptive modes refine locally, solver failure keeps the prefix") {
  auto c = benchmark("tresca2d");
  c.mode = RefinementMode::HAdaptive;
  c.max_steps = 5;
  RunResult h = run(c);
  REQUIRE(h.records.size() == 5);
  for (std::size_t k = 1; k < h.records.size(); ++k) {
    CHECK(h.records[k].elements > h.records[k - 1].elements);
    CHECK(h.records[k].elements < 2 * h.records[k - 1].elements);
  }
  c.mode = RefinementMode::HpAdaptive;
  c.theta = 0.33;
  c.max_steps = 8;
  RunResult hp = run(c);
  REQUIRE(!hp.failed);
  CHECK(hp.records.back().max_degree > 1);

  c.gamma_bar = 10.0;
  RunResult bad = run(c);
  CHECK(bad.failed);
  CHECK(!bad.error.empty());
  if (!bad.records.empty()) CHECK(!bad.records.back().converged);
}

TEST_CASE("zero-force custom config solves to zero") {
  auto c = parse_config(R"({
    "geometry": {"vertices": [[0,0],[1.5,0],[1.5,0.5],[0,0.5]],
                 "edges": [[{"label":"contact"}], [{"label":"neumann"}], [{"label":"dirichlet"}], [{"label":"neumann"}]]},
    "material": {"E": 10, "nu": 0.2}, "gap": "0.1", "friction": {"law": "tresca", "value": "0.5"},
    "max_steps": 2})");
  RunResult r = run(c);
  REQUIRE(r.records.size() == 2);
  for (const auto& rec : r.records) {
    CHECK(rec.eta_total == 0.0);
    CHECK(rec.newton_iters <= 1);
  }
  CHECK(r.snapshots[0].u.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gamma sweep on one mesh") {
  auto c = benchmark("tresca2d");
  const auto rows = sweep_gamma(c, {1e-6, 1e-3, 10.0});
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].converged);
  CHECK(rows[1].converged);
  CHECK(rows[0].margin >= rows[1].margin);
  CHECK(rows[2].margin < 0);
  CHECK(rows[1].eta_total == doctest::Approx(run([&] {
                                                 auto cc = c;
                                                 cc.max_steps = 1;
                                                 return cc;
                                               }()).records[0].eta_total).epsilon(1e-12));
  const std::string path = temp_path("sweep.csv");
  write_sweep_csv(path, rows);
  const auto t = read_csv(path);
  CHECK(t.at("gamma_bar") == std::vector<double>{1e-6, 1e-3, 10.0});
  std::remove(path.c_str());
}

TEST_CASE("binary matrix dump round trip") {
  Eigen::MatrixXd A(3, 2);
  A << 1, -2.5, 1e-300, 4, std::nextafter(1.0, 2.0), -0.0;
  const std::string path = temp_path("m.bin");
  write_matrix(path, A);
  CHECK(std::filesystem::file_size(path) == 12 + 6 * 8);
  const Eigen::MatrixXd B = read_matrix(path);
  CHECK(B.rows() == 3);
  CHECK(B.cols() == 2);
  CHECK((A.array() == B.array()).all());
  {
    std::ofstream out(path, std::ios::binary);
    out << "junk";
  }
  CHECK_THROWS(read_matrix(path));
  std::remove(path.c_str());
}
