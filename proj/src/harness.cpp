#include "hpbem/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hpbem {

namespace {

constexpr const char* kCsvVersion = "# hpbem-run-csv v1";

double ref_coord(const Element& el, const Vec2& x) { return 2.0 * (x - el.a).dot(el.tangent()) / el.h() - 1.0; }

RunRecord make_record(int step, const Discretization& d, const SolverState& st) {
  RunRecord r;
  r.step = step;
  r.dof_u = d.nu();
  r.dof_phi = d.nphi();
  r.dof_lambda = d.nlam();
  r.newton_iters = st.iterations;
  r.merit = st.merit;
  r.elements = d.mesh.size();
  r.max_degree = d.mesh.max_degree();
  r.converged = st.converged;
  return r;
}

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

int total_dofs(const BoundaryMesh& mesh, const std::vector<Pin>& pins) {
  return primal_space(mesh, pins).ndofs + dual_space(mesh).ndofs + multiplier_space(mesh).ndofs;
}

RunResult run(const RunConfig& cfg, const StepCallback& on_step) {
  cfg.validate();
  const ProblemData problem = cfg.problem();
  DiscretizationOptions dopt;
  dopt.gamma_bar = cfg.gamma_bar;
  dopt.tol = cfg.quadrature_tol;
  dopt.z_extra = cfg.z_extra;
  EstimatorOptions eopt;
  eopt.benchmark_weighting = cfg.benchmark_weighting;
  eopt.extra_degree = cfg.estimator_extra_degree;

  RunResult res;
  BoundaryMesh mesh = build_mesh(cfg.geometry, cfg.elements_per_edge, cfg.degree);
  Eigen::MatrixXd W_last, V_last;
  for (int step = 0; step < cfg.max_steps; ++step) {
    const auto t0 = std::chrono::steady_clock::now();
    RunRecord rec;
    try {
      Discretization d = discretize(mesh, problem, dopt);
      BilinearSystem sys = assemble_system(d, problem);
      SolverState st = solve(sys, cfg.newton);
      rec = make_record(step, d, st);
      if (!st.converged) {
        res.failed = true;
        res.error = "solver did not converge at step " + std::to_string(step);
      } else {
        IndicatorReport rep = compute_indicators(d, problem, st, eopt);
        rec.eta_total = rep.total();
        for (int i = 0; i < kNumTerms; ++i) rec.eta[i] = std::sqrt(std::max(0.0, rep.sum[i]));
        res.snapshots.push_back({mesh, st.u, st.phi, st.lam});
        W_last = d.ops.W;
        V_last = d.ops.V;
        res.reports.push_back(std::move(rep));
      }
    } catch (const std::exception& e) {
      res.failed = true;
      res.error = "step " + std::to_string(step) + ": " + e.what();
      break;
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.records.push_back(rec);
    if (on_step) on_step(rec);
    if (res.failed || step + 1 == cfg.max_steps) break;

    const IndicatorReport& rep = res.reports.back();
    std::set<int> h, p;
    if (cfg.mode == RefinementMode::UniformH) {
      for (int e = 0; e < mesh.size(); ++e) h.insert(e);
    } else {
      std::vector<int> marked = dorfler_mark(rep.element, cfg.theta);
      if (marked.empty()) break;
      if (cfg.mode == RefinementMode::HAdaptive) {
        h.insert(marked.begin(), marked.end());
      } else {
        const Snapshot& s = res.snapshots.back();
        HpMarks hp = hp_decide(mesh, primal_space(mesh, cfg.pins), s.u, marked, cfg.delta);
        // degree cap reached: bisect instead
        for (int e : hp.p)
          if (mesh[e].degree >= cfg.max_degree) hp.h.insert(e);
        for (int e : hp.h) hp.p.erase(e);
        h = hp.h;
        p = hp.p;
      }
    }
    BoundaryMesh next = refine(mesh, h, p, cfg.max_degree);
    if (total_dofs(next, cfg.pins) > cfg.max_dofs) break;
    mesh = std::move(next);
  }
  if (cfg.approximate_error && res.snapshots.size() >= 2) {
    std::vector<double> err = approximate_errors(res.snapshots, cfg.pins, W_last, V_last);
    std::size_t k = 0;
    for (auto& r : res.records)
      if (r.converged) r.approx_error = err[k++];
  }
  return res;
}

std::vector<int> parent_map(const BoundaryMesh& coarse, const BoundaryMesh& fine) {
  std::vector<int> map(fine.size(), -1);
  int hint = 0;
  for (int f = 0; f < fine.size(); ++f) {
    for (int k = 0; k < coarse.size(); ++k) {
      int c = (hint + k) % coarse.size();
      if (contains(coarse[c], fine[f])) {
        map[f] = c;
        hint = c;
        break;
      }
    }
    if (map[f] < 0) throw std::invalid_argument("meshes are not nested");
  }
  return map;
}

Eigen::VectorXd prolong_primal(const BoundaryMesh& coarse, const DiscreteSpace& Xc, const Eigen::VectorXd& u,
                               const BoundaryMesh& fine, const DiscreteSpace& Xf) {
  const std::vector<int> map = parent_map(coarse, fine);
  // Vertex values plus the H^1-seminorm projection of the bubbles; exact
  // for a coarse polynomial restricted to a nested fine element.
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Xf.ndofs);
  double v[64], dv[64];
  const int nq = fine.max_degree() + 2;
  const auto& rule = cached_gauss_legendre(nq);
  for (int e : Xf.elements) {
    const Element& el = fine[e];
    const int c = map[e];
    auto uc = [&](const Vec2& x) { return Xc.eval(u, c, std::clamp(ref_coord(coarse[c], x), -1.0, 1.0)); };
    const Vec2 fa = uc(el.a), fb = uc(el.b);
    for (const auto& le : Xf.local[e]) {
      if (le.f == 0) out(le.dof) = le.dir.dot(fa);
      else if (le.f == 1) out(le.dof) = le.dir.dot(fb);
    }
    if (el.degree < 2) continue;
    // Bubble coefficients from the orthonormal derivatives, as in interpolate_primal.
    std::vector<Vec2> ck(el.degree + 1, Vec2::Zero());
    for (int q = 0; q < nq; ++q) {
      const double t = rule.nodes[q];
      const Vec2 val = uc(el.point(t));
      legendre(el.degree, t, v, dv);
      for (int k = 2; k <= el.degree; ++k) ck[k] -= rule.weights[q] * dv[k - 1] * val;
    }
    for (int k = 2; k <= el.degree; ++k) {
      const double sgn = ((k - 1) % 2) ? -1.0 : 1.0;
      ck[k] = std::sqrt((2.0 * k - 1.0) / 2.0) * (ck[k] + fb - sgn * fa);
    }
    for (const auto& le : Xf.local[e])
      if (le.f >= 2) out(le.dof) = le.dir.dot(ck[le.f]);
  }
  return out;
}

Eigen::VectorXd prolong_dual(const BoundaryMesh& coarse, const DiscreteSpace& Yc, const Eigen::VectorXd& phi,
                             const BoundaryMesh& fine, const DiscreteSpace& Yf) {
  const std::vector<int> map = parent_map(coarse, fine);
  return project_legendre(
      fine, Yf,
      [&](int e, const Vec2& x) {
        const int c = map[e];
        return Yc.eval(phi, c, std::clamp(ref_coord(coarse[c], x), -1.0, 1.0));
      },
      fine.max_degree() + 2);
}

Eigen::VectorXd prolong_multiplier(const BoundaryMesh& coarse, const DiscreteSpace& Lc, const Eigen::VectorXd& lam,
                                   const BoundaryMesh& fine, const DiscreteSpace& Lf) {
  const std::vector<int> map = parent_map(coarse, fine);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(Lf.ndofs);
  for (const auto& n : constraint_nodes(fine, Lf)) {
    const int c = map[n.element];
    const Vec2 v = Lc.eval(lam, c, ref_coord(coarse[c], n.x));
    out(n.dof_n) = v.dot(n.normal);
    out(n.dof_t) = v.dot(n.tangent);
  }
  return out;
}

std::vector<double> approximate_errors(const std::vector<Snapshot>& snaps, const std::vector<Pin>& pins,
                                       const Eigen::MatrixXd& W_ref, const Eigen::MatrixXd& V_ref) {
  std::vector<double> out;
  if (snaps.empty()) return out;
  const Snapshot& ref = snaps.back();
  const BoundaryMesh& fm = ref.mesh;
  const DiscreteSpace Xf = primal_space(fm, pins), Yf = dual_space(fm), Lf = multiplier_space(fm);
  if (W_ref.rows() != Xf.ndofs || V_ref.rows() != Yf.ndofs)
    throw std::invalid_argument("approximate_errors: reference matrices do not match the reference mesh");
  for (const Snapshot& s : snaps) {
    if (&s == &ref) {
      out.push_back(0.0);
      continue;
    }
    const DiscreteSpace Xc = primal_space(s.mesh, pins), Yc = dual_space(s.mesh), Lc = multiplier_space(s.mesh);
    const Eigen::VectorXd eu = ref.u - prolong_primal(s.mesh, Xc, s.u, fm, Xf);
    const Eigen::VectorXd ep = ref.phi - prolong_dual(s.mesh, Yc, s.phi, fm, Yf);
    double e2 = eu.dot(W_ref * eu) + ep.dot(V_ref * ep);
    // multiplier term weighted with the coarse h/p^2
    const std::vector<int> map = parent_map(s.mesh, fm);
    for (int e : Lf.elements) {
      const Element& el = fm[e];
      const Element& ce = s.mesh[map[e]];
      const double w = ce.h() / (double(ce.degree) * ce.degree);
      const int nq = el.degree + 3;
      const auto& rule = cached_gauss_legendre(nq);
      for (int q = 0; q < nq; ++q) {
        const double t = rule.nodes[q];
        const Vec2 d = Lf.eval(ref.lam, e, t) - Lc.eval(s.lam, map[e], ref_coord(ce, el.point(t)));
        e2 += w * rule.weights[q] * 0.5 * el.h() * d.squaredNorm();
      }
    }
    out.push_back(std::sqrt(std::max(0.0, e2)));
  }
  return out;
}

double rate_fit(const std::vector<double>& dofs, const std::vector<double>& values, int last) {
  if (dofs.size() != values.size()) throw std::invalid_argument("rate_fit: size mismatch");
  const int n = (int)dofs.size();
  const int start = last > 0 ? std::max(0, n - last) : 0;
  const int m = n - start;
  if (m < 3) throw std::invalid_argument("rate_fit needs at least 3 points");
  double xm = 0, ym = 0;
  for (int i = start; i < n; ++i) {
    if (!(dofs[i] > 0) || !(values[i] > 0)) throw std::invalid_argument("rate_fit needs positive data");
    xm += std::log(dofs[i]);
    ym += std::log(values[i]);
  }
  xm /= m;
  ym /= m;
  double sxy = 0, sxx = 0;
  for (int i = start; i < n; ++i) {
    const double dx = std::log(dofs[i]) - xm;
    sxy += dx * (std::log(values[i]) - ym);
    sxx += dx * dx;
  }
  if (sxx == 0) throw std::invalid_argument("rate_fit: all dof counts are equal");
  return -sxy / sxx;
}

double rate_fit(const std::vector<RunRecord>& records, const std::string& column, int last) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    const double v = record_value(r, column);
    if (!r.converged || std::isnan(v)) continue;
    x.push_back(r.dofs());
    y.push_back(v);
  }
  return rate_fit(x, y, last);
}

std::vector<std::string> csv_header() {
  std::vector<std::string> h = {"step", "dof_u", "dof_phi", "dof_lambda", "eta_total"};
  for (int i = 0; i < kNumTerms; ++i) h.push_back(std::string("eta_") + term_name((Term)i));
  for (const char* s : {"newton_iters", "merit", "seconds", "approx_error", "elements", "max_degree", "converged"})
    h.push_back(s);
  return h;
}

double record_value(const RunRecord& r, const std::string& c) {
  if (c == "step") return r.step;
  if (c == "dof_u") return r.dof_u;
  if (c == "dof_phi") return r.dof_phi;
  if (c == "dof_lambda") return r.dof_lambda;
  if (c == "dofs") return r.dofs();
  if (c == "eta_total") return r.eta_total;
  for (int i = 0; i < kNumTerms; ++i)
    if (c == std::string("eta_") + term_name((Term)i)) return r.eta[i];
  if (c == "newton_iters") return r.newton_iters;
  if (c == "merit") return r.merit;
  if (c == "seconds") return r.seconds;
  if (c == "approx_error") return r.approx_error;
  if (c == "elements") return r.elements;
  if (c == "max_degree") return r.max_degree;
  if (c == "converged") return r.converged ? 1.0 : 0.0;
  throw std::invalid_argument("unknown column '" + c + "'");
}

std::string to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream os;
  os << kCsvVersion << "\n";
  const auto h = csv_header();
  for (std::size_t i = 0; i < h.size(); ++i) os << (i ? "," : "") << h[i];
  os << "\n";
  for (const auto& r : records) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (i) os << ",";
      if (h[i] == "seconds" || h[i] == "merit" || h[i].rfind("eta", 0) == 0 || h[i] == "approx_error")
        os << fmt(record_value(r, h[i]));
      else
        os << (long long)record_value(r, h[i]);
    }
    os << "\n";
  }
  return os.str();
}

void write_csv(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << to_csv(records);
}

std::map<std::string, std::vector<double>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::string line;
  std::vector<std::string> cols;
  std::map<std::string, std::vector<double>> table;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cols.empty()) {
      cols = cells;
      for (const auto& c : cols) table[c];
      continue;
    }
    if (cells.size() != cols.size()) throw std::invalid_argument("ragged CSV row in '" + path + "'");
    for (std::size_t i = 0; i < cells.size(); ++i)
      table[cols[i]].push_back(cells[i] == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cells[i]));
  }
  if (cols.empty()) throw std::invalid_argument("empty CSV '" + path + "'");
  return table;
}

std::vector<GammaSweepRow> sweep_gamma(const RunConfig& cfg, const std::vector<double>& values) {
  cfg.validate();
  const ProblemData problem = cfg.problem();
  const BoundaryMesh mesh = build_mesh(cfg.geometry, cfg.elements_per_edge, cfg.degree);
  DiscretizationOptions dopt;
  dopt.gamma_bar = values.empty() ? cfg.gamma_bar : values.front();
  dopt.tol = cfg.quadrature_tol;
  dopt.z_extra = cfg.z_extra;
  Discretization d = discretize(mesh, problem, dopt);
  EstimatorOptions eopt;
  eopt.benchmark_weighting = cfg.benchmark_weighting;
  eopt.extra_degree = cfg.estimator_extra_degree;
  std::vector<GammaSweepRow> rows;
  for (double g : values) {
    GammaSweepRow row;
    row.gamma_bar = g;
    set_gamma(d, g);
    row.margin = coercivity_margin(d.ops, d.stab);
    try {
      SolverState st = solve(assemble_system(d, problem), cfg.newton);
      row.converged = st.converged;
      row.newton_iters = st.iterations;
      if (st.converged) {
        IndicatorReport rep = compute_indicators(d, problem, st, eopt);
        row.eta_total = rep.total();
        for (int i = 0; i < kNumTerms; ++i) row.eta[i] = std::sqrt(std::max(0.0, rep.sum[i]));
      }
    } catch (const std::exception&) {
      row.converged = false;
    }
    rows.push_back(row);
  }
  return rows;
}

void write_sweep_csv(const std::string& path, const std::vector<GammaSweepRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "# hpbem-gamma-sweep-csv v1\n";
  out << "gamma_bar,margin,converged,newton_iters,eta_total";
  for (int i = 0; i < kNumTerms; ++i) out << ",eta_" << term_name((Term)i);
  out << "\n";
  for (const auto& r : rows) {
    out << fmt(r.gamma_bar) << "," << fmt(r.margin) << "," << (r.converged ? 1 : 0) << "," << r.newton_iters << ","
        << fmt(r.eta_total);
    for (int i = 0; i < kNumTerms; ++i) out << "," << (r.converged ? fmt(r.eta[i]) : "nan");
    out << "\n";
  }
}

}  // namespace hpbem
