#pragma once

#include <array>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "hpbem/config.hpp"
#include "hpbem/estimator.hpp"

namespace hpbem {

struct RunRecord {
  int step = 0;
  int dof_u = 0, dof_phi = 0, dof_lambda = 0;
  double eta_total = 0.0;
  std::array<double, kNumTerms> eta{};  // square roots of the summed contributions
  int newton_iters = 0;
  double merit = 0.0;
  double seconds = 0.0;
  double approx_error = std::numeric_limits<double>::quiet_NaN();
  int elements = 0;
  int max_degree = 0;
  bool converged = false;

  int dofs() const { return dof_u + dof_phi + dof_lambda; }
};

struct Snapshot {
  BoundaryMesh mesh;
  Eigen::VectorXd u, phi, lam;
};

struct RunResult {
  std::vector<RunRecord> records;
  std::vector<Snapshot> snapshots;
  std::vector<IndicatorReport> reports;
  bool failed = false;
  std::string error;
};

using StepCallback = std::function<void(const RunRecord&)>;

int total_dofs(const BoundaryMesh& mesh, const std::vector<Pin>& pins);

// solve -> estimate -> mark -> refine until max_steps or the next mesh would
// exceed max_dofs. A solver failure ends the loop; the failing step is kept
// with converged = false.
RunResult run(const RunConfig& config, const StepCallback& on_step = nullptr);

// Coarse element containing each fine element (meshes nested by refinement).
std::vector<int> parent_map(const BoundaryMesh& coarse, const BoundaryMesh& fine);
// Exact embeddings of coarse discrete functions into the fine spaces.
Eigen::VectorXd prolong_primal(const BoundaryMesh& coarse, const DiscreteSpace& Xc, const Eigen::VectorXd& u,
                               const BoundaryMesh& fine, const DiscreteSpace& Xf);
Eigen::VectorXd prolong_dual(const BoundaryMesh& coarse, const DiscreteSpace& Yc, const Eigen::VectorXd& phi,
                             const BoundaryMesh& fine, const DiscreteSpace& Yf);
Eigen::VectorXd prolong_multiplier(const BoundaryMesh& coarse, const DiscreteSpace& Lc, const Eigen::VectorXd& lam,
                                   const BoundaryMesh& fine, const DiscreteSpace& Lf);

// (|u_ref - u|_W^2 + |phi_ref - phi|_V^2 + |(h/p^2)^1/2 (lam_ref - lam)|^2)^1/2
// per snapshot, with the last snapshot as reference; W, V belong to it.
std::vector<double> approximate_errors(const std::vector<Snapshot>& snaps, const std::vector<Pin>& pins,
                                       const Eigen::MatrixXd& W_ref, const Eigen::MatrixXd& V_ref);

// Least-squares slope of log(value) against log(dofs), negated so that a
// decreasing quantity has a positive rate. Uses the last `last` points
// (all when last <= 0). Throws with fewer than 3 points.
double rate_fit(const std::vector<double>& dofs, const std::vector<double>& values, int last = 0);
double rate_fit(const std::vector<RunRecord>& records, const std::string& column, int last = 6);

// CSV with a version comment line and a fixed header.
std::vector<std::string> csv_header();
void write_csv(const std::string& path, const std::vector<RunRecord>& records);
std::string to_csv(const std::vector<RunRecord>& records);
// Column name -> values for any CSV written by this library.
std::map<std::string, std::vector<double>> read_csv(const std::string& path);
double record_value(const RunRecord& r, const std::string& column);

// Estimator sensitivity to gamma_bar on one fixed mesh.
struct GammaSweepRow {
  double gamma_bar = 0.0;
  double margin = 0.0;
  bool converged = false;
  int newton_iters = 0;
  double eta_total = std::numeric_limits<double>::quiet_NaN();
  std::array<double, kNumTerms> eta{};
};
std::vector<GammaSweepRow> sweep_gamma(const RunConfig& config, const std::vector<double>& values);
void write_sweep_csv(const std::string& path, const std::vector<GammaSweepRow>& rows);

}  // namespace hpbem
