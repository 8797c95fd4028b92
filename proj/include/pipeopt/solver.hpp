#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "pipeopt/nlp.hpp"

namespace pipeopt {

struct SolverOptions {
  double tol = 1e-8;            ///< scaled KKT tolerance
  int max_iter = 3000;
  double mu_initial = 0.1;      ///< initial barrier parameter
  double tau = 0.995;           ///< fraction-to-boundary
  double reg_floor = 1e-8;      ///< inertia-correction floor for delta_w
  bool deterministic = true;    ///< reserved; the reference solver is always sequential
  std::ostream* iter_log = nullptr;  ///< one line per iteration when set
};

enum class SolveStatus { LocallyOptimal, MaxIterations, Infeasible, Diverged };

const char* to_string(SolveStatus status);

struct KktResiduals {
  double stationarity = 0.0;
  double feasibility = 0.0;
  double complementarity = 0.0;
};

/// Warm-start data: a previous solution of a structurally identical problem.
struct WarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd lambda;   ///< row duals, report convention
  Eigen::VectorXd z_lower;  ///< bound duals (>= 0)
  Eigen::VectorXd z_upper;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Diverged;
  Eigen::VectorXd x;
  /// Row duals in the report convention: lambda_k = d(objective, in its
  /// declared sense)/d(row k right-hand side) at the optimum.
  Eigen::VectorXd lambda;
  Eigen::VectorXd z_lower;  ///< bound duals, >= 0
  Eigen::VectorXd z_upper;
  double objective = 0.0;   ///< in the declared sense
  int iterations = 0;
  KktResiduals kkt;         ///< scaled residual norms at termination
  double wall_time_s = 0.0;
  std::string acceptance_scheme = "l1-merit";

  /// Internal slack values for ranged rows, kept for audits and warm starts.
  Eigen::VectorXd slack;
};

/// Pluggable solver interface; the in-tree interior-point method is the
/// reference implementation.
class NlpSolver {
 public:
  virtual ~NlpSolver() = default;
  virtual SolveResult solve(const NlpProblem& problem, const SolverOptions& options,
                            const std::optional<WarmStart>& warm = std::nullopt) = 0;
};

/// Primal-dual interior-point method: slacks for ranged rows, log barrier on
/// bounds, Newton steps on the perturbed KKT system with inertia-corrected
/// sparse LDL^T, fraction-to-boundary clipping and an l1-merit line search.
class InteriorPointSolver final : public NlpSolver {
 public:
  SolveResult solve(const NlpProblem& problem, const SolverOptions& options,
                    const std::optional<WarmStart>& warm = std::nullopt) override;
};

std::unique_ptr<NlpSolver> make_default_solver();

/// Recomputes stationarity / feasibility / complementarity norms from the
/// result on a code path independent of the solve loop, for audit. Norms are
/// reported in the convergence-test convention: the objective is normalized
/// so its gradient has infinity norm at most 100, and stationarity and
/// complementarity are further divided by the average multiplier magnitude
/// when that exceeds 100. Feasibility is in original units.
KktResiduals kkt_residuals(const NlpProblem& problem, const SolveResult& result);

}  // namespace pipeopt
