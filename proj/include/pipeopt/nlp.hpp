#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace pipeopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class ObjectiveSense { Minimize, Maximize };

/// Fixed sparsity pattern as parallel (row, col) arrays.
struct SparsityPattern {
  std::vector<int> rows;
  std::vector<int> cols;
  int nnz() const { return static_cast<int>(rows.size()); }
};

/// Standard-form smooth NLP:
///   extremize f(x)  s.t.  g_lower <= g(x) <= g_upper,  x_lower <= x <= x_upper.
/// Equality rows are encoded by g_lower == g_upper. Callbacks are pure in x
/// and sparsity patterns are constant across all x.
struct NlpProblem {
  int n = 0;    ///< variable count
  int m = 0;    ///< constraint row count
  ObjectiveSense sense = ObjectiveSense::Minimize;

  Eigen::VectorXd x_lower, x_upper;  ///< size n, +-inf allowed
  Eigen::VectorXd g_lower, g_upper;  ///< size m
  Eigen::VectorXd x_initial;         ///< size n

  std::function<double(const Eigen::VectorXd&)> eval_f;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> eval_grad_f;
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> eval_g;

  SparsityPattern jac_pattern;
  /// Values aligned with jac_pattern.
  std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> eval_jac;

  /// Lower-triangle pattern of the Lagrangian Hessian
  /// sigma_f * grad^2 f + sum_k lambda_k * grad^2 g_k (objective in its
  /// declared sense; the solver flips sigma_f when it internally minimizes).
  SparsityPattern hess_pattern;
  std::function<void(const Eigen::VectorXd&, double /*sigma_f*/,
                     const Eigen::VectorXd& /*lambda*/, Eigen::VectorXd&)> eval_hess;

  /// Optional per-variable / per-row names for reporting.
  std::vector<std::string> var_names;
  std::vector<std::string> row_names;

  bool row_is_equality(int k) const { return g_lower[k] == g_upper[k]; }
};

}  // namespace pipeopt
