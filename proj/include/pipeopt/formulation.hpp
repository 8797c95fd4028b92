#pragma once

#include <map>
#include <string>
#include <vector>

#include "pipeopt/network.hpp"
#include "pipeopt/nlp.hpp"

namespace pipeopt {

/// Fixed injection/withdrawal pair for one node (m^3/s), used by the
/// minimum-cost formulation where the allocation is not optimized.
struct FixedAllocation {
  double supply_m3s = 0.0;
  double demand_m3s = 0.0;
};

enum class Formulation {
  MinOperatingCost,   ///< F1: min J_O, allocation fixed
  MaxTransportValue,  ///< F2: max J_E
  MaxTotalValue,      ///< F3: max J_P = J_E - J_O
};

struct FormulationKind {
  Formulation which = Formulation::MaxTotalValue;
  /// Required for MinOperatingCost; keyed by node id. Nodes absent from the
  /// map carry zero supply and demand. Total supply must equal total demand.
  std::map<std::string, FixedAllocation> fixed_allocation;
};

/// Contiguous, deterministic variable index ranges for one (Network, kind).
struct VariableLayout {
  struct Range {
    int offset = 0;
    int count = 0;
    int at(int i) const { return offset + i; }
  };
  Range q_pipe;    ///< one per pipe, declaration order
  Range q_pump;    ///< one per pump
  Range head;      ///< one per node
  Range speed;     ///< one per pump (rpm)
  Range eff;       ///< one per pump
  Range supply;    ///< one per producer-bid node (F2/F3 only)
  Range demand;    ///< one per consumer-bid node (F2/F3 only)
  int n = 0;

  std::vector<int> producer_nodes;  ///< node indices owning supply vars
  std::vector<int> consumer_nodes;  ///< node indices owning demand vars

  int supply_var_for_node(int node_index) const;  ///< -1 when absent
  int demand_var_for_node(int node_index) const;
};

/// Row indices of the assembled constraint system.
struct ConstraintLayout {
  VariableLayout::Range pipe_rows;       ///< Bernoulli equality per pipe
  VariableLayout::Range balance_rows;    ///< flow-balance equality per node
  VariableLayout::Range pump_head_rows;  ///< head-gain equality per pump
  VariableLayout::Range pump_eff_rows;   ///< efficiency equality per pump
  VariableLayout::Range pump_range_rows; ///< ranged head-difference per pump
  int m = 0;
};

/// $/h decomposition of a solution point.
struct ObjectiveTerms {
  double transport_value = 0.0;  ///< J_E
  double operating_cost = 0.0;   ///< J_O
  double total_value = 0.0;      ///< J_P = J_E - J_O
};

VariableLayout build_layout(const Network& net, const FormulationKind& kind);
ConstraintLayout build_constraint_layout(const Network& net);

/// Assembles the standard-form NLP with analytic sparse first and second
/// derivatives. Throws std::invalid_argument on invalid networks, unbalanced
/// fixed allocations, or empty boxes (lower > upper).
NlpProblem build_nlp(const Network& net, const FormulationKind& kind);

ObjectiveTerms objective_terms(const Network& net, const FormulationKind& kind,
                               const VariableLayout& layout, const Eigen::VectorXd& x);

/// Finite-difference audit of the analytic callbacks.
struct DerivativeReport {
  double max_rel_err_grad = 0.0;
  double max_rel_err_jac = 0.0;
  double max_rel_err_hess = 0.0;  ///< Hessian-vector products
};

DerivativeReport check_derivatives(const NlpProblem& problem, const Eigen::VectorXd& x,
                                   double step = 1e-6);

}  // namespace pipeopt
