#pragma once

#include <optional>
#include <string>
#include <vector>

#include "pipeopt/formulation.hpp"
#include "pipeopt/network.hpp"
#include "pipeopt/solver.hpp"

namespace pipeopt {

/// Nodal commodity prices from flow-balance duals plus participant surpluses.
struct NodalPriceReport {
  struct NodePrice {
    std::string node_id;
    double sigma_per_m3 = 0.0;  ///< dual of the node balance row, $/m^3
  };
  struct Participant {
    std::string node_id;
    bool is_producer = false;
    double cleared_m3h = 0.0;
    double bid_per_m3 = 0.0;
    double surplus_per_h = 0.0;  ///< (sigma-r)*s or (t-sigma)*d, $/h
    bool at_bound = false;       ///< cleared quantity within 1e-6 m^3/s of its box
  };
  std::vector<NodePrice> prices;
  std::vector<Participant> participants;
};

/// Requires result.status == LocallyOptimal; throws std::invalid_argument
/// otherwise. sigma is the balance dual converted to $/m^3 (factor 1/3600)
/// with sign such that sigma equals the bid at interior participants.
NodalPriceReport nodal_prices(const Network& net, const FormulationKind& kind,
                              const VariableLayout& layout, const SolveResult& result);

/// Which scalar parameter a sweep varies.
struct ParameterPath {
  enum class Kind { ProducerPrice, ConsumerPrice } kind;
  std::string node_id;

  static ParameterPath parse(const std::string& text);  ///< "producer:N9:price"
  std::string to_string() const;
};

struct SweepSpec {
  ParameterPath target;
  std::vector<double> values;
  FormulationKind kind;
  bool chain_warm_starts = true;
};

struct SweepRow {
  double parameter_value = 0.0;
  SolveStatus status = SolveStatus::Diverged;
  bool warm_started = false;
  std::vector<double> supply_m3h;    ///< per producer node, layout order
  std::vector<double> demand_m3h;    ///< per consumer node
  std::vector<double> sigma_per_m3;  ///< per participant node (producers then consumers)
  std::vector<double> speed_rpm;     ///< per pump
  std::vector<double> eff;           ///< per pump
  std::vector<double> flow_m3h;      ///< per pipe
  ObjectiveTerms terms;
};

struct SweepTable {
  std::vector<std::string> producer_ids, consumer_ids, pump_ids, pipe_ids;
  std::vector<SweepRow> rows;

  std::string to_csv() const;  ///< fixed documented column order, full precision
};

/// Solves the formulation at each parameter value; rows in input order.
/// Warm-starts from the previous optimal row when chaining is on, with a
/// cold-start retry when the warm solve fails. Per-row failures are recorded
/// in the row and the sweep continues.
SweepTable sweep(const Network& net, const SweepSpec& spec, const SolverOptions& options);

struct DualConsistency {
  double sigma_per_m3 = 0.0;      ///< dual-based price at the node
  double sigma_fd_per_m3 = 0.0;   ///< finite-difference price
  double relative_error = 0.0;
  bool inconclusive = false;      ///< active set changed or demand not pinned
};

/// Verifies the balance dual against a finite-difference re-solve: both
/// demand bounds at `node` are shifted by delta (forcing the increment when
/// the cleared demand is pinned), and the objective change, net of the bid
/// payment on the increment, is compared against sigma.
DualConsistency dual_consistency_check(const Network& net, const FormulationKind& kind,
                                       const std::string& node_id, double delta_m3s,
                                       const SolverOptions& options);

}  // namespace pipeopt
