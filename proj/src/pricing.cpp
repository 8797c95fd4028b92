#include "pipeopt/pricing.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "pipeopt/units.hpp"

namespace pipeopt {

namespace {

constexpr double kBoundTol = 1e-6;  // m^3/s

double balance_sigma(const Network& net, const FormulationKind& kind,
                     const SolveResult& result, int node_index) {
  const ConstraintLayout cl = build_constraint_layout(net);
  const double sign = kind.which == Formulation::MinOperatingCost ? 1.0 : -1.0;
  return sign * result.lambda[cl.balance_rows.at(node_index)] / units::kSecondsPerHour;
}

bool near(double a, double b) { return std::abs(a - b) <= kBoundTol; }

}  // namespace

NodalPriceReport nodal_prices(const Network& net, const FormulationKind& kind,
                              const VariableLayout& layout, const SolveResult& result) {
  if (result.status != SolveStatus::LocallyOptimal)
    throw std::invalid_argument("nodal_prices: solve did not reach local optimality");

  NodalPriceReport rep;
  for (size_t j = 0; j < net.nodes.size(); ++j)
    rep.prices.push_back(
        {net.nodes[j].id, balance_sigma(net, kind, result, static_cast<int>(j))});

  auto cleared = [&](int node_index, bool producer) {
    if (kind.which == Formulation::MinOperatingCost) {
      auto it = kind.fixed_allocation.find(net.nodes[node_index].id);
      if (it == kind.fixed_allocation.end()) return 0.0;
      return producer ? it->second.supply_m3s : it->second.demand_m3s;
    }
    const int v = producer ? layout.supply_var_for_node(node_index)
                           : layout.demand_var_for_node(node_index);
    return v < 0 ? 0.0 : result.x[v];
  };

  for (size_t j = 0; j < net.nodes.size(); ++j) {
    const Node& node = net.nodes[j];
    const double sigma = rep.prices[j].sigma_per_m3;
    if (node.producer) {
      const double q = cleared(static_cast<int>(j), true);
      rep.participants.push_back(
          {node.id, true, units::m3s_to_m3h(q), node.producer->price_per_m3,
           (sigma - node.producer->price_per_m3) * q * units::kSecondsPerHour,
           near(q, node.producer->flow_min_m3s) || near(q, node.producer->flow_max_m3s)});
    }
    if (node.consumer) {
      const double q = cleared(static_cast<int>(j), false);
      rep.participants.push_back(
          {node.id, false, units::m3s_to_m3h(q), node.consumer->price_per_m3,
           (node.consumer->price_per_m3 - sigma) * q * units::kSecondsPerHour,
           near(q, node.consumer->flow_min_m3s) || near(q, node.consumer->flow_max_m3s)});
    }
  }
  return rep;
}

ParameterPath ParameterPath::parse(const std::string& text) {
  const auto c1 = text.find(':');
  const auto c2 = text.rfind(':');
  if (c1 == std::string::npos || c2 == c1)
    throw std::invalid_argument("parameter path must look like 'producer:NODE:price'");
  const std::string role = text.substr(0, c1);
  const std::string node = text.substr(c1 + 1, c2 - c1 - 1);
  const std::string field = text.substr(c2 + 1);
  if (field != "price" || node.empty())
    throw std::invalid_argument("unsupported parameter path '" + text + "'");
  ParameterPath p;
  p.node_id = node;
  if (role == "producer") p.kind = Kind::ProducerPrice;
  else if (role == "consumer") p.kind = Kind::ConsumerPrice;
  else throw std::invalid_argument("unsupported parameter path '" + text + "'");
  return p;
}

std::string ParameterPath::to_string() const {
  return (kind == Kind::ProducerPrice ? std::string("producer:") : std::string("consumer:")) +
         node_id + ":price";
}

namespace {

void apply_parameter(Network& net, const ParameterPath& path, double value) {
  const int j = net.node_index(path.node_id);
  if (j < 0) throw std::invalid_argument("sweep: unknown node '" + path.node_id + "'");
  if (path.kind == ParameterPath::Kind::ProducerPrice) {
    if (!net.nodes[j].producer)
      throw std::invalid_argument("sweep: node '" + path.node_id + "' has no producer bid");
    net.nodes[j].producer->price_per_m3 = value;
  } else {
    if (!net.nodes[j].consumer)
      throw std::invalid_argument("sweep: node '" + path.node_id + "' has no consumer bid");
    net.nodes[j].consumer->price_per_m3 = value;
  }
}

}  // namespace

SweepTable sweep(const Network& net, const SweepSpec& spec, const SolverOptions& options) {
  if (spec.kind.which == Formulation::MinOperatingCost)
    throw std::invalid_argument("sweep: bid sweeps require an allocation-optimizing formulation");

  SweepTable table;
  const VariableLayout layout = build_layout(net, spec.kind);
  for (int j : layout.producer_nodes) table.producer_ids.push_back(net.nodes[j].id);
  for (int j : layout.consumer_nodes) table.consumer_ids.push_back(net.nodes[j].id);
  for (const Pump& p : net.pumps) table.pump_ids.push_back(p.id);
  for (const Pipe& p : net.pipes) table.pipe_ids.push_back(p.id);

  auto solver = make_default_solver();
  std::optional<WarmStart> carry;
  for (double value : spec.values) {
    Network variant = net;
    apply_parameter(variant, spec.target, value);
    const NlpProblem problem = build_nlp(variant, spec.kind);

    SweepRow row;
    row.parameter_value = value;
    row.warm_started = carry.has_value();
    SolveResult result = solver->solve(problem, options, carry);
    if (result.status != SolveStatus::LocallyOptimal && carry) {
      row.warm_started = false;
      result = solver->solve(problem, options);  // cold retry
    }
    row.status = result.status;
    if (result.status == SolveStatus::LocallyOptimal) {
      for (int i = 0; i < layout.supply.count; ++i)
        row.supply_m3h.push_back(units::m3s_to_m3h(result.x[layout.supply.at(i)]));
      for (int i = 0; i < layout.demand.count; ++i)
        row.demand_m3h.push_back(units::m3s_to_m3h(result.x[layout.demand.at(i)]));
      for (int j : layout.producer_nodes)
        row.sigma_per_m3.push_back(balance_sigma(variant, spec.kind, result, j));
      for (int j : layout.consumer_nodes)
        row.sigma_per_m3.push_back(balance_sigma(variant, spec.kind, result, j));
      for (int i = 0; i < layout.speed.count; ++i)
        row.speed_rpm.push_back(result.x[layout.speed.at(i)]);
      for (int i = 0; i < layout.eff.count; ++i)
        row.eff.push_back(result.x[layout.eff.at(i)]);
      for (int i = 0; i < layout.q_pipe.count; ++i)
        row.flow_m3h.push_back(units::m3s_to_m3h(result.x[layout.q_pipe.at(i)]));
      row.terms = objective_terms(variant, spec.kind, layout, result.x);
      if (spec.chain_warm_starts)
        carry = WarmStart{result.x, result.lambda, result.z_lower, result.z_upper};
    } else {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.supply_m3h.assign(layout.supply.count, nan);
      row.demand_m3h.assign(layout.demand.count, nan);
      row.sigma_per_m3.assign(layout.supply.count + layout.demand.count, nan);
      row.speed_rpm.assign(layout.speed.count, nan);
      row.eff.assign(layout.eff.count, nan);
      row.flow_m3h.assign(layout.q_pipe.count, nan);
      row.terms = {nan, nan, nan};
      carry.reset();
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string SweepTable::to_csv() const {
  std::ostringstream os;
  os.precision(17);
  os << "parameter,status,warm_started";
  for (const auto& id : producer_ids) os << ",s[" << id << "]_m3h";
  for (const auto& id : consumer_ids) os << ",d[" << id << "]_m3h";
  for (const auto& id : producer_ids) os << ",sigma[" << id << "]_usd_m3";
  for (const auto& id : consumer_ids) os << ",sigma[" << id << "]_usd_m3";
  for (const auto& id : pump_ids) os << ",omega[" << id << "]_rpm";
  for (const auto& id : pump_ids) os << ",eta[" << id << "]";
  for (const auto& id : pipe_ids) os << ",Q[" << id << "]_m3h";
  os << ",J_E_usd_h,J_O_usd_h,J_P_usd_h\n";
  for (const SweepRow& r : rows) {
    os << r.parameter_value << ',' << to_string(r.status) << ','
       << (r.warm_started ? 1 : 0);
    for (double v : r.supply_m3h) os << ',' << v;
    for (double v : r.demand_m3h) os << ',' << v;
    for (double v : r.sigma_per_m3) os << ',' << v;
    for (double v : r.speed_rpm) os << ',' << v;
    for (double v : r.eff) os << ',' << v;
    for (double v : r.flow_m3h) os << ',' << v;
    os << ',' << r.terms.transport_value << ',' << r.terms.operating_cost << ','
       << r.terms.total_value << '\n';
  }
  return os.str();
}

DualConsistency dual_consistency_check(const Network& net, const FormulationKind& kind,
                                       const std::string& node_id, double delta_m3s,
                                       const SolverOptions& options) {
  if (kind.which == Formulation::MinOperatingCost)
    throw std::invalid_argument("dual check requires an allocation-optimizing formulation");
  const int j = net.node_index(node_id);
  if (j < 0 || !net.nodes[j].consumer)
    throw std::invalid_argument("dual check: node '" + node_id + "' has no consumer bid");
  if (delta_m3s == 0.0) throw std::invalid_argument("dual check: delta must be nonzero");

  auto solver = make_default_solver();
  const VariableLayout layout = build_layout(net, kind);
  const SolveResult base = solver->solve(build_nlp(net, kind), options);
  if (base.status != SolveStatus::LocallyOptimal)
    throw std::runtime_error("dual check: base solve failed");

  DualConsistency out;
  out.sigma_per_m3 = balance_sigma(net, kind, base, j);
  const NodalPriceReport base_rep = nodal_prices(net, kind, layout, base);

  const Bid& bid = *net.nodes[j].consumer;
  const int dv = layout.demand_var_for_node(j);
  const double d0 = base.x[dv];
  const bool pinned = near(d0, bid.flow_min_m3s) || near(d0, bid.flow_max_m3s);

  Network shifted = net;
  auto& sbid = *shifted.nodes[j].consumer;
  sbid.flow_min_m3s += delta_m3s;
  sbid.flow_max_m3s += delta_m3s;
  const SolveResult moved =
      solver->solve(build_nlp(shifted, kind), options,
                    WarmStart{base.x, base.lambda, base.z_lower, base.z_upper});
  if (moved.status != SolveStatus::LocallyOptimal)
    throw std::runtime_error("dual check: shifted solve failed");

  const double t = bid.price_per_m3;
  const double dJ = moved.objective - base.objective;
  out.sigma_fd_per_m3 = t - dJ / (units::kSecondsPerHour * delta_m3s);
  out.relative_error = std::abs(out.sigma_per_m3 - out.sigma_fd_per_m3) /
                       std::max(1e-12, std::abs(out.sigma_per_m3));

  // The comparison is only meaningful when the demand is pinned and the
  // shift leaves the active set intact.
  const NodalPriceReport moved_rep = nodal_prices(shifted, kind, layout, moved);
  bool same_active_set = base_rep.participants.size() == moved_rep.participants.size();
  if (same_active_set)
    for (size_t i = 0; i < base_rep.participants.size(); ++i)
      if (base_rep.participants[i].at_bound != moved_rep.participants[i].at_bound)
        same_active_set = false;
  const double d1 = moved.x[dv];
  const bool still_pinned =
      near(d1, sbid.flow_min_m3s) || near(d1, sbid.flow_max_m3s);
  out.inconclusive = !pinned || !still_pinned || !same_active_set;
  return out;
}

}  // namespace pipeopt
