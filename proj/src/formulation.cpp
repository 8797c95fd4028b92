#include "pipeopt/formulation.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <utility>

#include "pipeopt/hydraulics.hpp"
#include "pipeopt/pump.hpp"
#include "pipeopt/units.hpp"

namespace pipeopt {

namespace {

// Per-element data captured by the NLP callbacks, flattened so the callbacks
// do not hold a Network reference.
struct PipeRowData {
  int row, iq, ihi, ihj;
  double scale;  // 1.02 * beta * nu^m / D^(5-m) * L
  double dz;     // z_j - z_i
  double m_exp;
};

struct PumpRowData {
  int head_row, eff_row, range_row;
  int iq, ihi, ihj, iw, ie;
  double a0, a1, wn, qn, en, dz;
  double k;  // rho*g*c / (1000 * eta_em * eta_mt), $/h per (m^3/s * m / eta)
};

struct BalanceEntry {
  int row, var;
  double coef;
};

struct Assembled {
  std::vector<PipeRowData> pipes;
  std::vector<PumpRowData> pumps;
  std::vector<BalanceEntry> balance;
  double cost_sign = 0.0;  // objective weight on operating cost: +1, -1 or 0
  // Linear objective coefficients on allocation variables (declared sense).
  std::vector<std::pair<int, double>> linear_obj;
  // Hessian value indices.
  struct PumpObjHess {
    int qhi, qhj, qe, hie, hje, ee;
  };
  std::vector<PumpObjHess> obj_hess;      // aligned with pumps when cost_sign != 0
  std::vector<int> pipe_qq;               // aligned with pipes
  struct PumpConHess {
    int head_qq, head_ww, eff_qq, eff_qw, eff_ww;
  };
  std::vector<PumpConHess> con_hess;      // aligned with pumps
};

double pump_cost_scale(const Pump& pump, double density_kg_m3) {
  return density_kg_m3 * units::kGravity * pump.electricity_price_per_kwh /
         (units::kWattsPerKilowatt * pump.motor_eff * pump.transmission_eff);
}

}  // namespace

int VariableLayout::supply_var_for_node(int node_index) const {
  for (size_t i = 0; i < producer_nodes.size(); ++i)
    if (producer_nodes[i] == node_index) return supply.at(static_cast<int>(i));
  return -1;
}

int VariableLayout::demand_var_for_node(int node_index) const {
  for (size_t i = 0; i < consumer_nodes.size(); ++i)
    if (consumer_nodes[i] == node_index) return demand.at(static_cast<int>(i));
  return -1;
}

VariableLayout build_layout(const Network& net, const FormulationKind& kind) {
  VariableLayout lo;
  const int P = static_cast<int>(net.pipes.size());
  const int U = static_cast<int>(net.pumps.size());
  const int N = static_cast<int>(net.nodes.size());
  int at = 0;
  lo.q_pipe = {at, P};
  at += P;
  lo.q_pump = {at, U};
  at += U;
  lo.head = {at, N};
  at += N;
  lo.speed = {at, U};
  at += U;
  lo.eff = {at, U};
  at += U;
  if (kind.which != Formulation::MinOperatingCost) {
    for (int j = 0; j < N; ++j) {
      if (net.nodes[j].producer) lo.producer_nodes.push_back(j);
      if (net.nodes[j].consumer) lo.consumer_nodes.push_back(j);
    }
  }
  lo.supply = {at, static_cast<int>(lo.producer_nodes.size())};
  at += lo.supply.count;
  lo.demand = {at, static_cast<int>(lo.consumer_nodes.size())};
  at += lo.demand.count;
  lo.n = at;
  return lo;
}

ConstraintLayout build_constraint_layout(const Network& net) {
  ConstraintLayout cl;
  const int P = static_cast<int>(net.pipes.size());
  const int U = static_cast<int>(net.pumps.size());
  const int N = static_cast<int>(net.nodes.size());
  int at = 0;
  cl.pipe_rows = {at, P};
  at += P;
  cl.balance_rows = {at, N};
  at += N;
  cl.pump_head_rows = {at, U};
  at += U;
  cl.pump_eff_rows = {at, U};
  at += U;
  cl.pump_range_rows = {at, U};
  at += U;
  cl.m = at;
  return cl;
}

NlpProblem build_nlp(const Network& net, const FormulationKind& kind) {
  {
    auto diags = validate_network(net);
    if (!is_valid(diags)) {
      std::string msg = "invalid network:";
      for (const auto& d : diags)
        if (d.severity == Diagnostic::Severity::Error)
          msg += " [" + d.element_id + "] " + d.message + ";";
      throw std::invalid_argument(msg);
    }
  }

  const VariableLayout lo = build_layout(net, kind);
  const ConstraintLayout cl = build_constraint_layout(net);
  const bool fixed = kind.which == Formulation::MinOperatingCost;

  NlpProblem p;
  p.n = lo.n;
  p.m = cl.m;
  p.sense = fixed ? ObjectiveSense::Minimize : ObjectiveSense::Maximize;
  p.x_lower.setConstant(p.n, -kInfinity);
  p.x_upper.setConstant(p.n, kInfinity);
  p.x_initial.setZero(p.n);
  p.g_lower.setZero(p.m);
  p.g_upper.setZero(p.m);
  p.var_names.resize(p.n);
  p.row_names.resize(p.m);

  Assembled a;
  a.cost_sign = kind.which == Formulation::MinOperatingCost  ? 1.0
                : kind.which == Formulation::MaxTotalValue   ? -1.0
                                                             : 0.0;

  // Variable boxes, names and start point.
  for (size_t i = 0; i < net.pipes.size(); ++i) {
    const int v = lo.q_pipe.at(static_cast<int>(i));
    p.x_lower[v] = net.pipes[i].flow_min_m3s;
    p.x_upper[v] = net.pipes[i].flow_max_m3s;
    p.var_names[v] = "Q[" + net.pipes[i].id + "]";
  }
  for (size_t i = 0; i < net.pumps.size(); ++i) {
    const Pump& pm = net.pumps[i];
    const int vq = lo.q_pump.at(static_cast<int>(i));
    const int vw = lo.speed.at(static_cast<int>(i));
    const int ve = lo.eff.at(static_cast<int>(i));
    p.x_lower[vq] = pm.flow_factor_lo * pm.flow_nom_m3s;
    p.x_upper[vq] = pm.flow_factor_hi * pm.flow_nom_m3s;
    p.x_lower[vw] = pm.speed_factor_lo * pm.speed_nom_rpm;
    p.x_upper[vw] = pm.speed_factor_hi * pm.speed_nom_rpm;
    p.x_lower[ve] = pm.eff_factor_lo * pm.eff_nom;
    // The efficiency row alone caps eta at eff_nom (the maximum of the
    // affinity curve), so no upper box bound is imposed: a bound exactly at
    // eff_nom would be degenerate with the row whenever a pump runs at its
    // best-efficiency point, where the row gradient in (Q, omega) vanishes.
    p.x_upper[ve] = kInfinity;
    p.var_names[vq] = "Q[" + pm.id + "]";
    p.var_names[vw] = "omega[" + pm.id + "]";
    p.var_names[ve] = "eta[" + pm.id + "]";
  }
  for (size_t j = 0; j < net.nodes.size(); ++j) {
    const int v = lo.head.at(static_cast<int>(j));
    p.x_lower[v] = net.nodes[j].head_min_m;
    p.x_upper[v] = net.nodes[j].head_max_m;
    p.var_names[v] = "H[" + net.nodes[j].id + "]";
  }
  for (size_t i = 0; i < lo.producer_nodes.size(); ++i) {
    const Node& n = net.nodes[lo.producer_nodes[i]];
    const int v = lo.supply.at(static_cast<int>(i));
    p.x_lower[v] = n.producer->flow_min_m3s;
    p.x_upper[v] = n.producer->flow_max_m3s;
    p.var_names[v] = "s[" + n.id + "]";
  }
  for (size_t i = 0; i < lo.consumer_nodes.size(); ++i) {
    const Node& n = net.nodes[lo.consumer_nodes[i]];
    const int v = lo.demand.at(static_cast<int>(i));
    p.x_lower[v] = n.consumer->flow_min_m3s;
    p.x_upper[v] = n.consumer->flow_max_m3s;
    p.var_names[v] = "d[" + n.id + "]";
  }
  for (int v = 0; v < p.n; ++v) {
    if (p.x_lower[v] > p.x_upper[v])
      throw std::invalid_argument("empty bound box for " + p.var_names[v]);
    p.x_initial[v] = 0.5 * (p.x_lower[v] + p.x_upper[v]);
  }
  // Nominal-efficiency, affinity-consistent pump start.
  for (size_t i = 0; i < net.pumps.size(); ++i) {
    const Pump& pm = net.pumps[i];
    const int vq = lo.q_pump.at(static_cast<int>(i));
    const int vw = lo.speed.at(static_cast<int>(i));
    const int ve = lo.eff.at(static_cast<int>(i));
    p.x_initial[ve] = pm.eff_nom;
    const double w0 = p.x_initial[vw] / pm.speed_nom_rpm;
    p.x_initial[vq] =
        std::clamp(pm.flow_nom_m3s * w0, p.x_lower[vq], p.x_upper[vq]);
  }

  // Fixed allocation (MinOperatingCost): constants on the balance RHS.
  std::vector<double> rhs(net.nodes.size(), 0.0);
  if (fixed) {
    double total_s = 0.0, total_d = 0.0;
    for (const auto& [id, alloc] : kind.fixed_allocation) {
      const int j = net.node_index(id);
      if (j < 0) throw std::invalid_argument("fixed allocation references unknown node '" + id + "'");
      if (alloc.supply_m3s < 0.0 || alloc.demand_m3s < 0.0)
        throw std::invalid_argument("fixed allocation negative at node '" + id + "'");
      rhs[j] = alloc.demand_m3s - alloc.supply_m3s;
      total_s += alloc.supply_m3s;
      total_d += alloc.demand_m3s;
    }
    if (std::abs(total_s - total_d) > 1e-9 * std::max(1.0, total_s))
      throw std::invalid_argument("fixed allocation unbalanced: total supply != total demand");
  } else if (!kind.fixed_allocation.empty()) {
    throw std::invalid_argument("fixed allocation only applies to the minimum-cost formulation");
  }

  // Rows: pipes.
  SparsityPattern jac;
  for (size_t i = 0; i < net.pipes.size(); ++i) {
    const Pipe& pipe = net.pipes[i];
    const int row = cl.pipe_rows.at(static_cast<int>(i));
    const int ni = net.node_index(pipe.from_node);
    const int nj = net.node_index(pipe.to_node);
    PipeRowData d;
    d.row = row;
    d.iq = lo.q_pipe.at(static_cast<int>(i));
    d.ihi = lo.head.at(ni);
    d.ihj = lo.head.at(nj);
    d.scale = 1.02 * pipe.leibenzon_beta_s2m *
              std::pow(net.fluid.kinematic_viscosity_m2s, pipe.flow_exponent) /
              std::pow(pipe.diameter_m, 5.0 - pipe.flow_exponent) * pipe.length_m;
    d.dz = net.nodes[nj].elevation_m - net.nodes[ni].elevation_m;
    d.m_exp = pipe.flow_exponent;
    a.pipes.push_back(d);
    p.row_names[row] = "bernoulli[" + pipe.id + "]";
    jac.rows.insert(jac.rows.end(), {row, row, row});
    jac.cols.insert(jac.cols.end(), {d.ihi, d.ihj, d.iq});
  }

  // Rows: node balances, g_j = sum_in Q - sum_out Q + s_j - d_j = rhs_j.
  for (size_t j = 0; j < net.nodes.size(); ++j) {
    const int row = cl.balance_rows.at(static_cast<int>(j));
    p.row_names[row] = "balance[" + net.nodes[j].id + "]";
    p.g_lower[row] = p.g_upper[row] = rhs[j];
  }
  auto add_balance = [&](const std::string& from, const std::string& to, int qvar) {
    a.balance.push_back({cl.balance_rows.at(net.node_index(to)), qvar, 1.0});
    a.balance.push_back({cl.balance_rows.at(net.node_index(from)), qvar, -1.0});
  };
  for (size_t i = 0; i < net.pipes.size(); ++i)
    add_balance(net.pipes[i].from_node, net.pipes[i].to_node, lo.q_pipe.at(static_cast<int>(i)));
  for (size_t i = 0; i < net.pumps.size(); ++i)
    add_balance(net.pumps[i].from_node, net.pumps[i].to_node, lo.q_pump.at(static_cast<int>(i)));
  for (size_t i = 0; i < lo.producer_nodes.size(); ++i)
    a.balance.push_back({cl.balance_rows.at(lo.producer_nodes[i]),
                         lo.supply.at(static_cast<int>(i)), 1.0});
  for (size_t i = 0; i < lo.consumer_nodes.size(); ++i)
    a.balance.push_back({cl.balance_rows.at(lo.consumer_nodes[i]),
                         lo.demand.at(static_cast<int>(i)), -1.0});
  for (const BalanceEntry& e : a.balance) {
    jac.rows.push_back(e.row);
    jac.cols.push_back(e.var);
  }

  // Rows: pumps (head-gain equality, efficiency equality, ranged head diff).
  for (size_t i = 0; i < net.pumps.size(); ++i) {
    const Pump& pm = net.pumps[i];
    const int ni = net.node_index(pm.from_node);
    const int nj = net.node_index(pm.to_node);
    PumpRowData d;
    d.head_row = cl.pump_head_rows.at(static_cast<int>(i));
    d.eff_row = cl.pump_eff_rows.at(static_cast<int>(i));
    d.range_row = cl.pump_range_rows.at(static_cast<int>(i));
    d.iq = lo.q_pump.at(static_cast<int>(i));
    d.ihi = lo.head.at(ni);
    d.ihj = lo.head.at(nj);
    d.iw = lo.speed.at(static_cast<int>(i));
    d.ie = lo.eff.at(static_cast<int>(i));
    d.a0 = pm.a0_m;
    d.a1 = pm.a1_s2m5;
    d.wn = pm.speed_nom_rpm;
    d.qn = pm.flow_nom_m3s;
    d.en = pm.eff_nom;
    d.dz = net.nodes[nj].elevation_m - net.nodes[ni].elevation_m;
    d.k = pump_cost_scale(pm, net.fluid.density_kg_m3);
    a.pumps.push_back(d);
    p.row_names[d.head_row] = "pump_head[" + pm.id + "]";
    p.row_names[d.eff_row] = "pump_eff[" + pm.id + "]";
    p.row_names[d.range_row] = "pump_range[" + pm.id + "]";
    p.g_lower[d.range_row] = pm.head_gain_min_m;
    p.g_upper[d.range_row] = pm.head_gain_max_m;
    jac.rows.insert(jac.rows.end(), {d.head_row, d.head_row, d.head_row, d.head_row});
    jac.cols.insert(jac.cols.end(), {d.ihj, d.ihi, d.iq, d.iw});
    jac.rows.insert(jac.rows.end(), {d.eff_row, d.eff_row, d.eff_row});
    jac.cols.insert(jac.cols.end(), {d.ie, d.iq, d.iw});
    jac.rows.insert(jac.rows.end(), {d.range_row, d.range_row});
    jac.cols.insert(jac.cols.end(), {d.ihj, d.ihi});
  }
  p.jac_pattern = jac;

  // Linear objective coefficients on the allocation variables ($/h).
  for (size_t i = 0; i < lo.producer_nodes.size(); ++i)
    a.linear_obj.push_back({lo.supply.at(static_cast<int>(i)),
                            -units::kSecondsPerHour *
                                net.nodes[lo.producer_nodes[i]].producer->price_per_m3});
  for (size_t i = 0; i < lo.consumer_nodes.size(); ++i)
    a.linear_obj.push_back({lo.demand.at(static_cast<int>(i)),
                            units::kSecondsPerHour *
                                net.nodes[lo.consumer_nodes[i]].consumer->price_per_m3});

  // Hessian pattern (lower triangle), deduplicated across contributions.
  SparsityPattern hess;
  std::map<std::pair<int, int>, int> cell;
  auto entry = [&](int va, int vb) {
    std::pair<int, int> key{std::max(va, vb), std::min(va, vb)};
    auto it = cell.find(key);
    if (it != cell.end()) return it->second;
    const int idx = hess.nnz();
    hess.rows.push_back(key.first);
    hess.cols.push_back(key.second);
    cell.emplace(key, idx);
    return idx;
  };
  if (a.cost_sign != 0.0)
    for (const PumpRowData& d : a.pumps)
      a.obj_hess.push_back({entry(d.iq, d.ihi), entry(d.iq, d.ihj), entry(d.iq, d.ie),
                            entry(d.ihi, d.ie), entry(d.ihj, d.ie), entry(d.ie, d.ie)});
  for (const PipeRowData& d : a.pipes) a.pipe_qq.push_back(entry(d.iq, d.iq));
  for (const PumpRowData& d : a.pumps)
    a.con_hess.push_back({entry(d.iq, d.iq), entry(d.iw, d.iw), entry(d.iq, d.iq),
                          entry(d.iq, d.iw), entry(d.iw, d.iw)});
  p.hess_pattern = hess;

  const double nu = net.fluid.kinematic_viscosity_m2s;
  (void)nu;
  const Assembled asm_data = a;  // callbacks share one immutable copy

  p.eval_f = [asm_data](const Eigen::VectorXd& x) {
    double f = 0.0;
    for (const auto& [var, coef] : asm_data.linear_obj) f += coef * x[var];
    if (asm_data.cost_sign != 0.0)
      for (const PumpRowData& d : asm_data.pumps) {
        const double dH = x[d.ihj] - x[d.ihi] + d.dz;
        f += asm_data.cost_sign * d.k * x[d.iq] * dH / x[d.ie];
      }
    return f;
  };

  p.eval_grad_f = [asm_data, n = p.n](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
    grad.setZero(n);
    for (const auto& [var, coef] : asm_data.linear_obj) grad[var] += coef;
    if (asm_data.cost_sign != 0.0)
      for (const PumpRowData& d : asm_data.pumps) {
        const double cs = asm_data.cost_sign;
        const double dH = x[d.ihj] - x[d.ihi] + d.dz;
        const double e = x[d.ie];
        grad[d.iq] += cs * d.k * dH / e;
        grad[d.ihj] += cs * d.k * x[d.iq] / e;
        grad[d.ihi] -= cs * d.k * x[d.iq] / e;
        grad[d.ie] -= cs * d.k * x[d.iq] * dH / (e * e);
      }
  };

  p.eval_g = [asm_data, m = p.m](const Eigen::VectorXd& x, Eigen::VectorXd& g) {
    g.setZero(m);
    for (const PipeRowData& d : asm_data.pipes) {
      const auto pw = hydraulics::smoothed_flow_power(x[d.iq], d.m_exp);
      g[d.row] = (x[d.ihi] - x[d.ihj]) - d.dz - d.scale * pw.value;
    }
    for (const BalanceEntry& e : asm_data.balance) g[e.row] += e.coef * x[e.var];
    for (const PumpRowData& d : asm_data.pumps) {
      const double w = x[d.iw] / d.wn;
      g[d.head_row] =
          x[d.ihj] - x[d.ihi] + d.dz - (d.a0 * w * w - d.a1 * x[d.iq] * x[d.iq]);
      const double t = x[d.iq] / d.qn / w - 1.0;
      g[d.eff_row] = x[d.ie] - (d.en - d.en * t * t);
      g[d.range_row] = x[d.ihj] - x[d.ihi] + d.dz;
    }
  };

  p.eval_jac = [asm_data](const Eigen::VectorXd& x, Eigen::VectorXd& v) {
    int at = 0;
    v.resize(static_cast<Eigen::Index>(asm_data.pipes.size()) * 3 +
             static_cast<Eigen::Index>(asm_data.balance.size()) +
             static_cast<Eigen::Index>(asm_data.pumps.size()) * 9);
    for (const PipeRowData& d : asm_data.pipes) {
      const auto pw = hydraulics::smoothed_flow_power(x[d.iq], d.m_exp);
      v[at++] = 1.0;                // d/dHi
      v[at++] = -1.0;               // d/dHj
      v[at++] = -d.scale * pw.d1;   // d/dQ
    }
    for (const BalanceEntry& e : asm_data.balance) v[at++] = e.coef;
    for (const PumpRowData& d : asm_data.pumps) {
      const double w = x[d.iw] / d.wn;
      v[at++] = 1.0;                                  // head row d/dHj
      v[at++] = -1.0;                                 // head row d/dHi
      v[at++] = 2.0 * d.a1 * x[d.iq];                 // head row d/dQ
      v[at++] = -2.0 * d.a0 * w / d.wn;               // head row d/domega
      const double u = x[d.iq] / d.qn;
      const double t = u / w - 1.0;
      const double dt_dQ = 1.0 / (w * d.qn);
      const double dt_dW = -u / (w * w);
      v[at++] = 1.0;                                  // eff row d/deta
      v[at++] = 2.0 * d.en * t * dt_dQ;               // eff row d/dQ
      v[at++] = 2.0 * d.en * t * dt_dW / d.wn;        // eff row d/domega
      v[at++] = 1.0;                                  // range row d/dHj
      v[at++] = -1.0;                                 // range row d/dHi
    }
  };

  p.eval_hess = [asm_data, nnz = p.hess_pattern.nnz()](
                    const Eigen::VectorXd& x, double sigma_f,
                    const Eigen::VectorXd& lambda, Eigen::VectorXd& v) {
    v.setZero(nnz);
    if (asm_data.cost_sign != 0.0)
      for (size_t i = 0; i < asm_data.pumps.size(); ++i) {
        const PumpRowData& d = asm_data.pumps[i];
        const auto& h = asm_data.obj_hess[i];
        const double s = sigma_f * asm_data.cost_sign * d.k;
        const double dH = x[d.ihj] - x[d.ihi] + d.dz;
        const double e = x[d.ie];
        v[h.qhi] += -s / e;
        v[h.qhj] += s / e;
        v[h.qe] += -s * dH / (e * e);
        v[h.hie] += s * x[d.iq] / (e * e);
        v[h.hje] += -s * x[d.iq] / (e * e);
        v[h.ee] += 2.0 * s * x[d.iq] * dH / (e * e * e);
      }
    for (size_t i = 0; i < asm_data.pipes.size(); ++i) {
      const PipeRowData& d = asm_data.pipes[i];
      const auto pw = hydraulics::smoothed_flow_power(x[d.iq], d.m_exp);
      v[asm_data.pipe_qq[i]] += lambda[d.row] * (-d.scale * pw.d2);
    }
    for (size_t i = 0; i < asm_data.pumps.size(); ++i) {
      const PumpRowData& d = asm_data.pumps[i];
      const auto& h = asm_data.con_hess[i];
      const double w = x[d.iw] / d.wn;
      v[h.head_qq] += lambda[d.head_row] * 2.0 * d.a1;
      v[h.head_ww] += lambda[d.head_row] * (-2.0 * d.a0 / (d.wn * d.wn));
      const double u = x[d.iq] / d.qn;
      const double t = u / w - 1.0;
      const double dt_dQ = 1.0 / (w * d.qn);
      const double dt_dW = -u / (w * w);
      v[h.eff_qq] += lambda[d.eff_row] * 2.0 * d.en * dt_dQ * dt_dQ;
      v[h.eff_qw] += lambda[d.eff_row] * 2.0 * d.en *
                     (dt_dW * dt_dQ + t * (-1.0 / (w * w * d.qn))) / d.wn;
      v[h.eff_ww] += lambda[d.eff_row] * 2.0 * d.en *
                     (dt_dW * dt_dW + t * (2.0 * u / (w * w * w))) / (d.wn * d.wn);
    }
  };

  return p;
}

ObjectiveTerms objective_terms(const Network& net, const FormulationKind& kind,
                               const VariableLayout& layout, const Eigen::VectorXd& x) {
  ObjectiveTerms t;
  for (size_t i = 0; i < net.pumps.size(); ++i) {
    const Pump& pm = net.pumps[i];
    const int ni = net.node_index(pm.from_node);
    const int nj = net.node_index(pm.to_node);
    const double dH = x[layout.head.at(nj)] - x[layout.head.at(ni)] +
                      (net.nodes[nj].elevation_m - net.nodes[ni].elevation_m);
    const double q = x[layout.q_pump.at(static_cast<int>(i))];
    const double eta = x[layout.eff.at(static_cast<int>(i))];
    t.operating_cost += pump_model::cost_rate(
        pump_model::power(q, dH, eta, net.fluid, pm), pm.electricity_price_per_kwh);
  }
  if (kind.which == Formulation::MinOperatingCost) {
    for (const auto& [id, alloc] : kind.fixed_allocation) {
      const Node& n = net.nodes[net.node_index(id)];
      if (n.consumer)
        t.transport_value +=
            units::kSecondsPerHour * n.consumer->price_per_m3 * alloc.demand_m3s;
      if (n.producer)
        t.transport_value -=
            units::kSecondsPerHour * n.producer->price_per_m3 * alloc.supply_m3s;
    }
  } else {
    for (size_t i = 0; i < layout.consumer_nodes.size(); ++i)
      t.transport_value += units::kSecondsPerHour *
                           net.nodes[layout.consumer_nodes[i]].consumer->price_per_m3 *
                           x[layout.demand.at(static_cast<int>(i))];
    for (size_t i = 0; i < layout.producer_nodes.size(); ++i)
      t.transport_value -= units::kSecondsPerHour *
                           net.nodes[layout.producer_nodes[i]].producer->price_per_m3 *
                           x[layout.supply.at(static_cast<int>(i))];
  }
  t.total_value = t.transport_value - t.operating_cost;
  return t;
}

DerivativeReport check_derivatives(const NlpProblem& problem, const Eigen::VectorXd& x,
                                   double step) {
  DerivativeReport rep;
  const int n = problem.n, m = problem.m;
  auto rel = [](double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
  };

  Eigen::VectorXd grad(n);
  problem.eval_grad_f(x, grad);
  Eigen::VectorXd jv(problem.jac_pattern.nnz());
  problem.eval_jac(x, jv);
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(m, n);
  for (int k = 0; k < problem.jac_pattern.nnz(); ++k)
    jac(problem.jac_pattern.rows[k], problem.jac_pattern.cols[k]) += jv[k];

  // Deterministic multipliers for the Lagrangian Hessian audit.
  Eigen::VectorXd lambda(m);
  for (int k = 0; k < m; ++k) lambda[k] = 0.5 + 0.1 * std::sin(1.0 + k);
  Eigen::VectorXd hv(problem.hess_pattern.nnz());
  problem.eval_hess(x, 1.0, lambda, hv);
  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < problem.hess_pattern.nnz(); ++k) {
    const int r = problem.hess_pattern.rows[k], c = problem.hess_pattern.cols[k];
    hess(r, c) += hv[k];
    if (r != c) hess(c, r) += hv[k];
  }

  Eigen::VectorXd gp(m), gm(m), glp(n), glm(n), jtmp(problem.jac_pattern.nnz());
  auto grad_lagrangian = [&](const Eigen::VectorXd& xi, Eigen::VectorXd& out) {
    problem.eval_grad_f(xi, out);
    problem.eval_jac(xi, jtmp);
    for (int k = 0; k < problem.jac_pattern.nnz(); ++k)
      out[problem.jac_pattern.cols[k]] += lambda[problem.jac_pattern.rows[k]] * jtmp[k];
  };

  Eigen::VectorXd xp = x, xm = x;
  for (int i = 0; i < n; ++i) {
    const double h = step * std::max(1.0, std::abs(x[i]));
    xp[i] = x[i] + h;
    xm[i] = x[i] - h;
    const double fd_f = (problem.eval_f(xp) - problem.eval_f(xm)) / (2.0 * h);
    rep.max_rel_err_grad = std::max(rep.max_rel_err_grad, rel(grad[i], fd_f));
    problem.eval_g(xp, gp);
    problem.eval_g(xm, gm);
    for (int k = 0; k < m; ++k)
      rep.max_rel_err_jac =
          std::max(rep.max_rel_err_jac, rel(jac(k, i), (gp[k] - gm[k]) / (2.0 * h)));
    grad_lagrangian(xp, glp);
    grad_lagrangian(xm, glm);
    for (int k = 0; k < n; ++k)
      rep.max_rel_err_hess =
          std::max(rep.max_rel_err_hess, rel(hess(k, i), (glp[k] - glm[k]) / (2.0 * h)));
    xp[i] = x[i];
    xm[i] = x[i];
  }
  return rep;
}

}  // namespace pipeopt
