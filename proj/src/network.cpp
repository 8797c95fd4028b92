#include "pipeopt/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "pipeopt/units.hpp"

namespace pipeopt {

using nlohmann::json;
using nlohmann::ordered_json;

int Network::node_index(const std::string& id) const {
  for (size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i].id == id) return static_cast<int>(i);
  return -1;
}

namespace {

void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v)) throw ParseError("non-finite value in " + where);
}

double get_number(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing key '" + std::string(key) + "' in " + where);
  if (!it->is_number()) throw ParseError("key '" + std::string(key) + "' in " + where + " is not a number");
  double v = it->get<double>();
  require_finite(v, where + "." + key);
  return v;
}

double get_number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ParseError("key '" + std::string(key) + "' in " + where + " is not a number");
  double v = it->get<double>();
  require_finite(v, where + "." + key);
  return v;
}

std::string get_string(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing key '" + std::string(key) + "' in " + where);
  if (!it->is_string()) throw ParseError("key '" + std::string(key) + "' in " + where + " is not a string");
  return it->get<std::string>();
}

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where,
                ParseMode mode, std::vector<std::string>* warnings) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (allowed.count(it.key())) continue;
    const std::string msg = "unknown key '" + it.key() + "' in " + where;
    if (mode == ParseMode::Strict) throw ParseError(msg);
    if (warnings) warnings->push_back(msg);
  }
}

Bid parse_bid(const json& obj, const std::string& where, ParseMode mode,
              std::vector<std::string>* warnings) {
  check_keys(obj, {"price_usd_m3", "flow_min_m3_h", "flow_max_m3_h"}, where, mode, warnings);
  Bid bid;
  bid.price_per_m3 = get_number(obj, "price_usd_m3", where);
  bid.flow_min_m3s = units::m3h_to_m3s(get_number(obj, "flow_min_m3_h", where));
  bid.flow_max_m3s = units::m3h_to_m3s(get_number(obj, "flow_max_m3_h", where));
  if (bid.flow_min_m3s < 0.0 || bid.flow_min_m3s > bid.flow_max_m3s)
    throw ParseError("bid flow window invalid in " + where);
  return bid;
}

}  // namespace

Network parse_network(const std::string& document, ParseMode mode,
                      std::vector<std::string>* warnings) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("syntax error: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("document root must be an object");
  check_keys(doc, {"fluid", "nodes", "pipes", "pumps"}, "document", mode, warnings);

  Network net;
  if (!doc.contains("fluid") || !doc["fluid"].is_object())
    throw ParseError("missing or invalid 'fluid' object");
  const json& fl = doc["fluid"];
  check_keys(fl, {"density_kg_m3", "kinematic_viscosity_m2_s"}, "fluid", mode, warnings);
  net.fluid.density_kg_m3 = get_number(fl, "density_kg_m3", "fluid");
  net.fluid.kinematic_viscosity_m2s = get_number(fl, "kinematic_viscosity_m2_s", "fluid");
  if (net.fluid.density_kg_m3 <= 0.0 || net.fluid.kinematic_viscosity_m2s <= 0.0)
    throw ParseError("fluid properties must be positive");

  if (!doc.contains("nodes") || !doc["nodes"].is_array())
    throw ParseError("missing or invalid 'nodes' array");
  for (const json& jn : doc["nodes"]) {
    const std::string id = get_string(jn, "id", "node");
    const std::string where = "node '" + id + "'";
    check_keys(jn, {"id", "elevation_m", "head_min_m", "head_max_m", "producer", "consumer"},
               where, mode, warnings);
    Node node;
    node.id = id;
    node.elevation_m = get_number(jn, "elevation_m", where);
    node.head_min_m = get_number(jn, "head_min_m", where);
    node.head_max_m = get_number(jn, "head_max_m", where);
    if (node.head_min_m < 0.0 || node.head_min_m >= node.head_max_m)
      throw ParseError("head bounds invalid in " + where + " (need 0 <= min < max)");
    if (jn.contains("producer")) node.producer = parse_bid(jn["producer"], where + ".producer", mode, warnings);
    if (jn.contains("consumer")) node.consumer = parse_bid(jn["consumer"], where + ".consumer", mode, warnings);
    if (net.node_index(id) >= 0) throw ParseError("duplicate node id '" + id + "'");
    net.nodes.push_back(std::move(node));
  }

  std::set<std::string> edge_ids;
  auto check_edge = [&](const std::string& id, const std::string& from, const std::string& to,
                        const std::string& where) {
    if (!edge_ids.insert(id).second) throw ParseError("duplicate edge id '" + id + "'");
    if (net.node_index(from) < 0) throw ParseError("unknown node '" + from + "' referenced by " + where);
    if (net.node_index(to) < 0) throw ParseError("unknown node '" + to + "' referenced by " + where);
    if (from == to) throw ParseError("self-loop in " + where);
  };

  if (doc.contains("pipes")) {
    if (!doc["pipes"].is_array()) throw ParseError("'pipes' must be an array");
    for (const json& jp : doc["pipes"]) {
      const std::string id = get_string(jp, "id", "pipe");
      const std::string where = "pipe '" + id + "'";
      check_keys(jp,
                 {"id", "from", "to", "length_m", "length_km", "diameter_m", "beta_s2_m",
                  "flow_exponent", "roughness_m", "flow_min_m3_h", "flow_max_m3_h"},
                 where, mode, warnings);
      Pipe pipe;
      pipe.id = id;
      pipe.from_node = get_string(jp, "from", where);
      pipe.to_node = get_string(jp, "to", where);
      check_edge(id, pipe.from_node, pipe.to_node, where);
      const bool has_m = jp.contains("length_m");
      const bool has_km = jp.contains("length_km");
      if (has_m == has_km)
        throw ParseError(where + " must carry exactly one of 'length_m' or 'length_km'");
      pipe.length_m = has_m ? get_number(jp, "length_m", where)
                            : get_number(jp, "length_km", where) * 1000.0;
      pipe.diameter_m = get_number(jp, "diameter_m", where);
      pipe.leibenzon_beta_s2m = get_number(jp, "beta_s2_m", where);
      pipe.flow_exponent = get_number(jp, "flow_exponent", where);
      pipe.roughness_m = get_number_or(jp, "roughness_m", 0.0, where);
      pipe.flow_min_m3s = units::m3h_to_m3s(get_number(jp, "flow_min_m3_h", where));
      pipe.flow_max_m3s = units::m3h_to_m3s(get_number(jp, "flow_max_m3_h", where));
      if (pipe.length_m <= 0.0 || pipe.diameter_m <= 0.0 || pipe.leibenzon_beta_s2m <= 0.0)
        throw ParseError(where + ": length, diameter and beta must be positive");
      if (pipe.flow_exponent < 0.0 || pipe.flow_exponent >= 1.0)
        throw ParseError(where + ": flow exponent must satisfy 0 <= m < 1");
      if (!(pipe.flow_min_m3s > 0.0) || pipe.flow_min_m3s > pipe.flow_max_m3s)
        throw ParseError(where + ": need 0 < flow_min <= flow_max");
      net.pipes.push_back(std::move(pipe));
    }
  }

  if (doc.contains("pumps")) {
    if (!doc["pumps"].is_array()) throw ParseError("'pumps' must be an array");
    for (const json& jp : doc["pumps"]) {
      const std::string id = get_string(jp, "id", "pump");
      const std::string where = "pump '" + id + "'";
      check_keys(jp,
                 {"id", "from", "to", "a0_m", "a1_s2_m5", "flow_nom_m3_h", "speed_nom_rpm",
                  "eff_nom", "motor_eff", "transmission_eff", "electricity_price_usd_kwh",
                  "head_gain_min_m", "head_gain_max_m", "flow_factor_lo", "flow_factor_hi",
                  "speed_factor_lo", "speed_factor_hi", "eff_factor_lo"},
                 where, mode, warnings);
      Pump pump;
      pump.id = id;
      pump.from_node = get_string(jp, "from", where);
      pump.to_node = get_string(jp, "to", where);
      check_edge(id, pump.from_node, pump.to_node, where);
      pump.a0_m = get_number(jp, "a0_m", where);
      pump.a1_s2m5 = get_number(jp, "a1_s2_m5", where);
      pump.flow_nom_m3s = units::m3h_to_m3s(get_number(jp, "flow_nom_m3_h", where));
      pump.speed_nom_rpm = get_number(jp, "speed_nom_rpm", where);
      pump.eff_nom = get_number(jp, "eff_nom", where);
      pump.motor_eff = get_number_or(jp, "motor_eff", 0.95, where);
      pump.transmission_eff = get_number_or(jp, "transmission_eff", 0.95, where);
      pump.electricity_price_per_kwh = get_number(jp, "electricity_price_usd_kwh", where);
      pump.head_gain_min_m = get_number(jp, "head_gain_min_m", where);
      pump.head_gain_max_m = get_number(jp, "head_gain_max_m", where);
      pump.flow_factor_lo = get_number_or(jp, "flow_factor_lo", 0.8, where);
      pump.flow_factor_hi = get_number_or(jp, "flow_factor_hi", 1.2, where);
      pump.speed_factor_lo = get_number_or(jp, "speed_factor_lo", 0.8, where);
      pump.speed_factor_hi = get_number_or(jp, "speed_factor_hi", 1.2, where);
      pump.eff_factor_lo = get_number_or(jp, "eff_factor_lo", 0.7, where);
      if (pump.a0_m <= 0.0 || pump.a1_s2m5 < 0.0)
        throw ParseError(where + ": need a0 > 0, a1 >= 0");
      if (pump.flow_nom_m3s <= 0.0 || pump.speed_nom_rpm <= 0.0)
        throw ParseError(where + ": nominal flow and speed must be positive");
      if (!(pump.eff_nom > 0.0 && pump.eff_nom <= 1.0) ||
          !(pump.motor_eff > 0.0 && pump.motor_eff <= 1.0) ||
          !(pump.transmission_eff > 0.0 && pump.transmission_eff <= 1.0))
        throw ParseError(where + ": efficiencies must lie in (0, 1]");
      if (pump.electricity_price_per_kwh < 0.0)
        throw ParseError(where + ": electricity price must be nonnegative");
      if (!(pump.flow_factor_lo > 0.0 && pump.flow_factor_lo < pump.flow_factor_hi) ||
          !(pump.speed_factor_lo > 0.0 && pump.speed_factor_lo < pump.speed_factor_hi) ||
          !(pump.eff_factor_lo > 0.0 && pump.eff_factor_lo <= 1.0))
        throw ParseError(where + ": operating factor bounds invalid");
      net.pumps.push_back(std::move(pump));
    }
  }
  return net;
}

std::string serialize_network(const Network& net) {
  ordered_json doc;
  doc["fluid"] = {{"density_kg_m3", net.fluid.density_kg_m3},
                  {"kinematic_viscosity_m2_s", net.fluid.kinematic_viscosity_m2s}};
  doc["nodes"] = ordered_json::array();
  for (const Node& n : net.nodes) {
    ordered_json jn = {{"id", n.id},
                       {"elevation_m", n.elevation_m},
                       {"head_min_m", n.head_min_m},
                       {"head_max_m", n.head_max_m}};
    auto bid_json = [](const Bid& b) {
      return ordered_json{{"price_usd_m3", b.price_per_m3},
                          {"flow_min_m3_h", units::m3s_to_m3h(b.flow_min_m3s)},
                          {"flow_max_m3_h", units::m3s_to_m3h(b.flow_max_m3s)}};
    };
    if (n.producer) jn["producer"] = bid_json(*n.producer);
    if (n.consumer) jn["consumer"] = bid_json(*n.consumer);
    doc["nodes"].push_back(std::move(jn));
  }
  doc["pipes"] = ordered_json::array();
  for (const Pipe& p : net.pipes) {
    doc["pipes"].push_back(ordered_json{{"id", p.id},
                                        {"from", p.from_node},
                                        {"to", p.to_node},
                                        {"length_m", p.length_m},
                                        {"diameter_m", p.diameter_m},
                                        {"beta_s2_m", p.leibenzon_beta_s2m},
                                        {"flow_exponent", p.flow_exponent},
                                        {"roughness_m", p.roughness_m},
                                        {"flow_min_m3_h", units::m3s_to_m3h(p.flow_min_m3s)},
                                        {"flow_max_m3_h", units::m3s_to_m3h(p.flow_max_m3s)}});
  }
  doc["pumps"] = ordered_json::array();
  for (const Pump& p : net.pumps) {
    doc["pumps"].push_back(ordered_json{{"id", p.id},
                                        {"from", p.from_node},
                                        {"to", p.to_node},
                                        {"a0_m", p.a0_m},
                                        {"a1_s2_m5", p.a1_s2m5},
                                        {"flow_nom_m3_h", units::m3s_to_m3h(p.flow_nom_m3s)},
                                        {"speed_nom_rpm", p.speed_nom_rpm},
                                        {"eff_nom", p.eff_nom},
                                        {"motor_eff", p.motor_eff},
                                        {"transmission_eff", p.transmission_eff},
                                        {"electricity_price_usd_kwh", p.electricity_price_per_kwh},
                                        {"head_gain_min_m", p.head_gain_min_m},
                                        {"head_gain_max_m", p.head_gain_max_m},
                                        {"flow_factor_lo", p.flow_factor_lo},
                                        {"flow_factor_hi", p.flow_factor_hi},
                                        {"speed_factor_lo", p.speed_factor_lo},
                                        {"speed_factor_hi", p.speed_factor_hi},
                                        {"eff_factor_lo", p.eff_factor_lo}});
  }
  return doc.dump(2) + "\n";
}

bool is_valid(const std::vector<Diagnostic>& diags) {
  return std::none_of(diags.begin(), diags.end(), [](const Diagnostic& d) {
    return d.severity == Diagnostic::Severity::Error;
  });
}

std::vector<Diagnostic> validate_network(const Network& net) {
  std::vector<Diagnostic> out;
  auto error = [&](const std::string& id, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Error, id, msg});
  };
  auto warn = [&](const std::string& id, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Warning, id, msg});
  };

  if (net.fluid.density_kg_m3 <= 0.0) error("fluid", "density must be positive");
  if (net.fluid.kinematic_viscosity_m2s <= 0.0) error("fluid", "viscosity must be positive");
  if (net.nodes.empty()) error("network", "no nodes");

  std::set<std::string> node_ids, edge_ids;
  for (const Node& n : net.nodes) {
    if (!node_ids.insert(n.id).second) error(n.id, "duplicate node id");
    if (n.head_min_m < 0.0) error(n.id, "head lower bound negative");
    if (n.head_min_m >= n.head_max_m) error(n.id, "head bounds empty (min >= max)");
    for (const auto* bid : {n.producer ? &*n.producer : nullptr, n.consumer ? &*n.consumer : nullptr}) {
      if (!bid) continue;
      if (bid->flow_min_m3s < 0.0 || bid->flow_min_m3s > bid->flow_max_m3s)
        error(n.id, "bid flow window invalid (need 0 <= min <= max)");
    }
  }

  auto check_endpoint = [&](const std::string& eid, const std::string& nid) {
    if (net.node_index(nid) < 0) error(eid, "references unknown node '" + nid + "'");
  };
  for (const Pipe& p : net.pipes) {
    if (!edge_ids.insert(p.id).second) error(p.id, "duplicate edge id");
    check_endpoint(p.id, p.from_node);
    check_endpoint(p.id, p.to_node);
    if (p.from_node == p.to_node) error(p.id, "self-loop");
    if (p.length_m <= 0.0) error(p.id, "length must be positive");
    if (p.diameter_m <= 0.0) error(p.id, "diameter must be positive");
    if (p.leibenzon_beta_s2m <= 0.0) error(p.id, "beta must be positive");
    if (p.flow_exponent < 0.0 || p.flow_exponent >= 1.0) error(p.id, "flow exponent outside [0, 1)");
    if (!(p.flow_min_m3s > 0.0) || p.flow_min_m3s > p.flow_max_m3s)
      error(p.id, "flow bounds invalid (need 0 < min <= max)");
  }
  for (const Pump& p : net.pumps) {
    if (!edge_ids.insert(p.id).second) error(p.id, "duplicate edge id");
    check_endpoint(p.id, p.from_node);
    check_endpoint(p.id, p.to_node);
    if (p.from_node == p.to_node) error(p.id, "self-loop");
    if (p.a0_m <= 0.0) error(p.id, "a0 must be positive");
    if (p.a1_s2m5 < 0.0) error(p.id, "a1 must be nonnegative");
    if (!(p.eff_nom > 0.0 && p.eff_nom <= 1.0)) error(p.id, "nominal efficiency outside (0, 1]");
    if (!(p.motor_eff > 0.0 && p.motor_eff <= 1.0)) error(p.id, "motor efficiency outside (0, 1]");
    if (!(p.transmission_eff > 0.0 && p.transmission_eff <= 1.0))
      error(p.id, "transmission efficiency outside (0, 1]");
    if (p.electricity_price_per_kwh < 0.0) error(p.id, "electricity price negative");
    if (!(p.flow_factor_lo > 0.0 && p.flow_factor_lo < p.flow_factor_hi))
      error(p.id, "flow factor window invalid");
    if (!(p.speed_factor_lo > 0.0 && p.speed_factor_lo < p.speed_factor_hi))
      error(p.id, "speed factor window invalid");
    if (!(p.eff_factor_lo > 0.0 && p.eff_factor_lo <= 1.0))
      error(p.id, "efficiency factor invalid");
    if (p.head_gain_min_m > p.head_gain_max_m) error(p.id, "head gain bounds empty");

    // Suspicious but not fatal: pump flow window disjoint from the flow
    // bounds of every incident pipe.
    const double lo = p.flow_factor_lo * p.flow_nom_m3s;
    const double hi = p.flow_factor_hi * p.flow_nom_m3s;
    bool any_incident = false, any_overlap = false;
    for (const Pipe& pipe : net.pipes) {
      const bool incident = pipe.from_node == p.from_node || pipe.to_node == p.from_node ||
                            pipe.from_node == p.to_node || pipe.to_node == p.to_node;
      if (!incident) continue;
      any_incident = true;
      if (lo <= pipe.flow_max_m3s && pipe.flow_min_m3s <= hi) any_overlap = true;
    }
    if (any_incident && !any_overlap)
      warn(p.id, "pump flow window disjoint from all incident pipe flow bounds");
  }

  // Connectivity over the undirected edge set.
  if (!net.nodes.empty() && is_valid(out)) {
    std::vector<std::vector<int>> adj(net.nodes.size());
    auto add_edge = [&](const std::string& a, const std::string& b) {
      int ia = net.node_index(a), ib = net.node_index(b);
      adj[ia].push_back(ib);
      adj[ib].push_back(ia);
    };
    for (const Pipe& p : net.pipes) add_edge(p.from_node, p.to_node);
    for (const Pump& p : net.pumps) add_edge(p.from_node, p.to_node);
    std::vector<bool> seen(net.nodes.size(), false);
    std::queue<int> bfs;
    bfs.push(0);
    seen[0] = true;
    size_t reached = 1;
    while (!bfs.empty()) {
      int v = bfs.front();
      bfs.pop();
      for (int w : adj[v])
        if (!seen[w]) {
          seen[w] = true;
          ++reached;
          bfs.push(w);
        }
    }
    if (reached != net.nodes.size()) error("network", "graph not connected");
  }

  // Aggregate feasibility: supply and demand windows must overlap.
  double s_min = 0.0, s_max = 0.0, d_min = 0.0, d_max = 0.0;
  for (const Node& n : net.nodes) {
    if (n.producer) {
      s_min += n.producer->flow_min_m3s;
      s_max += n.producer->flow_max_m3s;
    }
    if (n.consumer) {
      d_min += n.consumer->flow_min_m3s;
      d_max += n.consumer->flow_max_m3s;
    }
  }
  if (s_min > d_max) error("network", "aggregate minimum supply exceeds maximum demand");
  if (d_min > s_max) error("network", "aggregate minimum demand exceeds maximum supply");

  return out;
}

}  // namespace pipeopt
