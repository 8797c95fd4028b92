// pipeopt: steady-state liquid pipeline network optimization CLI.
//
// Subcommands: validate, solve, sweep, case-gen, check-derivs.
// Exit codes: 0 ok, 2 validation failure, 3 solver non-optimal, 4 I/O error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pipeopt/formulation.hpp"
#include "pipeopt/network.hpp"
#include "pipeopt/pricing.hpp"
#include "pipeopt/pump.hpp"
#include "pipeopt/seaway.hpp"
#include "pipeopt/solver.hpp"
#include "pipeopt/units.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace pipeopt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNonOptimal = 3;
constexpr int kExitIo = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  const fs::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  out << content;
  if (!out) throw IoError("cannot write '" + path + "'");
}

Formulation parse_formulation(const std::string& text) {
  if (text == "f1") return Formulation::MinOperatingCost;
  if (text == "f2") return Formulation::MaxTransportValue;
  if (text == "f3") return Formulation::MaxTotalValue;
  throw CLI::ValidationError("--formulation must be one of f1, f2, f3");
}

SolverOptions make_options(double tol, int max_iter) {
  SolverOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  if (const char* env = std::getenv("PIPEOPT_TOL")) {
    try {
      opt.tol = std::stod(env);
    } catch (...) {
      throw CLI::ValidationError("PIPEOPT_TOL is not a number");
    }
  }
  return opt;
}

Network load_network(const std::string& path, bool lenient) {
  std::vector<std::string> warnings;
  Network net = parse_network(read_file(path),
                              lenient ? ParseMode::Lenient : ParseMode::Strict, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return net;
}

int require_valid(const Network& net) {
  const auto diags = validate_network(net);
  for (const auto& d : diags)
    std::cerr << (d.severity == Diagnostic::Severity::Error ? "error" : "warning") << " ["
              << d.element_id << "]: " << d.message << "\n";
  return is_valid(diags) ? kExitOk : kExitValidation;
}

// Deterministic multistart: perturb the default start inside the boxes with a
// fixed linear congruential sequence.
SolveResult solve_multistart(const NlpProblem& problem, const SolverOptions& options,
                             int multistart) {
  auto solver = make_default_solver();
  SolveResult best = solver->solve(problem, options);
  if (multistart <= 1) return best;
  std::uint64_t state = 0x9e3779b97f4a7c15ull;
  auto next01 = [&state]() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return static_cast<double>(state >> 11) / 9007199254740992.0;
  };
  for (int k = 1; k < multistart; ++k) {
    NlpProblem variant = problem;
    for (int i = 0; i < problem.n; ++i) {
      const double lo = problem.x_lower[i], up = problem.x_upper[i];
      if (std::isfinite(lo) && std::isfinite(up))
        variant.x_initial[i] = lo + (0.1 + 0.8 * next01()) * (up - lo);
    }
    const SolveResult trial = solver->solve(variant, options);
    const bool better =
        trial.status == SolveStatus::LocallyOptimal &&
        (best.status != SolveStatus::LocallyOptimal ||
         (problem.sense == ObjectiveSense::Maximize ? trial.objective > best.objective
                                                    : trial.objective < best.objective));
    if (better) best = trial;
  }
  return best;
}

ordered_json solution_json(const Network& net, const FormulationKind& kind,
                           const VariableLayout& layout, const SolveResult& result,
                           const SolverOptions& options) {
  ordered_json doc;
  doc["status"] = to_string(result.status);
  doc["objective_usd_h"] = result.objective;
  const ObjectiveTerms terms = objective_terms(net, kind, layout, result.x);
  doc["terms"] = {{"J_E_usd_h", terms.transport_value},
                  {"J_O_usd_h", terms.operating_cost},
                  {"J_P_usd_h", terms.total_value}};
  doc["kkt"] = {{"stationarity", result.kkt.stationarity},
                {"feasibility", result.kkt.feasibility},
                {"complementarity", result.kkt.complementarity}};
  doc["solver"] = {{"iterations", result.iterations},
                   {"wall_time_s", result.wall_time_s},
                   {"acceptance", result.acceptance_scheme},
                   {"tol", options.tol}};

  std::optional<NodalPriceReport> prices;
  if (result.status == SolveStatus::LocallyOptimal)
    prices = nodal_prices(net, kind, layout, result);

  ordered_json nodes = ordered_json::object();
  for (size_t j = 0; j < net.nodes.size(); ++j) {
    const Node& n = net.nodes[j];
    ordered_json jn = {{"head_m", result.x[layout.head.at(static_cast<int>(j))]}};
    if (prices) jn["sigma_usd_m3"] = prices->prices[j].sigma_per_m3;
    const int sv = layout.supply_var_for_node(static_cast<int>(j));
    const int dv = layout.demand_var_for_node(static_cast<int>(j));
    if (sv >= 0) jn["supply_m3_h"] = units::m3s_to_m3h(result.x[sv]);
    if (dv >= 0) jn["demand_m3_h"] = units::m3s_to_m3h(result.x[dv]);
    if (kind.which == Formulation::MinOperatingCost) {
      auto it = kind.fixed_allocation.find(n.id);
      if (it != kind.fixed_allocation.end()) {
        jn["supply_m3_h"] = units::m3s_to_m3h(it->second.supply_m3s);
        jn["demand_m3_h"] = units::m3s_to_m3h(it->second.demand_m3s);
      }
    }
    nodes[n.id] = std::move(jn);
  }
  doc["nodes"] = std::move(nodes);

  ordered_json pipes = ordered_json::object();
  for (size_t i = 0; i < net.pipes.size(); ++i)
    pipes[net.pipes[i].id] = {
        {"flow_m3_h", units::m3s_to_m3h(result.x[layout.q_pipe.at(static_cast<int>(i))])}};
  doc["pipes"] = std::move(pipes);

  ordered_json pumps = ordered_json::object();
  for (size_t i = 0; i < net.pumps.size(); ++i) {
    const Pump& pm = net.pumps[i];
    const int ni = net.node_index(pm.from_node);
    const int nj = net.node_index(pm.to_node);
    const double q = result.x[layout.q_pump.at(static_cast<int>(i))];
    const double eta = result.x[layout.eff.at(static_cast<int>(i))];
    const double dh = result.x[layout.head.at(nj)] - result.x[layout.head.at(ni)] +
                      (net.nodes[nj].elevation_m - net.nodes[ni].elevation_m);
    const double watts = pump_model::power(q, dh, eta, net.fluid, pm);
    pumps[pm.id] = {{"flow_m3_h", units::m3s_to_m3h(q)},
                    {"speed_rpm", result.x[layout.speed.at(static_cast<int>(i))]},
                    {"eff", eta},
                    {"head_gain_m", dh},
                    {"power_kw", watts / units::kWattsPerKilowatt},
                    {"cost_usd_h", pump_model::cost_rate(watts, pm.electricity_price_per_kwh)}};
  }
  doc["pumps"] = std::move(pumps);

  if (prices) {
    ordered_json parts = ordered_json::array();
    for (const auto& p : prices->participants)
      parts.push_back({{"node", p.node_id},
                       {"role", p.is_producer ? "producer" : "consumer"},
                       {"cleared_m3_h", p.cleared_m3h},
                       {"bid_usd_m3", p.bid_per_m3},
                       {"surplus_usd_h", p.surplus_per_h},
                       {"at_bound", p.at_bound}});
    doc["participants"] = std::move(parts);
  }
  return doc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady-state liquid pipeline network optimization"};
  app.require_subcommand(1);

  // validate
  std::string val_input;
  bool val_lenient = false;
  auto* validate_cmd = app.add_subcommand("validate", "Check a network file");
  validate_cmd->add_option("input", val_input, "network JSON file")->required();
  validate_cmd->add_flag("--lenient", val_lenient, "downgrade unknown keys to warnings");

  // shared solve-ish options
  std::string input, formulation = "f3", allocation_path, out_dir = ".", iter_log_path;
  double tol = 1e-8;
  int max_iter = 3000, multistart = 1;
  bool lenient = false, deterministic = true;

  auto add_common = [&](CLI::App* cmd, bool needs_input) {
    if (needs_input) cmd->add_option("input", input, "network JSON file")->required();
    cmd->add_option("--formulation", formulation, "f1 | f2 | f3 (default f3)");
    cmd->add_option("--allocation", allocation_path, "fixed allocation JSON (required for f1)");
    cmd->add_option("--tol", tol, "KKT tolerance (PIPEOPT_TOL env overrides)");
    cmd->add_option("--max-iter", max_iter, "iteration limit");
    cmd->add_flag("--lenient", lenient, "downgrade unknown keys to warnings");
    cmd->add_option("--out", out_dir, "output directory (default .)");
  };

  auto* solve_cmd = app.add_subcommand("solve", "Solve a formulation and write solution JSON");
  add_common(solve_cmd, true);
  solve_cmd->add_option("--multistart", multistart, "number of deterministic start points");
  solve_cmd->add_flag("--deterministic,!--no-deterministic", deterministic,
                      "sequential deterministic execution (default on)");
  solve_cmd->add_option("--iter-log", iter_log_path, "write per-iteration solver log");

  auto* sweep_cmd = app.add_subcommand("sweep", "Bid-price sensitivity sweep to CSV");
  add_common(sweep_cmd, true);
  std::string param;
  double from = 0.0, to = 0.0;
  int steps = 2;
  bool no_warm = false;
  sweep_cmd->add_option("--param", param, "e.g. producer:N9:price")->required();
  sweep_cmd->add_option("--from", from, "first parameter value")->required();
  sweep_cmd->add_option("--to", to, "last parameter value")->required();
  sweep_cmd->add_option("--steps", steps, "number of points (default 2)");
  sweep_cmd->add_flag("--no-warm", no_warm, "disable warm-start chaining");

  auto* casegen_cmd = app.add_subcommand("case-gen", "Write the bundled Seaway-style case");
  casegen_cmd->add_option("--out", out_dir, "output directory (default .)");

  auto* derivs_cmd = app.add_subcommand("check-derivs",
                                        "Finite-difference audit of analytic derivatives");
  add_common(derivs_cmd, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (validate_cmd->parsed()) {
      Network net;
      try {
        net = load_network(val_input, val_lenient);
      } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
      }
      const int rc = require_valid(net);
      if (rc == kExitOk) std::cout << "ok\n";
      return rc;
    }

    if (casegen_cmd->parsed()) {
      const CaseManifest cm = generate_seaway();
      const fs::path dir(out_dir);
      write_file((dir / "seaway.json").string(), cm.network_document());
      write_file((dir / "seaway_allocation.json").string(), cm.allocation_document());
      write_file((dir / "seaway_provenance.json").string(), cm.provenance_document());
      std::cout << "wrote " << (dir / "seaway.json").string() << "\n";
      return kExitOk;
    }

    // Remaining subcommands consume a network + formulation.
    Network net;
    FormulationKind kind;
    try {
      net = load_network(input, lenient);
      kind.which = parse_formulation(formulation);
      if (kind.which == Formulation::MinOperatingCost) {
        if (allocation_path.empty()) {
          std::cerr << "error: f1 requires --allocation\n";
          return kExitValidation;
        }
        kind.fixed_allocation = parse_allocation(read_file(allocation_path));
      }
    } catch (const ParseError& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitValidation;
    }
    if (const int rc = require_valid(net); rc != kExitOk) return rc;
    const SolverOptions base_options = make_options(tol, max_iter);

    if (derivs_cmd->parsed()) {
      const NlpProblem problem = build_nlp(net, kind);
      const DerivativeReport rep = check_derivatives(problem, problem.x_initial);
      std::cout << "max relative error  gradient " << rep.max_rel_err_grad << "  jacobian "
                << rep.max_rel_err_jac << "  hessian " << rep.max_rel_err_hess << "\n";
      return kExitOk;
    }

    if (solve_cmd->parsed()) {
      SolverOptions options = base_options;
      options.deterministic = deterministic;
      std::ofstream iter_log;
      if (!iter_log_path.empty()) {
        iter_log.open(iter_log_path);
        if (!iter_log) throw IoError("cannot write '" + iter_log_path + "'");
        options.iter_log = &iter_log;
      }
      const NlpProblem problem = build_nlp(net, kind);
      const VariableLayout layout = build_layout(net, kind);
      const SolveResult result = solve_multistart(problem, options, multistart);
      const ordered_json doc = solution_json(net, kind, layout, result, options);
      write_file((fs::path(out_dir) / "solution.json").string(), doc.dump(2) + "\n");
      std::cerr << to_string(result.status) << " in " << result.iterations
                << " iterations, objective " << result.objective << " $/h\n";
      return result.status == SolveStatus::LocallyOptimal ? kExitOk : kExitNonOptimal;
    }

    if (sweep_cmd->parsed()) {
      if (steps < 1) throw CLI::ValidationError("--steps must be >= 1");
      SweepSpec spec;
      spec.target = ParameterPath::parse(param);
      spec.kind = kind;
      spec.chain_warm_starts = !no_warm;
      for (int i = 0; i < steps; ++i)
        spec.values.push_back(steps == 1 ? from
                                         : from + (to - from) * i / double(steps - 1));
      const SweepTable table = sweep(net, spec, base_options);
      write_file((fs::path(out_dir) / "sweep.csv").string(), table.to_csv());
      int failures = 0;
      for (const auto& row : table.rows)
        if (row.status != SolveStatus::LocallyOptimal) ++failures;
      std::cerr << table.rows.size() << " rows, " << failures << " non-optimal\n";
      return failures == 0 ? kExitOk : kExitNonOptimal;
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
