#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace pipeopt {

struct Fluid {
  double density_kg_m3 = 0.0;
  double kinematic_viscosity_m2s = 0.0;
};

/// A participant position: price and admissible flow window (SI, m^3/s).
struct Bid {
  double price_per_m3 = 0.0;
  double flow_min_m3s = 0.0;
  double flow_max_m3s = 0.0;
};

struct Node {
  std::string id;
  double elevation_m = 0.0;
  double head_min_m = 0.0;
  double head_max_m = 0.0;
  std::optional<Bid> producer;
  std::optional<Bid> consumer;
};

struct Pipe {
  std::string id;
  std::string from_node;
  std::string to_node;
  double length_m = 0.0;
  double diameter_m = 0.0;
  double leibenzon_beta_s2m = 0.0;
  double flow_exponent = 0.0;  ///< m in Q^(2-m); 0 <= m < 1
  double roughness_m = 0.0;
  double flow_min_m3s = 0.0;
  double flow_max_m3s = 0.0;
};

struct Pump {
  std::string id;
  std::string from_node;
  std::string to_node;
  double a0_m = 0.0;                   ///< shutoff head at nominal speed
  double a1_s2m5 = 0.0;                ///< head droop coefficient, Q in m^3/s
  double flow_nom_m3s = 0.0;
  double speed_nom_rpm = 0.0;
  double eff_nom = 0.0;                ///< fraction in (0, 1]
  double motor_eff = 0.95;
  double transmission_eff = 0.95;
  double electricity_price_per_kwh = 0.0;
  double head_gain_min_m = 0.0;
  double head_gain_max_m = 0.0;
  double flow_factor_lo = 0.8;
  double flow_factor_hi = 1.2;
  double speed_factor_lo = 0.8;
  double speed_factor_hi = 1.2;
  double eff_factor_lo = 0.7;
};

/// Immutable problem instance: connected graph of nodes, pipes and pumps
/// plus fluid properties and participant bids. All quantities SI.
struct Network {
  Fluid fluid;
  std::vector<Node> nodes;
  std::vector<Pipe> pipes;
  std::vector<Pump> pumps;

  int node_index(const std::string& id) const;  ///< -1 when absent
};

/// Parse failure with a human-readable location.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

enum class ParseMode {
  Strict,   ///< unknown keys are an error
  Lenient,  ///< unknown keys produce warnings
};

/// Parses the JSON network document. File units (m^3/h, rpm, $/kWh, km)
/// are converted to SI exactly once here; everything downstream is SI.
/// Throws ParseError on syntax errors, unknown references, duplicate ids,
/// or non-finite / out-of-domain values.
Network parse_network(const std::string& document, ParseMode mode = ParseMode::Strict,
                      std::vector<std::string>* warnings = nullptr);

/// Inverse of parse_network: emits the file format (conventional units).
std::string serialize_network(const Network& net);

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity;
  std::string element_id;
  std::string message;
};

/// Structural and feasibility validation. Pure; empty result means all
/// type invariants hold, the graph is connected, and aggregate supply and
/// demand windows overlap.
std::vector<Diagnostic> validate_network(const Network& net);

/// True when no diagnostic has Severity::Error.
bool is_valid(const std::vector<Diagnostic>& diags);

}  // namespace pipeopt
