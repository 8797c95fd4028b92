#pragma once

#include "pipeopt/network.hpp"

namespace pipeopt::pump_model {

/// Head gain a0*(w/w_nom)^2 - a1*Q^2 across a variable frequency drive pump.
/// Throws std::domain_error for speed <= 0.
double head_gain(double speed_rpm, double flow_m3s, const Pump& pump);

/// Partials of head_gain with respect to (flow, speed).
struct HeadGainDerivs {
  double value;
  double d_dQ;
  double d_dOmega;
  double d2_dQ2;
  double d2_dOmega2;
};
HeadGainDerivs head_gain_derivs(double speed_rpm, double flow_m3s, const Pump& pump);

/// Efficiency surface eta_nom - (Q/Q_nom - w/w_nom)^2 * eta_nom * (w_nom/w)^2.
/// Attains eta_nom exactly on the affinity line Q/Q_nom = w/w_nom.
double efficiency(double flow_m3s, double speed_rpm, const Pump& pump);

struct EfficiencyDerivs {
  double value;
  double d_dQ;
  double d_dOmega;
  double d2_dQ2;
  double d2_dQdOmega;
  double d2_dOmega2;
};
EfficiencyDerivs efficiency_derivs(double flow_m3s, double speed_rpm, const Pump& pump);

/// Electric power draw rho*g*Q*dH/(eta*eta_em*eta_mt) in W.
double power(double flow_m3s, double head_gain_m, double efficiency, const Fluid& fluid,
             const Pump& pump);

/// Operating cost rate in $/h for a given electric power in W and price in $/kWh.
double cost_rate(double power_w, double price_per_kwh);

}  // namespace pipeopt::pump_model
