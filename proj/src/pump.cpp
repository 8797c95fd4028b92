#include "pipeopt/pump.hpp"

#include <stdexcept>

#include "pipeopt/units.hpp"

namespace pipeopt::pump_model {

double head_gain(double speed_rpm, double flow_m3s, const Pump& pump) {
  if (speed_rpm <= 0.0) throw std::domain_error("head_gain: speed must be positive");
  const double w = speed_rpm / pump.speed_nom_rpm;
  return pump.a0_m * w * w - pump.a1_s2m5 * flow_m3s * flow_m3s;
}

HeadGainDerivs head_gain_derivs(double speed_rpm, double flow_m3s, const Pump& pump) {
  if (speed_rpm <= 0.0) throw std::domain_error("head_gain: speed must be positive");
  const double wn = pump.speed_nom_rpm;
  const double w = speed_rpm / wn;
  HeadGainDerivs d;
  d.value = pump.a0_m * w * w - pump.a1_s2m5 * flow_m3s * flow_m3s;
  d.d_dQ = -2.0 * pump.a1_s2m5 * flow_m3s;
  d.d_dOmega = 2.0 * pump.a0_m * w / wn;
  d.d2_dQ2 = -2.0 * pump.a1_s2m5;
  d.d2_dOmega2 = 2.0 * pump.a0_m / (wn * wn);
  return d;
}

double efficiency(double flow_m3s, double speed_rpm, const Pump& pump) {
  return efficiency_derivs(flow_m3s, speed_rpm, pump).value;
}

EfficiencyDerivs efficiency_derivs(double flow_m3s, double speed_rpm, const Pump& pump) {
  if (speed_rpm <= 0.0) throw std::domain_error("efficiency: speed must be positive");
  if (flow_m3s < 0.0) throw std::domain_error("efficiency: flow must be nonnegative");
  const double qn = pump.flow_nom_m3s;
  const double wn = pump.speed_nom_rpm;
  const double en = pump.eff_nom;
  const double u = flow_m3s / qn;
  const double w = speed_rpm / wn;
  // eta = en - en*(u - w)^2 / w^2 = en - en*(u/w - 1)^2
  const double t = u / w - 1.0;
  EfficiencyDerivs d;
  d.value = en - en * t * t;
  const double dt_dQ = 1.0 / (w * qn);
  const double dt_dW = -u / (w * w);
  d.d_dQ = -2.0 * en * t * dt_dQ;
  d.d_dOmega = -2.0 * en * t * dt_dW / wn;
  d.d2_dQ2 = -2.0 * en * dt_dQ * dt_dQ;
  // d/dw of (t * dt_dQ): dt_dW*dt_dQ + t * d(dt_dQ)/dw, d(dt_dQ)/dw = -1/(w^2 qn)
  d.d2_dQdOmega = -2.0 * en * (dt_dW * dt_dQ + t * (-1.0 / (w * w * qn))) / wn;
  // d/dw of (t * dt_dW): dt_dW^2 + t * d(dt_dW)/dw, d(dt_dW)/dw = 2u/w^3
  d.d2_dOmega2 = -2.0 * en * (dt_dW * dt_dW + t * (2.0 * u / (w * w * w))) / (wn * wn);
  return d;
}

double power(double flow_m3s, double head_gain_m, double eff, const Fluid& fluid,
             const Pump& pump) {
  if (eff <= 0.0 || pump.motor_eff <= 0.0 || pump.transmission_eff <= 0.0)
    throw std::domain_error("power: efficiencies must be positive");
  return fluid.density_kg_m3 * units::kGravity * flow_m3s * head_gain_m /
         (eff * pump.motor_eff * pump.transmission_eff);
}

double cost_rate(double power_w, double price_per_kwh) {
  return power_w / units::kWattsPerKilowatt * price_per_kwh;
}

}  // namespace pipeopt::pump_model
