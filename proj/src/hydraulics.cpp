#include "pipeopt/hydraulics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pipeopt/network.hpp"

namespace pipeopt::hydraulics {

double reynolds(double flow_m3s, double diameter_m, double kinematic_viscosity_m2s) {
  if (diameter_m <= 0.0) throw std::domain_error("reynolds: diameter must be positive");
  if (kinematic_viscosity_m2s <= 0.0)
    throw std::domain_error("reynolds: viscosity must be positive");
  return 4.0 * flow_m3s / (std::numbers::pi * diameter_m * kinematic_viscosity_m2s);
}

double friction_factor(double reynolds_number, double relative_roughness,
                       RoughRegimeBound bound) {
  if (reynolds_number <= 0.0)
    throw std::domain_error("friction_factor: Reynolds number must be positive");
  if (relative_roughness <= 0.0)
    throw std::domain_error("friction_factor: relative roughness must be positive");

  const double re = reynolds_number;
  const double eps = relative_roughness;
  if (re < 2320.0) return 64.0 / re;
  if (re < 1e5) return 0.3164 / std::pow(re, 0.25);
  const double rough_bound =
      bound == RoughRegimeBound::AsPublished ? 500.0 * eps : 500.0 / eps;
  if (re < rough_bound) return 0.11 * std::pow(68.0 / re + eps, 0.25);
  return 0.11 * std::pow(eps, 0.25);
}

PowerLawEval smoothed_flow_power(double flow_m3s, double flow_exponent) {
  const double p = 2.0 - flow_exponent;
  const double eps = kFlowSmoothingEps;
  if (flow_m3s >= eps) {
    const double v = std::pow(flow_m3s, p);
    return {v, p * v / flow_m3s, p * (p - 1.0) * v / (flow_m3s * flow_m3s)};
  }
  if (flow_m3s <= 0.0) return {0.0, 0.0, 0.0};
  // C^1 quadratic stub a*Q^2 + b*Q matching value and slope at eps.
  const double a = (1.0 - flow_exponent) * std::pow(eps, -flow_exponent);
  const double b = flow_exponent * std::pow(eps, 1.0 - flow_exponent);
  return {a * flow_m3s * flow_m3s + b * flow_m3s, 2.0 * a * flow_m3s + b, 2.0 * a};
}

double leibenzon_gradient(double flow_m3s, double kinematic_viscosity_m2s,
                          double diameter_m, double flow_exponent, double beta_s2m) {
  if (diameter_m <= 0.0)
    throw std::domain_error("leibenzon_gradient: diameter must be positive");
  if (kinematic_viscosity_m2s <= 0.0)
    throw std::domain_error("leibenzon_gradient: viscosity must be positive");
  if (flow_m3s < 0.0) throw std::domain_error("leibenzon_gradient: flow must be nonnegative");
  const double scale = 1.02 * beta_s2m * std::pow(kinematic_viscosity_m2s, flow_exponent) /
                       std::pow(diameter_m, 5.0 - flow_exponent);
  return scale * smoothed_flow_power(flow_m3s, flow_exponent).value;
}

PipeResidualDerivatives pipe_residual(double head_i_m, double head_j_m, double flow_m3s,
                                      const Pipe& pipe, double kinematic_viscosity_m2s,
                                      double elevation_i_m, double elevation_j_m) {
  const double scale = 1.02 * pipe.leibenzon_beta_s2m *
                       std::pow(kinematic_viscosity_m2s, pipe.flow_exponent) /
                       std::pow(pipe.diameter_m, 5.0 - pipe.flow_exponent) * pipe.length_m;
  const PowerLawEval pw = smoothed_flow_power(flow_m3s, pipe.flow_exponent);
  PipeResidualDerivatives out;
  out.value = (head_i_m - head_j_m) - (elevation_j_m - elevation_i_m) - scale * pw.value;
  out.d_dHi = 1.0;
  out.d_dHj = -1.0;
  out.d_dQ = -scale * pw.d1;
  out.d2_dQ2 = -scale * pw.d2;
  return out;
}

}  // namespace pipeopt::hydraulics
