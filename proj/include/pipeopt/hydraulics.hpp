#pragma once

namespace pipeopt {

struct Pipe;

namespace hydraulics {

/// Reynolds number for volumetric pipe flow, Re = 4Q/(pi*D*nu).
/// Throws std::domain_error for D <= 0 or nu <= 0.
double reynolds(double flow_m3s, double diameter_m, double kinematic_viscosity_m2s);

/// Which condition delimits the fully rough regime. The published four-branch
/// formula uses Re > 500*(roughness/D), which leaves the transition branch
/// empty for realistic roughness; Conventional switches to Re > 500*(D/roughness).
enum class RoughRegimeBound {
  AsPublished,
  Conventional,
};

/// Piecewise friction factor lambda(Re, eps) with eps = roughness/D.
/// Branches: 64/Re (laminar), 0.3164/Re^0.25 (Blasius),
/// 0.11*(68/Re + eps)^0.25 (transition), 0.11*eps^0.25 (fully rough).
/// Diagnostic only; the optimization path uses the Leibenzon gradient.
double friction_factor(double reynolds_number, double relative_roughness,
                       RoughRegimeBound bound = RoughRegimeBound::AsPublished);

/// Leibenzon friction head gradient, m of head per m of pipe length:
///   1.02 * beta * Q^(2-m) * nu^m / D^(5-m).
/// Strictly increasing in Q for Q > 0. Throws for D <= 0, nu <= 0 or Q < 0.
double leibenzon_gradient(double flow_m3s, double kinematic_viscosity_m2s,
                          double diameter_m, double flow_exponent, double beta_s2m);

/// Value and analytic partials of the steady pipe (Bernoulli) residual
///   (H_i - H_j) - (z_j - z_i) - leibenzon_gradient(Q) * L.
struct PipeResidualDerivatives {
  double value;   ///< m
  double d_dHi;   ///< always +1
  double d_dHj;   ///< always -1
  double d_dQ;    ///< s/m^2, per unit of m^3/s
  double d2_dQ2;  ///< second partial in Q (Hessian contribution)
};

/// Residual of the steady Bernoulli pipe equation with analytic derivatives.
/// Defined off the feasible box for line searches: the friction power law
/// Q^(2-m) is replaced below eps_flow by a C^1 quadratic stub, and negative
/// flows contribute no friction loss.
PipeResidualDerivatives pipe_residual(double head_i_m, double head_j_m, double flow_m3s,
                                      const Pipe& pipe, double kinematic_viscosity_m2s,
                                      double elevation_i_m, double elevation_j_m);

/// Q^(2-m) with the C^1 quadratic stub below eps_flow; exposed for tests.
/// Returns value and first/second derivatives in Q.
struct PowerLawEval {
  double value;
  double d1;
  double d2;
};
PowerLawEval smoothed_flow_power(double flow_m3s, double flow_exponent);

inline constexpr double kFlowSmoothingEps = 1e-12;

}  // namespace hydraulics
}  // namespace pipeopt
