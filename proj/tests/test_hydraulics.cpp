#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "pipeopt/hydraulics.hpp"
#include "pipeopt/network.hpp"

using namespace pipeopt;
using namespace pipeopt::hydraulics;

namespace {

Pipe seaway_pipe(double length_m) {
  Pipe p;
  p.id = "L";
  p.length_m = length_m;
  p.diameter_m = 0.76;
  p.leibenzon_beta_s2m = 0.0246;
  p.flow_exponent = 0.25;
  p.roughness_m = 2e-4;
  return p;
}

}  // namespace

TEST_CASE("reynolds number") {
  CHECK(reynolds(1.0, 0.76, 4.9e-6) == doctest::Approx(341901.05927367427).epsilon(1e-14));
  CHECK(reynolds(0.0, 0.76, 4.9e-6) == 0.0);
  CHECK_THROWS_AS(reynolds(1.0, 0.0, 4.9e-6), std::domain_error);
  CHECK_THROWS_AS(reynolds(1.0, 0.76, -1.0), std::domain_error);
}

TEST_CASE("friction factor branches") {
  const double eps = 2e-4 / 0.76;
  CHECK(friction_factor(1000.0, eps) == doctest::Approx(0.064).epsilon(1e-15));
  CHECK(friction_factor(1e4, eps) == doctest::Approx(0.03164).epsilon(1e-14));
  // With the published bound (Re > 500*eps) the transition branch is empty
  // for realistic roughness; the conventional bound keeps it reachable.
  CHECK(friction_factor(1e6, eps, RoughRegimeBound::AsPublished) ==
        doctest::Approx(0.01401027906817786).epsilon(1e-14));
  CHECK(friction_factor(1e6, eps, RoughRegimeBound::Conventional) ==
        doctest::Approx(0.014838891639047629).epsilon(1e-14));
  CHECK(friction_factor(1e7, eps, RoughRegimeBound::Conventional) ==
        doctest::Approx(0.01401027906817786).epsilon(1e-14));
  CHECK_THROWS_AS(friction_factor(0.0, eps), std::domain_error);
  CHECK_THROWS_AS(friction_factor(1e4, 0.0), std::domain_error);
}

TEST_CASE("leibenzon gradient values") {
  // Independent evaluation of 1.02*beta*Q^1.75*nu^0.25/D^4.75.
  CHECK(leibenzon_gradient(1.0, 4.9e-6, 0.76, 0.25, 0.0246) ==
        doctest::Approx(0.0043473012449281485).epsilon(1e-14));
  CHECK(leibenzon_gradient(0.7, 4.9e-6, 0.76, 0.25, 0.0246) ==
        doctest::Approx(0.0023288488675020265).epsilon(1e-14));
  CHECK(leibenzon_gradient(1.5, 4.9e-6, 0.76, 0.25, 0.0246) ==
        doctest::Approx(0.008838517759228457).epsilon(1e-14));
  CHECK(leibenzon_gradient(1.0, 1e-5, 0.5, 0.1, 0.03) ==
        doctest::Approx(0.2889138790121911).epsilon(1e-14));
  CHECK_THROWS_AS(leibenzon_gradient(-1.0, 4.9e-6, 0.76, 0.25, 0.0246), std::domain_error);
  CHECK_THROWS_AS(leibenzon_gradient(1.0, 4.9e-6, -0.76, 0.25, 0.0246), std::domain_error);
}

TEST_CASE("leibenzon gradient strictly increasing in flow") {
  double prev = 0.0;
  for (double q = 0.05; q <= 2.0; q += 0.05) {
    const double g = leibenzon_gradient(q, 4.9e-6, 0.76, 0.25, 0.0246);
    CHECK(g > prev);
    prev = g;
  }
}

TEST_CASE("smoothed flow power matches pure power law above the stub") {
  const auto pw = smoothed_flow_power(1.3, 0.25);
  CHECK(pw.value == doctest::Approx(std::pow(1.3, 1.75)).epsilon(1e-15));
  CHECK(pw.d1 == doctest::Approx(1.75 * std::pow(1.3, 0.75)).epsilon(1e-15));
  CHECK(pw.d2 == doctest::Approx(1.75 * 0.75 * std::pow(1.3, -0.25)).epsilon(1e-15));
}

TEST_CASE("smoothed flow power is C1 across the stub boundary") {
  const double eps = kFlowSmoothingEps;
  const auto lo = smoothed_flow_power(eps * (1.0 - 1e-9), 0.25);
  const auto hi = smoothed_flow_power(eps * (1.0 + 1e-9), 0.25);
  CHECK(lo.value == doctest::Approx(hi.value).epsilon(1e-6));
  CHECK(lo.d1 == doctest::Approx(hi.d1).epsilon(1e-6));
  // The stub reaches zero value and slope b >= 0 at the origin.
  const auto zero = smoothed_flow_power(0.0, 0.25);
  CHECK(zero.value == 0.0);
  CHECK(smoothed_flow_power(-1.0, 0.25).value == 0.0);
}

TEST_CASE("pipe residual value and analytic derivatives") {
  const Pipe pipe = seaway_pipe(90000.0);
  const auto r = pipe_residual(200.0, 150.0, 1.0, pipe, 4.9e-6, 290.0, 270.0);
  CHECK(r.value == doctest::Approx(-321.25711204353337).epsilon(1e-12));
  CHECK(r.d_dHi == 1.0);
  CHECK(r.d_dHj == -1.0);
  CHECK(r.d_dQ == doctest::Approx(-684.6999460761833).epsilon(1e-12));

  // Zero flow: residual reduces to head difference minus elevation gain.
  const auto r0 = pipe_residual(100.0, 80.0, 0.0, pipe, 4.9e-6, 50.0, 40.0);
  CHECK(r0.value == doctest::Approx((100.0 - 80.0) - (40.0 - 50.0)).epsilon(1e-15));
  CHECK(r0.d_dQ == 0.0);
}

TEST_CASE("pipe residual flow derivative matches finite differences") {
  const Pipe pipe = seaway_pipe(90000.0);
  const double h = 1e-6;
  for (double q : {0.3, 0.8, 1.0, 1.39}) {
    const auto up = pipe_residual(200.0, 150.0, q + h, pipe, 4.9e-6, 290.0, 270.0);
    const auto dn = pipe_residual(200.0, 150.0, q - h, pipe, 4.9e-6, 290.0, 270.0);
    const auto mid = pipe_residual(200.0, 150.0, q, pipe, 4.9e-6, 290.0, 270.0);
    const double fd = (up.value - dn.value) / (2.0 * h);
    CHECK(mid.d_dQ == doctest::Approx(fd).epsilon(1e-8));
    const double fd2 = (up.d_dQ - dn.d_dQ) / (2.0 * h);
    CHECK(mid.d2_dQ2 == doctest::Approx(fd2).epsilon(1e-6));
  }
}
