#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "decaylab/errors.hpp"
#include "decaylab/grid.hpp"
#include "decaylab/kinematics.hpp"
#include "decaylab/mdd.hpp"
#include "decaylab/quadrature.hpp"

using decaylab::AmplitudeForm;
using decaylab::AmplitudeValue;
using decaylab::Complex;
using decaylab::ConvergenceFailure;
using decaylab::DomainError;
using decaylab::Kinematics;
using decaylab::QuadratureConfig;
using decaylab::SeriesFailure;
using decaylab::TimeGrid;

namespace {

struct FrozenPoint {
  double alpha, xi0, rho, tau, re, im;
};

// Reference values computed with a 40-digit arbitrary-precision integrator.
const FrozenPoint kAmplitude[] = {
    {0.0, 1.0, 0.0, 5.0, 0.432759379155419237, -0.00154652856871595208},
    {0.0, 1.0, 0.0, 100.0, 0.0103019742743529731, -0.0171484515327723658},
    {1.0, 1.0, 2.0, 50.0, -0.000991810082767286884, -0.0079133000589807705},
    {2.0, 1.0, 4.0, 60.0, 0.00235510225193925741, -0.000953032359022974528},
    {0.5, 1.0, 3.0, 25.0, 0.0999101855330865972, 0.07137558514788114},
    {2.0, 1.0, 0.0, 200.0, -8.73757548489451091e-7, 4.8744085302163147e-7},
    {0.0, 1.0, 0.0, 0.01, 0.999900002083311111, -0.0137888493872461562},
    {1.0, 1.0, 0.0, 1.0, -0.103675011733524034, -0.924373283888077023},
    {0.5, 2.0, 1.0, 10.0, 0.148544659995176596, 0.232490027840938441},
    {1.5, 0.5, 2.0, 30.0, -0.00620624036737994994, -0.00318515205318800106},
};

const FrozenPoint kDerivative[] = {
    {0.0, 1.0, 0.0, 5.0, -0.0931547344869710293, -0.471890024687807268},
    {1.0, 1.0, 2.0, 50.0, -0.0176792510462546884, 0.00253632046302972067},
    {2.0, 1.0, 4.0, 60.0, -0.00405162165187861846, -0.00967845013052667213},
    {0.5, 1.0, 3.0, 25.0, 0.220981739919537202, -0.321400881097920769},
    {1.0, 1.0, 0.0, 1.0, -1.52742945201550696, 0.305955314095836099},
};

Kinematics kin_of(const FrozenPoint& p) {
  return Kinematics::make(p.rho, p.xi0);
}

}  // namespace

TEST_CASE("amplitude reproduces frozen reference values") {
  QuadratureConfig cfg;
  for (const auto& p : kAmplitude) {
    auto mdd = decaylab::make_toy_mdd(p.alpha, p.xi0);
    auto a = decaylab::amplitude(mdd, kin_of(p), p.tau, cfg);
    INFO("alpha=" << p.alpha << " xi0=" << p.xi0 << " rho=" << p.rho
                  << " tau=" << p.tau);
    CHECK(std::abs(a.value.real() - p.re) < 1e-13);
    CHECK(std::abs(a.value.imag() - p.im) < 1e-13);
    CHECK(a.abs_error_estimate < cfg.target_abs_error);
    CHECK(std::abs(a.value) <= 1.0 + 1e-12);
    CHECK(a.tau == p.tau);
  }
}

TEST_CASE("amplitude derivative reproduces frozen reference values") {
  QuadratureConfig cfg;
  for (const auto& p : kDerivative) {
    auto mdd = decaylab::make_toy_mdd(p.alpha, p.xi0);
    auto da = decaylab::amplitude_derivative(mdd, kin_of(p), p.tau, cfg);
    INFO("alpha=" << p.alpha << " rho=" << p.rho << " tau=" << p.tau);
    CHECK(std::abs(da.value.real() - p.re) < 2e-13);
    CHECK(std::abs(da.value.imag() - p.im) < 2e-13);
  }
}

TEST_CASE("amplitude at tau=0 is exactly the density normalization") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.5, 1.0);
  auto kin = Kinematics::make(2.0, 1.0);
  for (auto form : {AmplitudeForm::xi_form, AmplitudeForm::eta_form}) {
    auto a = decaylab::amplitude(mdd, kin, 0.0, cfg, form);
    CHECK(std::abs(a.value - Complex(1.0, 0.0)) < 1e-12);
  }
}

TEST_CASE("derivative at tau=0 is -i times the first eta moment") {
  // for alpha=0, xi0=1, rho=0 the moment has the closed form
  // 1 + (e sqrt(pi)/2) erfc(1)
  double a0 = 1.0 + 0.5 * std::exp(1.0) * std::sqrt(M_PI) * std::erfc(1.0);
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto da =
      decaylab::amplitude_derivative(mdd, Kinematics::make(0.0, 1.0), 0.0, cfg);
  CHECK(std::abs(da.value.real()) < 1e-12);
  CHECK(std::abs(da.value.imag() + a0) < 1e-12);
}

TEST_CASE("derivative matches a centered finite difference") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(1.0, 1.0);
  auto kin = Kinematics::make(2.0, 1.0);
  for (double tau : {1.0, 5.0, 20.0}) {
    const double h = 1e-4;
    auto up = decaylab::amplitude(mdd, kin, tau + h, cfg);
    auto dn = decaylab::amplitude(mdd, kin, tau - h, cfg);
    auto da = decaylab::amplitude_derivative(mdd, kin, tau, cfg);
    Complex fd = (up.value - dn.value) / (2.0 * h);
    CHECK(std::abs(fd - da.value) / std::abs(da.value) < 1e-6);
  }
}

TEST_CASE("both integration variables give the same amplitude") {
  QuadratureConfig cfg;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> ua(0.0, 2.0), ux(0.5, 2.0),
      ur(0.0, 5.0), ut(0.0, 50.0);
  for (int i = 0; i < 8; ++i) {
    double alpha = ua(rng), xi0 = ux(rng), rho = ur(rng), tau = ut(rng);
    auto mdd = decaylab::make_toy_mdd(alpha, xi0);
    auto kin = Kinematics::make(rho, xi0);
    auto a = decaylab::amplitude(mdd, kin, tau, cfg, AmplitudeForm::xi_form);
    auto b = decaylab::amplitude(mdd, kin, tau, cfg, AmplitudeForm::eta_form);
    INFO("alpha=" << alpha << " xi0=" << xi0 << " rho=" << rho
                  << " tau=" << tau);
    CHECK(std::abs(a.value - b.value) <=
          a.abs_error_estimate + b.abs_error_estimate + 1e-14);
  }
}

TEST_CASE("baseline engine agrees with the reference engine on random draws") {
  QuadratureConfig cfg;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> ua(0.0, 2.0), ux(0.5, 2.0),
      ur(0.0, 5.0), ut(0.0, 200.0);
  for (int i = 0; i < 20; ++i) {
    double alpha = ua(rng), xi0 = ux(rng), rho = ur(rng), tau = ut(rng);
    auto mdd = decaylab::make_toy_mdd(alpha, xi0);
    auto kin = Kinematics::make(rho, xi0);
    auto base = decaylab::amplitude(mdd, kin, tau, cfg);
    auto ref = decaylab::oracle_amplitude(mdd, kin, tau);
    INFO("alpha=" << alpha << " xi0=" << xi0 << " rho=" << rho
                  << " tau=" << tau);
    CHECK(std::abs(base.value - ref.value) <= 1e-11);
    CHECK(std::abs(base.value) <= 1.0 + 1e-12);
    CHECK(ref.abs_error_estimate <= 1e-13);
  }
}

TEST_CASE("negative time gives the conjugate amplitude") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(1.0, 1.0);
  auto kin = Kinematics::make(3.0, 1.0);
  for (double tau : {0.5, 7.0, 33.0}) {
    auto fwd = decaylab::amplitude(mdd, kin, tau, cfg);
    auto bwd = decaylab::amplitude(mdd, kin, -tau, cfg);
    CHECK(bwd.value == std::conj(fwd.value));
  }
}

TEST_CASE("nonfinite time and inconsistent thresholds are rejected") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto kin = Kinematics::make(0.0, 1.0);
  CHECK_THROWS_AS(
      decaylab::amplitude(mdd, kin, std::numeric_limits<double>::infinity(), cfg),
      DomainError);
  CHECK_THROWS_AS(
      decaylab::amplitude(mdd, kin, std::nan(""), cfg), DomainError);
  auto kin2 = Kinematics::make(0.0, 1.5);  // threshold mismatch with mdd
  CHECK_THROWS_AS(decaylab::amplitude(mdd, kin2, 1.0, cfg), DomainError);
}

TEST_CASE("configuration knobs are validated") {
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto kin = Kinematics::make(0.0, 1.0);
  QuadratureConfig bad;
  bad.target_abs_error = 0.0;
  CHECK_THROWS_AS(decaylab::amplitude(mdd, kin, 1.0, bad), DomainError);
  bad = QuadratureConfig{};
  bad.panel_order = 5;
  CHECK_THROWS_AS(decaylab::amplitude(mdd, kin, 1.0, bad), DomainError);
  bad = QuadratureConfig{};
  bad.max_panels = 0;
  CHECK_THROWS_AS(decaylab::amplitude(mdd, kin, 1.0, bad), DomainError);
  bad = QuadratureConfig{};
  bad.truncation_tail_bound = -1.0;
  CHECK_THROWS_AS(decaylab::amplitude(mdd, kin, 1.0, bad), DomainError);
}

TEST_CASE("derivative requires a finite first moment") {
  QuadratureConfig cfg;
  auto bw = decaylab::make_breit_wigner(1.0, 0.2, 0.5);
  auto kin = Kinematics::make(0.0, 0.5);
  CHECK_THROWS_AS(decaylab::amplitude_derivative(bw, kin, 1.0, cfg),
                  DomainError);
}

TEST_CASE("slow power-law tail fails honestly with a carried best value") {
  QuadratureConfig cfg;
  cfg.max_panels = 2000;
  auto bw = decaylab::make_breit_wigner(1.0, 0.2, 0.5);
  auto kin = Kinematics::make(0.0, 0.5);
  bool threw = false;
  try {
    decaylab::amplitude(bw, kin, 1.0, cfg);
  } catch (const ConvergenceFailure& e) {
    threw = true;
    CHECK(e.best().abs_error_estimate > cfg.target_abs_error);
    CHECK(std::abs(e.best().value) <= 1.0 + 1e-6);
    CHECK(std::abs(e.best().value) > 0.1);  // still a usable estimate
    CHECK(std::string(e.what()).find("target") != std::string::npos);
  }
  CHECK(threw);
}

TEST_CASE("tiny panel budgets fail honestly on fast tails too") {
  QuadratureConfig cfg;
  cfg.max_panels = 3;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto kin = Kinematics::make(0.0, 1.0);
  CHECK_THROWS_AS(decaylab::amplitude(mdd, kin, 30.0, cfg), ConvergenceFailure);
}

TEST_CASE("series evaluation is deterministic and order-independent") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(1.0, 1.0);
  auto kin = Kinematics::make(2.0, 1.0);
  auto grid = TimeGrid::linear(0.0, 40.0, 81);

  auto s1 = decaylab::amplitude_series(mdd, kin, grid, cfg, true, 1);
  auto s4 = decaylab::amplitude_series(mdd, kin, grid, cfg, true, 4);
  REQUIRE(s1.values.size() == 81);
  REQUIRE(s1.derivatives.size() == 81);
  for (std::size_t i = 0; i < s1.values.size(); ++i) {
    CHECK(s1.values[i].value == s4.values[i].value);
    CHECK(s1.derivatives[i].value == s4.derivatives[i].value);
    auto solo = decaylab::amplitude(mdd, kin, grid.points[i], cfg);
    CHECK(s1.values[i].value == solo.value);
    CHECK(s1.values[i].abs_error_estimate == solo.abs_error_estimate);
  }

  TimeGrid single;
  single.points = {5.0};
  auto s = decaylab::amplitude_series(mdd, kin, single, cfg);
  REQUIRE(s.values.size() == 1);
  CHECK(s.derivatives.empty());
  CHECK(s.values[0].value == decaylab::amplitude(mdd, kin, 5.0, cfg).value);
}

TEST_CASE("series rejects bad grids and reports the first failing index") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(1.0, 1.0);
  auto kin = Kinematics::make(0.0, 1.0);
  TimeGrid bad;
  bad.points = {1.0, 0.5};
  CHECK_THROWS_AS(decaylab::amplitude_series(mdd, kin, bad, cfg), DomainError);
  TimeGrid empty;
  CHECK_THROWS_AS(decaylab::amplitude_series(mdd, kin, empty, cfg), DomainError);

  auto bw = decaylab::make_breit_wigner(1.0, 0.2, 0.5);
  auto kbw = Kinematics::make(0.0, 0.5);
  QuadratureConfig small = cfg;
  small.max_panels = 2000;
  TimeGrid grid;
  grid.points = {0.5, 1.0};
  bool threw = false;
  try {
    decaylab::amplitude_series(bw, kbw, grid, small);
  } catch (const SeriesFailure& e) {
    threw = true;
    CHECK(e.grid_index() == 0);
    CHECK(std::string(e.what()).find("grid index 0") != std::string::npos);
  }
  CHECK(threw);
  CHECK_THROWS_AS(decaylab::amplitude_series(bw, kbw, grid, cfg, true),
                  DomainError);
}

TEST_CASE("long-time modulus decays with the expected envelope") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto kin = Kinematics::make(0.0, 1.0);
  auto a = decaylab::amplitude(mdd, kin, 100.0, cfg);
  // |A| ~ c0 / tau with c0 = Omega0(xi0) = 2 at rest for alpha = 0
  CHECK(std::abs(std::abs(a.value) * 100.0 / 2.0 - 1.0) < 0.01);
}
