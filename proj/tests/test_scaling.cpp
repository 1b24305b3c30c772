#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "decaylab/errors.hpp"
#include "decaylab/scaling.hpp"

using decaylab::DomainError;
using decaylab::InsufficientData;
using decaylab::Kinematics;
using decaylab::QuadratureConfig;
using decaylab::TimeGrid;
using decaylab::Window;

TEST_CASE("power-law fit recovers exact exponents") {
  std::vector<std::pair<double, double>> series;
  for (int i = 0; i < 10; ++i) {
    double tau = 60.0 + 15.0 * i;
    series.push_back({tau, 3.7 * std::pow(tau, -3.0)});
  }
  auto fit = decaylab::fit_power_law(series, Window{50.0, 250.0});
  CHECK(std::abs(fit.slope + 3.0) < 1e-12);
  CHECK(std::abs(std::exp(fit.intercept) - 3.7) < 1e-10);
  CHECK(fit.residual_rms < 1e-12);
  CHECK(fit.points_used == 10);

  std::vector<std::pair<double, double>> flat;
  for (int i = 0; i < 6; ++i) flat.push_back({80.0 + 10.0 * i, 0.25});
  auto c = decaylab::fit_power_law(flat, Window{});
  CHECK(std::abs(c.slope) < 1e-13);
}

TEST_CASE("power-law fit rejects unusable input") {
  std::vector<std::pair<double, double>> few = {
      {90.0, 1.0}, {100.0, 0.9}, {110.0, 0.8}, {120.0, 0.7}};
  CHECK_THROWS_AS(decaylab::fit_power_law(few, Window{}), InsufficientData);

  std::vector<std::pair<double, double>> wide = {
      {10.0, 1.0}, {90.0, 1.0},  {100.0, 0.9},
      {110.0, 0.8}, {120.0, 0.7}, {500.0, 0.1}};
  // window filtering drops the outliers, leaving too few points
  CHECK_THROWS_AS(decaylab::fit_power_law(wide, Window{}), InsufficientData);

  std::vector<std::pair<double, double>> neg = {
      {90.0, 1.0}, {100.0, -0.9}, {110.0, 0.8}, {120.0, 0.7}, {130.0, 0.6}};
  CHECK_THROWS_AS(decaylab::fit_power_law(neg, Window{}), DomainError);
}

TEST_CASE("scaling ratio is exactly one at rest") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto grid = TimeGrid::linear(5.0, 50.0, 10);
  auto curve = decaylab::scaling_ratio_curve(mdd, 0.0, grid, cfg);
  REQUIRE(curve.size() == 10);
  for (const auto& [tau, ratio] : curve) CHECK(ratio == 1.0);
}

TEST_CASE("dilated time reproduces the rest-frame decay curve") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  TimeGrid grid;
  grid.points = {150.0};
  for (double rho : {2.0, 3.0}) {
    auto curve = decaylab::scaling_ratio_curve(mdd, rho, grid, cfg);
    auto model =
        decaylab::long_time_model(mdd, Kinematics::make(rho, 1.0));
    double measured = (curve[0].second - 1.0) * 150.0 * 150.0;
    INFO("rho=" << rho << " measured=" << measured
                << " kappa=" << model.kappa_p);
    CHECK(std::abs(measured - model.kappa_p) <
          0.10 * std::abs(model.kappa_p));
    // the correction itself is small, so the ratio sits close to one
    CHECK(std::abs(curve[0].second - 1.0) < 0.01);
  }
}

TEST_CASE("same-time momentum ratio approaches the dilation power") {
  QuadratureConfig cfg;
  TimeGrid grid;
  grid.points = {200.0};
  {
    auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
    auto curve = decaylab::momentum_ratio_curve(mdd, 2.0, grid, cfg);
    CHECK(std::abs(curve[0].second / 5.0 - 1.0) < 0.03);  // chi^2 = 5
  }
  {
    auto mdd = decaylab::make_toy_mdd(1.0, 1.0);
    auto curve = decaylab::momentum_ratio_curve(mdd, 3.0, grid, cfg);
    CHECK(std::abs(curve[0].second / 100.0 - 1.0) < 0.03);  // chi^4 = 100
  }
  // at tau = 0 nothing has decayed yet in either frame
  TimeGrid zero;
  zero.points = {0.0};
  auto mdd = decaylab::make_toy_mdd(1.0, 1.0);
  auto curve = decaylab::momentum_ratio_curve(mdd, 3.0, zero, cfg);
  CHECK(std::abs(curve[0].second - 1.0) < 1e-12);
}

TEST_CASE("scaling verification passes for the reference density") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto rep = decaylab::verify_scaling(mdd, 2.0, Window{}, cfg);
  INFO("fitted=" << rep.fitted_correction_coeff
                 << " kappa=" << rep.predicted_kappa_p
                 << " slope=" << rep.fitted_powerlaw_slope);
  CHECK(rep.passed());
  CHECK(rep.kappa_ok);
  CHECK(rep.slope_ok);
  CHECK(std::abs(rep.chi_p - std::sqrt(5.0)) < 1e-14);
  CHECK(std::abs(rep.predicted_slope + 2.0) < 1e-15);
  CHECK(std::abs(rep.predicted_momentum_ratio - 5.0) < 1e-13);
  CHECK(std::abs(rep.momentum_ratio_asymptote / 5.0 - 1.0) < 0.03);
  CHECK(rep.ratio_curve.size() == 25);
  // fitted correction carries the predicted sign
  CHECK(rep.fitted_correction_coeff * rep.predicted_kappa_p > 0.0);
}

TEST_CASE("scaling verification in the degenerate rest case") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  auto rep = decaylab::verify_scaling(mdd, 0.0, Window{}, cfg);
  CHECK(rep.passed());
  CHECK(rep.fitted_correction_coeff == 0.0);
  CHECK(rep.predicted_kappa_p == 0.0);
  CHECK(rep.chi_p == 1.0);
  for (const auto& [tau, ratio] : rep.ratio_curve) CHECK(ratio == 1.0);
}

TEST_CASE("scaling verification rejects bad windows") {
  QuadratureConfig cfg;
  auto mdd = decaylab::make_toy_mdd(0.0, 1.0);
  CHECK_THROWS_AS(decaylab::verify_scaling(mdd, 1.0, Window{-1.0, 10.0}, cfg),
                  DomainError);
  CHECK_THROWS_AS(decaylab::verify_scaling(mdd, 1.0, Window{100.0, 50.0}, cfg),
                  DomainError);
}
