#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "decaylab/asymptotics.hpp"
#include "decaylab/observables.hpp"
#include "decaylab/quadrature.hpp"

namespace decaylab {

struct Window {
  double tau_min = 80.0;
  double tau_max = 200.0;
};

struct PowerLawFit {
  double slope = 0.0;
  double intercept = 0.0;  // of log(value) vs log(tau)
  double residual_rms = 0.0;
  int points_used = 0;
};

/// Least-squares fit of log(value) against log(tau) over the window.
inline PowerLawFit fit_power_law(const std::vector<std::pair<double, double>>& series,
                                 const Window& w) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& [tau, v] : series) {
    if (tau < w.tau_min || tau > w.tau_max) continue;
    if (!(tau > 0.0)) throw DomainError("fit_power_law: tau must be > 0 in window");
    if (!(v > 0.0)) throw DomainError("fit_power_law: values must be > 0 in window");
    pts.push_back({std::log(tau), std::log(v)});
  }
  if (pts.size() < 5)
    throw InsufficientData("fit_power_law: need at least 5 points in the window");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(pts.size());
  const double det = n * sxx - sx * sx;
  PowerLawFit fit;
  fit.slope = (n * sxy - sx * sy) / det;
  fit.intercept = (sy * sxx - sx * sxy) / det;
  double ss = 0;
  for (const auto& [x, y] : pts) {
    const double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.residual_rms = std::sqrt(ss / n);
  fit.points_used = static_cast<int>(pts.size());
  return fit;
}

/// P_p(tau) / P_0(tau / chi_p): the time-dilation scaling comparison.  The
/// rest-frame factor is evaluated by fresh quadrature at the scaled time,
/// never interpolated.
inline std::vector<std::pair<double, double>> scaling_ratio_curve(
    const MassDistribution& mdd, double rho, const TimeGrid& grid,
    const QuadratureConfig& cfg) {
  grid.ensure_valid();
  const Kinematics kp = Kinematics::make(rho, mdd.xi0);
  const Kinematics k0 = Kinematics::make(0.0, mdd.xi0);
  const double chi = kp.dilation();
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.points.size());
  for (double tau : grid.points) {
    const double num = survival_probability(amplitude(mdd, kp, tau, cfg));
    const double den = survival_probability(amplitude(mdd, k0, tau / chi, cfg));
    out.push_back({tau, num / den});
  }
  return out;
}

/// P_p(tau) / P_0(tau): same-time ratio between the moving and rest frames.
inline std::vector<std::pair<double, double>> momentum_ratio_curve(
    const MassDistribution& mdd, double rho, const TimeGrid& grid,
    const QuadratureConfig& cfg) {
  grid.ensure_valid();
  const Kinematics kp = Kinematics::make(rho, mdd.xi0);
  const Kinematics k0 = Kinematics::make(0.0, mdd.xi0);
  std::vector<std::pair<double, double>> out;
  out.reserve(grid.points.size());
  for (double tau : grid.points) {
    const double num = survival_probability(amplitude(mdd, kp, tau, cfg));
    const double den = survival_probability(amplitude(mdd, k0, tau, cfg));
    out.push_back({tau, num / den});
  }
  return out;
}

struct ScalingReport {
  double rho = 0.0;
  double chi_p = 1.0;
  Window window;
  std::vector<std::pair<double, double>> ratio_curve;
  double fitted_correction_coeff = 0.0;  // constant fit of (ratio - 1) tau^2
  double predicted_kappa_p = 0.0;
  double fitted_powerlaw_slope = 0.0;
  double predicted_slope = 0.0;  // -2 (1 + alpha)
  double momentum_ratio_asymptote = 0.0;
  double predicted_momentum_ratio = 0.0;  // chi_p^{2(1+alpha)}
  double kappa_rel_tolerance = 0.15;
  double slope_rel_tolerance = 0.02;
  bool kappa_ok = false;
  bool slope_ok = false;
  bool passed() const { return kappa_ok && slope_ok; }
};

inline ScalingReport verify_scaling(const MassDistribution& mdd, double rho,
                                    const Window& window, const QuadratureConfig& cfg) {
  if (!(window.tau_min > 0.0) || !(window.tau_max > window.tau_min))
    throw DomainError("verify_scaling: window must satisfy 0 < tau_min < tau_max");
  const Kinematics kp = Kinematics::make(rho, mdd.xi0);
  const LongTimeModel model = long_time_model(mdd, kp);

  ScalingReport rep;
  rep.rho = rho;
  rep.chi_p = model.chi_p;
  rep.window = window;
  rep.predicted_kappa_p = model.kappa_p;
  rep.predicted_slope = -2.0 * (1.0 + mdd.alpha);
  rep.predicted_momentum_ratio = std::pow(model.chi_p, 2.0 * (1.0 + mdd.alpha));

  const TimeGrid grid = TimeGrid::geometric(window.tau_min, window.tau_max, 25);
  rep.ratio_curve = scaling_ratio_curve(mdd, rho, grid, cfg);

  double acc = 0.0;
  for (const auto& [tau, ratio] : rep.ratio_curve) acc += (ratio - 1.0) * tau * tau;
  rep.fitted_correction_coeff = acc / static_cast<double>(rep.ratio_curve.size());

  std::vector<std::pair<double, double>> survivals;
  survivals.reserve(grid.points.size());
  for (double tau : grid.points)
    survivals.push_back({tau, survival_probability(amplitude(mdd, kp, tau, cfg))});
  rep.fitted_powerlaw_slope = fit_power_law(survivals, window).slope;

  const double tau_end = window.tau_max;
  const Kinematics k0 = Kinematics::make(0.0, mdd.xi0);
  rep.momentum_ratio_asymptote =
      survival_probability(amplitude(mdd, kp, tau_end, cfg)) /
      survival_probability(amplitude(mdd, k0, tau_end, cfg));

  rep.kappa_ok = std::abs(rep.fitted_correction_coeff - rep.predicted_kappa_p) <=
                 std::max(rep.kappa_rel_tolerance * std::abs(rep.predicted_kappa_p), 1e-9);
  rep.slope_ok = std::abs(rep.fitted_powerlaw_slope - rep.predicted_slope) <=
                 rep.slope_rel_tolerance * std::abs(rep.predicted_slope);
  return rep;
}

}  // namespace decaylab
