#pragma once

#include <cmath>
#include <complex>

#include "decaylab/kinematics.hpp"
#include "decaylab/mdd.hpp"
#include "decaylab/quadrature.hpp"

namespace decaylab {

/// Moment constants of the short-time algebraic laws
///   P = 1 - pi0 tau^2,  M = a0 - pi1 tau^2,  Gamma = pi2 tau.
struct ShortTimeModel {
  double a0 = 0.0;  // mean of eta under the density
  double a1 = 0.0;  // half the second eta moment
  double a2 = 0.0;  // sixth of the third eta moment
  double pi0 = 0.0;
  double pi1 = 0.0;
  double pi2 = 0.0;
};

inline ShortTimeModel short_time_model(const MassDistribution& mdd, const Kinematics& kin,
                                       const QuadratureConfig& cfg) {
  detail::check_config(cfg);
  if (std::abs(kin.xi0 - mdd.xi0) > 1e-12 * std::max(1.0, std::abs(mdd.xi0)))
    throw DomainError("short_time_model: kinematics threshold differs from density threshold");
  if (mdd.moments_finite_through < 3 || !(mdd.tail_decay_exponent > 5.0))
    throw DomainError("short_time_model: density '" + mdd.name +
                      "' lacks the moment/tail conditions (needs three finite eta moments "
                      "and tail exponent > 5)");
  const double target = 1e-12;
  // Bound on the eta^3 weight near the truncation point, for the tail budget.
  const double probe = mdd.tail.cutoff_for_mass(1e-13, mdd.xi0);
  const double wbound = std::pow(kin.eta(probe) + 1.0, 3.0);
  const auto moment = [&](int k) {
    const IntegralEstimate est = integrate_density(
        mdd, [&](double xi) { return std::pow(kin.eta(xi), k); }, target, 4000, wbound);
    if (!(est.abs_error_estimate <= 1e-9))
      throw ConvergenceFailure("short_time_model: moment quadrature did not converge",
                               AmplitudeValue{Complex(est.value, 0.0),
                                              est.abs_error_estimate, 0.0});
    return est.value;
  };
  ShortTimeModel m;
  m.a0 = moment(1);
  m.a1 = 0.5 * moment(2);
  m.a2 = moment(3) / 6.0;
  m.pi0 = 2.0 * m.a1 - m.a0 * m.a0;
  m.pi1 = m.a0 * m.a0 * m.a0 + 3.0 * (m.a2 - m.a0 * m.a1);
  m.pi2 = 2.0 * m.pi0;
  return m;
}

inline double short_time_survival(const ShortTimeModel& m, double tau) {
  return 1.0 - m.pi0 * tau * tau;
}
inline double short_time_mass(const ShortTimeModel& m, double tau) {
  return m.a0 - m.pi1 * tau * tau;
}
inline double short_time_rate(const ShortTimeModel& m, double tau) { return m.pi2 * tau; }

/// Closed-form constants of the long-time endpoint asymptotics.
struct LongTimeModel {
  double alpha = 0.0;
  double c0 = 0.0;       // Gamma(1+alpha) * Omega0(xi0)
  double chi_p = 1.0;    // sqrt(1 + rho^2/xi0^2), the dilation factor
  double m_p_inf = 1.0;  // sqrt(xi0^2 + rho^2), asymptotic instantaneous mass
  double zeta_p = 0.0;      // tau^-2 coefficient of M/M_inf - 1
  double zeta_bar_p = 0.0;  // its large-momentum limit
  double zeta_0 = 0.0;      // its rest-frame value
  double kappa_p = 0.0;     // tau^-2 coefficient of the scaling-law ratio
};

inline LongTimeModel long_time_model(const MassDistribution& mdd, const Kinematics& kin) {
  if (std::abs(kin.xi0 - mdd.xi0) > 1e-12 * std::max(1.0, std::abs(mdd.xi0)))
    throw DomainError("long_time_model: kinematics threshold differs from density threshold");
  if (!(mdd.omega0_at_xi0 > 0.0))
    throw DomainError("long_time_model: endpoint value Omega0(xi0) must be > 0");
  const double a = mdd.alpha;
  const double xi0 = mdd.xi0;
  const double rho = kin.rho;
  const double logd = mdd.omega0_prime_at_xi0 / mdd.omega0_at_xi0;
  LongTimeModel m;
  m.alpha = a;
  m.c0 = std::tgamma(1.0 + a) * mdd.omega0_at_xi0;
  m.chi_p = kin.eta0 / xi0;
  m.m_p_inf = kin.eta0;
  const double v2 = (rho / kin.eta0) * (rho / kin.eta0);  // rho^2/(xi0^2+rho^2)
  m.zeta_p = (1.0 + a) / xi0 * ((1.0 + 0.5 * a) / xi0 * v2 - logd);
  m.zeta_bar_p = (1.0 + a) / xi0 * ((1.0 + 0.5 * a) / xi0 - logd);
  m.zeta_0 = -(1.0 + a) / xi0 * logd;
  const double r2 = (rho / xi0) * (rho / xi0);
  m.kappa_p = (1.0 + a) * (2.0 + a) * r2 / (xi0 * xi0 * xi0) *
              (2.0 * logd - (1.0 / (xi0 * m.chi_p * m.chi_p)) *
                                (3.0 + a + (2.5 + a) * r2));
  return m;
}

inline Complex long_time_amplitude(const LongTimeModel& m, const Kinematics& kin,
                                   double tau) {
  if (!(tau > 0.0)) throw DomainError("long_time_amplitude: tau must be > 0");
  const double mod = m.c0 * std::pow(m.chi_p / tau, 1.0 + m.alpha);
  return std::polar(mod, -(M_PI * (1.0 + m.alpha) / 2.0 + kin.eta0 * tau));
}

inline double long_time_survival(const LongTimeModel& m, double tau) {
  if (!(tau > 0.0)) throw DomainError("long_time_survival: tau must be > 0");
  return m.c0 * m.c0 * std::pow(m.chi_p / tau, 2.0 * (1.0 + m.alpha));
}

/// Large-momentum simplification chi_p -> rho/xi0 of the long-time survival.
inline double ultrarelativistic_survival(const LongTimeModel& m, double tau) {
  if (!(tau > 0.0)) throw DomainError("ultrarelativistic_survival: tau must be > 0");
  const double rho_over_xi0 = std::sqrt(std::max(0.0, m.chi_p * m.chi_p - 1.0));
  return m.c0 * m.c0 * std::pow(rho_over_xi0 / tau, 2.0 * (1.0 + m.alpha));
}

inline double asymptotic_mass(const LongTimeModel& m, double tau) {
  if (!(tau > 0.0)) throw DomainError("asymptotic_mass: tau must be > 0");
  return m.m_p_inf * (1.0 + m.zeta_p / (tau * tau));
}

/// Large-momentum variant: the mass approaches the momentum itself, with the
/// zeta_bar coefficient.
inline double ultrarelativistic_mass(const LongTimeModel& m, double tau) {
  if (!(tau > 0.0)) throw DomainError("ultrarelativistic_mass: tau must be > 0");
  const double rho = m.m_p_inf * std::sqrt(std::max(0.0, 1.0 - 1.0 / (m.chi_p * m.chi_p)));
  return rho * (1.0 + m.zeta_bar_p / (tau * tau));
}

/// Momentum-independent long-time decay rate 2(1+alpha)/tau.
inline double asymptotic_rate(const LongTimeModel& m, double tau) {
  if (!(tau > 0.0)) throw DomainError("asymptotic_rate: tau must be > 0");
  return 2.0 * (1.0 + m.alpha) / tau;
}

}  // namespace decaylab
