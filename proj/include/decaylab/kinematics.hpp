#pragma once

#include <cmath>

#include "decaylab/errors.hpp"

namespace decaylab {

/// Momentum and mass-threshold pair for the relativistic frequency map
/// eta(xi) = sqrt(rho^2 + xi^2).  Everything is dimensionless: momenta and
/// masses are in units of the reference mass scale, times in its inverse.
struct Kinematics {
  double rho = 0.0;   // momentum
  double xi0 = 1.0;   // lower bound of the mass spectrum
  double eta0 = 1.0;  // eta at the threshold, sqrt(rho^2 + xi0^2)

  static Kinematics make(double rho, double xi0) {
    if (!(rho >= 0.0)) throw DomainError("kinematics: momentum must be >= 0");
    if (!(xi0 > 0.0)) throw DomainError("kinematics: mass threshold must be > 0");
    Kinematics k;
    k.rho = rho;
    k.xi0 = xi0;
    k.eta0 = std::hypot(rho, xi0);
    return k;
  }

  double eta(double xi) const { return std::hypot(rho, xi); }

  /// Lorentz factor of a mass component xi carrying momentum rho.
  double lorentz(double xi) const { return eta(xi) / xi; }

  /// Velocity of the threshold component, rho/eta0 = 1/sqrt(1 + xi0^2/rho^2).
  double velocity() const { return rho / eta0; }

  /// Threshold dilation factor eta0/xi0; this is the factor that rescales
  /// time in the long-time scaling law.
  double dilation() const { return eta0 / xi0; }
};

}  // namespace decaylab
