#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "decaylab/quadrature.hpp"

namespace decaylab {

/// Per-point status in a decay curve.  Survival is always reported; mass and
/// rate only when the amplitude converged, is well conditioned, and the
/// density has a finite first moment.
enum class PointFlag { ok, no_convergence, ill_conditioned, derivative_unavailable };

inline const char* to_string(PointFlag f) {
  switch (f) {
    case PointFlag::ok: return "ok";
    case PointFlag::no_convergence: return "no-convergence";
    case PointFlag::ill_conditioned: return "ill-conditioned";
    case PointFlag::derivative_unavailable: return "no-derivative";
  }
  return "?";
}

inline double survival_probability(const AmplitudeValue& a) { return std::norm(a.value); }

/// First-order propagated error of |A|^2.
inline double survival_probability_error(const AmplitudeValue& a) {
  return 2.0 * std::abs(a.value) * a.abs_error_estimate;
}

namespace detail {

inline void conditioning_guard(const AmplitudeValue& a) {
  if (!(std::abs(a.value) > 10.0 * a.abs_error_estimate))
    throw IllConditioned("amplitude modulus within 10x its error estimate; ratio undefined");
}

}  // namespace detail

/// Instantaneous mass -Im(dA/A), in units of the mass scale.
inline double instantaneous_mass(const AmplitudeValue& a, const AmplitudeValue& da) {
  detail::conditioning_guard(a);
  return -std::imag(da.value / a.value);
}

/// Instantaneous decay rate -2 Re(dA/A), in units of the mass scale.
inline double instantaneous_rate(const AmplitudeValue& a, const AmplitudeValue& da) {
  detail::conditioning_guard(a);
  return -2.0 * std::real(da.value / a.value);
}

struct DecayCurve {
  std::vector<double> grid;
  std::vector<double> survival;
  std::vector<double> mass;       // NaN where flagged
  std::vector<double> rate;       // NaN where flagged
  std::vector<double> condition;  // |A|, the ratio conditioning diagnostic
  std::vector<AmplitudeValue> amplitude;
  std::vector<PointFlag> flags;
};

/// Full observable set over a grid.  Failing points are flagged and filled
/// with the best available amplitude, never fabricated ratios.
inline DecayCurve decay_curve(const MassDistribution& mdd, const Kinematics& kin,
                              const TimeGrid& grid, const QuadratureConfig& cfg,
                              int threads = 1) {
  grid.ensure_valid();
  detail::check_config(cfg);
  const std::size_t n = grid.points.size();
  const bool want_deriv = mdd.moments_finite_through >= 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  DecayCurve c;
  c.grid = grid.points;
  c.survival.assign(n, nan);
  c.mass.assign(n, nan);
  c.rate.assign(n, nan);
  c.condition.assign(n, 0.0);
  c.amplitude.resize(n);
  c.flags.assign(n, PointFlag::ok);

  const auto work = [&](std::size_t i) {
    const double tau = grid.points[i];
    PointFlag flag = PointFlag::ok;
    AmplitudeValue a;
    try {
      a = amplitude(mdd, kin, tau, cfg);
    } catch (const ConvergenceFailure& cf) {
      a = cf.best();
      flag = PointFlag::no_convergence;
    }
    c.amplitude[i] = a;
    c.survival[i] = survival_probability(a);
    c.condition[i] = std::abs(a.value);
    if (flag == PointFlag::ok && want_deriv) {
      AmplitudeValue da;
      bool have_da = true;
      try {
        da = amplitude_derivative(mdd, kin, tau, cfg);
      } catch (const ConvergenceFailure&) {
        have_da = false;
        flag = PointFlag::no_convergence;
      }
      if (have_da) {
        try {
          c.mass[i] = instantaneous_mass(a, da);
          c.rate[i] = instantaneous_rate(a, da);
        } catch (const IllConditioned&) {
          flag = PointFlag::ill_conditioned;
        }
      }
    } else if (flag == PointFlag::ok) {
      flag = PointFlag::derivative_unavailable;
    }
    c.flags[i] = flag;
  };

  int nthreads = std::max(1, threads);
  nthreads = static_cast<int>(std::min<std::size_t>(nthreads, n));
  if (nthreads == 1) {
    for (std::size_t i = 0; i < n; ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= n) return;
          work(i);
        }
      });
    for (auto& th : pool) th.join();
  }
  return c;
}

}  // namespace decaylab
