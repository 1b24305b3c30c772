#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdio>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "decaylab/errors.hpp"
#include "decaylab/gauss.hpp"
#include "decaylab/grid.hpp"
#include "decaylab/kinematics.hpp"
#include "decaylab/mdd.hpp"

namespace decaylab {

using Complex = std::complex<double>;

struct AmplitudeValue {
  Complex value{0.0, 0.0};
  double abs_error_estimate = 0.0;
  double tau = 0.0;
};

/// Thrown when an amplitude evaluation cannot meet its error target within
/// the panel budget; carries the best value obtained.
class ConvergenceFailure : public std::runtime_error {
 public:
  ConvergenceFailure(const std::string& what, AmplitudeValue best)
      : std::runtime_error(what), best_(best) {}
  const AmplitudeValue& best() const { return best_; }

 private:
  AmplitudeValue best_;
};

/// Per-point failure inside a grid evaluation.
class SeriesFailure : public ConvergenceFailure {
 public:
  SeriesFailure(const std::string& what, AmplitudeValue best, std::size_t index)
      : ConvergenceFailure(what, best), index_(index) {}
  std::size_t grid_index() const { return index_; }

 private:
  std::size_t index_;
};

enum class EndpointRule { jacobi_weighted, tanh_sinh };
enum class AmplitudeForm { xi_form, eta_form };

struct QuadratureConfig {
  double target_abs_error = 1e-11;
  int max_panels = 100000;
  double truncation_tail_bound = 1e-14;
  EndpointRule endpoint_rule = EndpointRule::jacobi_weighted;
  int panel_order = 15;
};

namespace detail {

struct KahanComplex {
  Complex s{0.0, 0.0}, c{0.0, 0.0};
  void add(Complex v) {
    const Complex y = v - c;
    const Complex t = s + y;
    c = (t - s) - y;
    s = t;
  }
};

// Integrand (x - x0)^alpha * smooth(x, x - x0) * exp(-i tau phase(x, x - x0))
// with 0 < phase' <= 1, so panels of width 2 pi / |tau| see at most one
// oscillation.
struct OscillatoryIntegrand {
  double x0 = 0.0;
  double alpha = 0.0;
  std::function<double(double, double)> smooth;
  std::function<double(double, double)> phase;
};

inline Complex unit_phase(double phi, double tau) { return std::polar(1.0, -phi * tau); }

inline Complex gl_panel(const OscillatoryIntegrand& f, double lo, double hi, double tau,
                        const gauss::Rule& r) {
  const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  const double base = mid - f.x0;
  KahanComplex acc;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double delta = base + half * r.nodes[i];
    const double x = f.x0 + delta;
    const double w = (f.alpha == 0.0) ? 1.0 : std::pow(delta, f.alpha);
    acc.add(r.weights[i] * w * f.smooth(x, delta) * unit_phase(f.phase(x, delta), tau));
  }
  return half * acc.s;
}

inline Complex jacobi_first_panel(const OscillatoryIntegrand& f, double hi, double tau,
                                  int order) {
  const gauss::Rule& r = gauss::jacobi(order, f.alpha);
  const double half = 0.5 * (hi - f.x0);
  KahanComplex acc;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) {
    const double delta = half * (1.0 + r.nodes[i]);
    acc.add(r.weights[i] * f.smooth(f.x0 + delta, delta) *
            unit_phase(f.phase(f.x0 + delta, delta), tau));
  }
  return std::pow(half, 1.0 + f.alpha) * acc.s;
}

inline std::pair<Complex, double> tanh_sinh_first_panel(const OscillatoryIntegrand& f,
                                                        double hi, double tau) {
  const double L = hi - f.x0;
  const double scale = std::pow(L, 1.0 + f.alpha);
  KahanComplex acc;
  Complex prev{0.0, 0.0};
  double diff = std::numeric_limits<double>::infinity();
  for (int level = 0; level <= 6; ++level) {
    for (const auto& p : gauss::tanh_sinh_level(level)) {
      const double delta = L * p.u;
      const double w = (f.alpha == 0.0) ? 1.0 : std::pow(p.u, f.alpha);
      acc.add(p.jacobian * w * f.smooth(f.x0 + delta, delta) *
              unit_phase(f.phase(f.x0 + delta, delta), tau));
    }
    const Complex cur = scale * gauss::tanh_sinh_step(level) * acc.s;
    if (level > 0) {
      diff = std::abs(cur - prev);
      prev = cur;
      if (level >= 3 && diff <= 1e-16 * (1.0 + std::abs(cur))) break;
    } else {
      prev = cur;
    }
  }
  const double eps_floor = 4.0 * std::numeric_limits<double>::epsilon() * std::abs(prev);
  return {prev, std::max(diff, eps_floor)};
}

struct PanelPlan {
  std::vector<double> edges;
  bool truncated = false;
};

// Panels bounded by the phase advance (at most 2 pi each), refined around
// declared sharp features, capped by the panel budget.
inline PanelPlan plan_panels(double x0, double xmax, double tau, double width_cap,
                             const std::vector<std::pair<double, double>>& zones,
                             int max_panels) {
  double w = width_cap;
  const double at = std::abs(tau);
  if (at > 0.0) w = std::min(w, 2.0 * M_PI / at);

  std::vector<double> marks{x0, xmax};
  for (const auto& [c, s] : zones) {
    const double lo = std::max(x0, c - 8.0 * s), hi = std::min(xmax, c + 8.0 * s);
    if (lo < hi) {
      marks.push_back(lo);
      marks.push_back(hi);
    }
  }
  std::sort(marks.begin(), marks.end());
  marks.erase(std::unique(marks.begin(), marks.end(),
                          [&](double a, double b) {
                            return b - a <= 1e-12 * std::max(1.0, std::abs(b));
                          }),
              marks.end());

  PanelPlan plan;
  plan.edges.push_back(x0);
  long remaining = max_panels;
  for (std::size_t k = 0; k + 1 < marks.size(); ++k) {
    const double a = marks[k], b = marks[k + 1];
    if (!(b > a)) continue;
    double local = w;
    const double mid = 0.5 * (a + b);
    for (const auto& [c, s] : zones)
      if (mid >= c - 8.0 * s && mid <= c + 8.0 * s)
        local = std::min(local, std::max(0.5 * s, 1e-9));
    const double needed_d = std::ceil((b - a) / local - 1e-9);
    const long needed = needed_d > 1e18 ? std::numeric_limits<long>::max()
                                        : std::max<long>(1, static_cast<long>(needed_d));
    if (needed > remaining) {
      for (long j = 0; j < remaining; ++j) plan.edges.push_back(plan.edges.back() + local);
      plan.truncated = true;
      return plan;
    }
    for (long j = 1; j <= needed; ++j) plan.edges.push_back(a + (b - a) * j / needed);
    plan.edges.back() = b;
    remaining -= needed;
  }
  return plan;
}

struct EngineResult {
  Complex value{0.0, 0.0};
  double quadrature_error = 0.0;
};

inline EngineResult run_panels(const OscillatoryIntegrand& f, const std::vector<double>& edges,
                               double tau, const QuadratureConfig& cfg) {
  KahanComplex total;
  double err = 0.0;
  if (edges.size() < 2) return {total.s, err};
  if (cfg.endpoint_rule == EndpointRule::jacobi_weighted) {
    const Complex lo = jacobi_first_panel(f, edges[1], tau, cfg.panel_order);
    const Complex hi = jacobi_first_panel(f, edges[1], tau, 2 * cfg.panel_order);
    total.add(hi);
    err += std::abs(hi - lo);
  } else {
    const auto [v, e] = tanh_sinh_first_panel(f, edges[1], tau);
    total.add(v);
    err += e;
  }
  const gauss::Rule& r_lo = gauss::legendre(cfg.panel_order);
  const gauss::Rule& r_hi = gauss::legendre(2 * cfg.panel_order);
  for (std::size_t k = 1; k + 1 < edges.size(); ++k) {
    const Complex lo = gl_panel(f, edges[k], edges[k + 1], tau, r_lo);
    const Complex hi = gl_panel(f, edges[k], edges[k + 1], tau, r_hi);
    total.add(hi);
    err += std::abs(hi - lo);
  }
  return {total.s, err};
}

struct AmplitudeOptions {
  AmplitudeForm form = AmplitudeForm::xi_form;
  bool derivative = false;
  double width_cap = 0.5;
};

inline void check_config(const QuadratureConfig& cfg) {
  if (!(cfg.target_abs_error > 0.0))
    throw DomainError("quadrature config: target_abs_error must be > 0");
  if (cfg.panel_order < 7) throw DomainError("quadrature config: panel_order must be >= 7");
  if (cfg.max_panels < 1) throw DomainError("quadrature config: max_panels must be >= 1");
  if (!(cfg.truncation_tail_bound > 0.0))
    throw DomainError("quadrature config: truncation_tail_bound must be > 0");
}

inline AmplitudeValue amplitude_impl(const MassDistribution& mdd, const Kinematics& kin,
                                     double tau, const QuadratureConfig& cfg,
                                     const AmplitudeOptions& opt) {
  check_config(cfg);
  if (!std::isfinite(tau)) throw DomainError("amplitude: tau must be finite");
  if (std::abs(kin.xi0 - mdd.xi0) > 1e-12 * std::max(1.0, std::abs(mdd.xi0)))
    throw DomainError("amplitude: kinematics threshold differs from density threshold");
  if (!mdd.omega0) throw DomainError("amplitude: density has no regular factor");

  // Truncation point in xi space; the derivative integrand carries an extra
  // eta factor, so inflate the discarded-mass bound accordingly.
  double cut = mdd.tail.cutoff_for_mass(cfg.truncation_tail_bound, mdd.xi0);
  double tail_weight = 1.0;
  if (opt.derivative) {
    tail_weight = kin.eta(cut) + 1.0;
    cut = mdd.tail.cutoff_for_mass(cfg.truncation_tail_bound / tail_weight, mdd.xi0);
    tail_weight = kin.eta(cut) + 1.0;
  }

  OscillatoryIntegrand f;
  f.alpha = mdd.alpha;
  double xmax = cut;
  std::vector<std::pair<double, double>> zones;
  const Kinematics kv = kin;
  const MassDistribution* mp = &mdd;
  const bool deriv = opt.derivative;
  if (opt.form == AmplitudeForm::xi_form) {
    f.x0 = mdd.xi0;
    f.smooth = [mp, kv, deriv](double x, double) {
      const double g = mp->omega0(x);
      return deriv ? g * kv.eta(x) : g;
    };
    f.phase = [kv](double x, double) { return kv.eta(x); };
    for (const auto& z : mdd.features) zones.push_back(z);
  } else {
    f.x0 = kin.eta0;
    xmax = kin.eta(cut);
    const double xi0 = mdd.xi0, eta0 = kin.eta0, alpha = mdd.alpha;
    f.smooth = [mp, xi0, eta0, alpha, deriv](double x, double delta) {
      // xi from eta without cancellation: xi^2 = xi0^2 + (eta - eta0)(eta + eta0)
      const double xi = std::sqrt(xi0 * xi0 + delta * (x + eta0));
      const double ratio = (x + eta0) / (xi + xi0);
      const double g = ((alpha == 0.0) ? 1.0 : std::pow(ratio, alpha)) * (x / xi) *
                       mp->omega0(xi);
      return deriv ? g * x : g;
    };
    f.phase = [](double x, double) { return x; };
    for (const auto& [c, s] : mdd.features)
      if (c > 0.0) zones.push_back({kin.eta(c), s * c / kin.eta(c)});
  }

  const PanelPlan plan = plan_panels(f.x0, xmax, tau, opt.width_cap, zones, cfg.max_panels);
  double xi_trunc = cut;
  if (plan.truncated) {
    const double xe = plan.edges.back();
    xi_trunc = (opt.form == AmplitudeForm::xi_form)
                   ? xe
                   : std::sqrt(std::max(0.0, xe * xe - kin.rho * kin.rho));
    xi_trunc = std::min(xi_trunc, cut);
  }
  double trunc_err = mdd.tail.mass_above(xi_trunc);
  if (opt.derivative) trunc_err *= kin.eta(xi_trunc) + 1.0;
  if (!std::isfinite(trunc_err)) trunc_err = 1.0;

  const EngineResult res = run_panels(f, plan.edges, tau, cfg);
  Complex value = res.value;
  if (opt.derivative) value *= Complex(0.0, -1.0);
  const double err = res.quadrature_error + trunc_err;
  AmplitudeValue out{value, err, tau};
  if (!(err <= cfg.target_abs_error)) {
    char msg[192];
    std::snprintf(msg, sizeof msg,
                  "%s: error estimate %.3e exceeds target %.3e at tau=%.6g (%zu panels%s)",
                  deriv ? "amplitude_derivative" : "amplitude", err, cfg.target_abs_error,
                  tau, plan.edges.size() - 1, plan.truncated ? ", domain truncated" : "");
    throw ConvergenceFailure(msg, out);
  }
  return out;
}

}  // namespace detail

/// Survival amplitude: integral of density(xi) exp(-i eta(xi) tau) over the
/// mass spectrum.  Either integration variable gives the same value; the
/// eta form is exposed for cross-checks.
inline AmplitudeValue amplitude(const MassDistribution& mdd, const Kinematics& kin,
                                double tau, const QuadratureConfig& cfg,
                                AmplitudeForm form = AmplitudeForm::xi_form) {
  return detail::amplitude_impl(mdd, kin, tau, cfg, {form, false, 0.5});
}

/// Time derivative of the amplitude, -i times the eta-weighted integral.
inline AmplitudeValue amplitude_derivative(const MassDistribution& mdd,
                                           const Kinematics& kin, double tau,
                                           const QuadratureConfig& cfg,
                                           AmplitudeForm form = AmplitudeForm::xi_form) {
  if (mdd.moments_finite_through < 1)
    throw DomainError("amplitude_derivative: first moment of '" + mdd.name + "' diverges");
  return detail::amplitude_impl(mdd, kin, tau, cfg, {form, true, 0.5});
}

/// Reference evaluation with independent panelization: doubled node order,
/// narrower panels, tanh-sinh endpoint treatment, tighter truncation.
inline AmplitudeValue oracle_amplitude(const MassDistribution& mdd, const Kinematics& kin,
                                       double tau) {
  QuadratureConfig cfg;
  cfg.target_abs_error = 1e-13;
  cfg.max_panels = 400000;
  cfg.truncation_tail_bound = 1e-16;
  cfg.endpoint_rule = EndpointRule::tanh_sinh;
  cfg.panel_order = 30;
  return detail::amplitude_impl(mdd, kin, tau, cfg,
                                {AmplitudeForm::xi_form, false, 0.35});
}

struct AmplitudeSeries {
  std::vector<AmplitudeValue> values;
  std::vector<AmplitudeValue> derivatives;  // empty unless requested
};

/// Element-wise amplitude (and optionally derivative) over a time grid.
/// Results are independent of the thread count.
inline AmplitudeSeries amplitude_series(const MassDistribution& mdd, const Kinematics& kin,
                                        const TimeGrid& grid, const QuadratureConfig& cfg,
                                        bool with_derivatives = false, int threads = 1) {
  grid.ensure_valid();
  detail::check_config(cfg);
  if (with_derivatives && mdd.moments_finite_through < 1)
    throw DomainError("amplitude_series: first moment of '" + mdd.name + "' diverges");
  const std::size_t n = grid.points.size();
  AmplitudeSeries out;
  out.values.resize(n);
  if (with_derivatives) out.derivatives.resize(n);

  struct Failure {
    std::size_t index;
    AmplitudeValue best;
    std::string what;
  };
  std::vector<Failure> failures;
  std::exception_ptr other_error;
  std::size_t other_index = std::numeric_limits<std::size_t>::max();
  std::mutex mu;

  const auto work = [&](std::size_t i) {
    try {
      out.values[i] = amplitude(mdd, kin, grid.points[i], cfg);
      if (with_derivatives)
        out.derivatives[i] = amplitude_derivative(mdd, kin, grid.points[i], cfg);
    } catch (const ConvergenceFailure& cf) {
      std::lock_guard<std::mutex> lock(mu);
      failures.push_back({i, cf.best(), cf.what()});
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (i < other_index) {
        other_index = i;
        other_error = std::current_exception();
      }
    }
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

  if (other_error) std::rethrow_exception(other_error);
  if (!failures.empty()) {
    const Failure* first = &failures.front();
    for (const Failure& f : failures)
      if (f.index < first->index) first = &f;
    throw SeriesFailure(first->what + " (grid index " + std::to_string(first->index) + ")",
                        first->best, first->index);
  }
  return out;
}

}  // namespace decaylab
