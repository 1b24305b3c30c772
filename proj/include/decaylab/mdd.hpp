#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "decaylab/errors.hpp"
#include "decaylab/gauss.hpp"

namespace decaylab {

/// Sentinel for super-polynomial tail decay.
inline constexpr double kSuperPolynomialTail = std::numeric_limits<double>::infinity();
/// Sentinel for "every moment finite".
inline constexpr int kAllMomentsFinite = std::numeric_limits<int>::max();

/// Upper-tail model of a density; places truncation points with a rigorous
/// bound on the discarded mass.
struct TailClass {
  enum class Kind { gaussian_like, power_law, compact };
  Kind kind = Kind::gaussian_like;

  // gaussian_like: mass above X bounded by amp * X^power * exp(-X^2)
  double amp = 0.0;
  double power = 0.0;

  // power_law: density bounded by coeff * (xi - shift)^(-1-exponent), so the
  // mass above X is at most coeff / (exponent * (X - shift)^exponent)
  double exponent = kSuperPolynomialTail;
  double coeff = 0.0;
  double shift = 0.0;

  // compact: identically zero beyond xi_end
  double xi_end = std::numeric_limits<double>::infinity();

  double mass_above(double x) const {
    switch (kind) {
      case Kind::gaussian_like:
        return amp * std::pow(x, power) * std::exp(-x * x);
      case Kind::power_law:
        if (x <= shift) return std::numeric_limits<double>::infinity();
        return coeff / (exponent * std::pow(x - shift, exponent));
      case Kind::compact:
        return x >= xi_end ? 0.0 : std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }

  /// A point X >= xi0 with mass_above(X) <= bound.
  double cutoff_for_mass(double bound, double xi0) const {
    if (!(bound > 0.0)) throw DomainError("tail cutoff: bound must be > 0");
    const double lo = xi0 + 0.5;
    double x = lo;
    switch (kind) {
      case Kind::compact:
        return xi_end;
      case Kind::power_law:
        x = std::max(lo, shift + std::pow(coeff / (exponent * bound), 1.0 / exponent));
        break;
      case Kind::gaussian_like: {
        x = std::max(lo, 2.0);
        const double lg = std::log(std::max(amp / bound, 2.0));
        for (int it = 0; it < 8; ++it)
          x = std::sqrt(lg + std::max(0.0, power * std::log(x)));
        x = std::max(x, lo);
        break;
      }
    }
    for (int it = 0; it < 200 && mass_above(x) > bound; ++it) x *= 1.05;
    return x;
  }
};

/// Dimensionless mass distribution density Omega(xi) on xi >= xi0, stored as
/// the endpoint-regular factor Omega0 with Omega(xi) = (xi - xi0)^alpha *
/// Omega0(xi).  Immutable after construction; safe to share across threads.
struct MassDistribution {
  std::string name;
  double xi0 = 1.0;
  double alpha = 0.0;
  std::function<double(double)> omega0;  // regular factor, positive at xi0
  double omega0_at_xi0 = 0.0;
  double omega0_prime_at_xi0 = 0.0;
  double tail_decay_exponent = kSuperPolynomialTail;  // declared l0
  int moments_finite_through = kAllMomentsFinite;
  TailClass tail;
  // sharp interior structures (center, halfwidth) that quadrature panels
  // must resolve, e.g. a resonance peak
  std::vector<std::pair<double, double>> features;

  double density(double xi) const {
    if (xi < xi0 || xi >= tail.xi_end) return 0.0;
    const double d = xi - xi0;
    const double w = (alpha == 0.0) ? 1.0 : std::pow(d, alpha);
    return w * omega0(xi);
  }
};

inline MassDistribution make_toy_mdd(double alpha, double xi0) {
  if (!(alpha >= 0.0)) throw DomainError("toy density: alpha must be >= 0");
  if (!(xi0 > 0.0)) throw DomainError("toy density: xi0 must be > 0");
  const double w = 2.0 * std::exp(xi0 * xi0 - std::lgamma(1.0 + alpha));
  MassDistribution m;
  char buf[64];
  std::snprintf(buf, sizeof buf, "toy(alpha=%g,xi0=%g)", alpha, xi0);
  m.name = buf;
  m.xi0 = xi0;
  m.alpha = alpha;
  m.omega0 = [w, alpha, xi0](double xi) {
    return w * xi * ((alpha == 0.0) ? 1.0 : std::pow(xi + xi0, alpha)) * std::exp(-xi * xi);
  };
  m.omega0_at_xi0 = w * xi0 * std::pow(2.0 * xi0, alpha) * std::exp(-xi0 * xi0);
  m.omega0_prime_at_xi0 =
      m.omega0_at_xi0 * (1.0 / xi0 + alpha / (2.0 * xi0) - 2.0 * xi0);
  m.tail.kind = TailClass::Kind::gaussian_like;
  m.tail.amp = 0.75 * w * std::exp(xi0 * xi0);  // 1.5 * (w/2) e^{xi0^2}, slack for the incomplete-gamma tail
  m.tail.power = 2.0 * alpha;
  m.tail_decay_exponent = kSuperPolynomialTail;
  m.moments_finite_through = kAllMomentsFinite;
  return m;
}

struct BreitWignerParams {
  double m0 = 1.0;
  double gamma_bar = 0.1;
  double xi0 = 0.5;
  double lambda_bw = 2.0;
};

inline BreitWignerParams breit_wigner_params(double m0, double gamma_bar, double xi0) {
  if (!(gamma_bar > 0.0)) throw DomainError("breit-wigner: gamma_bar must be > 0");
  if (!(xi0 > 0.0)) throw DomainError("breit-wigner: xi0 must be > 0");
  BreitWignerParams p;
  p.m0 = m0;
  p.gamma_bar = gamma_bar;
  p.xi0 = xi0;
  p.lambda_bw = M_PI / (M_PI / 2.0 + std::atan(2.0 * (m0 - xi0) / gamma_bar));
  return p;
}

/// Lorentzian line shape truncated at xi0 and renormalized.  The first
/// moment diverges logarithmically, so only the amplitude itself (not its
/// derivative, nor short-time moments) is available.
inline MassDistribution make_breit_wigner(double m0, double gamma_bar, double xi0) {
  const BreitWignerParams p = breit_wigner_params(m0, gamma_bar, xi0);
  MassDistribution m;
  char buf[96];
  std::snprintf(buf, sizeof buf, "breit-wigner(m0=%g,gamma=%g,xi0=%g)", m0, gamma_bar, xi0);
  m.name = buf;
  m.xi0 = xi0;
  m.alpha = 0.0;
  const double peak = p.lambda_bw * gamma_bar / (2.0 * M_PI);
  m.omega0 = [peak, m0, gamma_bar](double xi) {
    const double d = xi - m0;
    return peak / (d * d + gamma_bar * gamma_bar / 4.0);
  };
  m.omega0_at_xi0 = m.omega0(xi0);
  const double d0 = xi0 - m0;
  m.omega0_prime_at_xi0 =
      m.omega0_at_xi0 * 2.0 * (m0 - xi0) / (d0 * d0 + gamma_bar * gamma_bar / 4.0);
  m.tail.kind = TailClass::Kind::power_law;
  m.tail.exponent = 1.0;
  m.tail.coeff = peak;
  m.tail.shift = m0;
  m.tail_decay_exponent = 1.0;
  m.moments_finite_through = 0;
  m.features.push_back({m0, gamma_bar / 2.0});
  return m;
}

namespace detail {

// Fritsch-Carlson monotonicity-preserving cubic Hermite interpolant.
class PchipCurve {
 public:
  PchipCurve() = default;
  PchipCurve(std::vector<double> xs, std::vector<double> ys)
      : x_(std::move(xs)), y_(std::move(ys)) {
    const std::size_t n = x_.size();
    d_.assign(n, 0.0);
    std::vector<double> h(n - 1), s(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x_[i + 1] - x_[i];
      s[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (s[i - 1] * s[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / s[i - 1] + w2 / s[i]);
      }
    }
    d_[0] = edge_slope(h[0], h.size() > 1 ? h[1] : h[0], s[0], s.size() > 1 ? s[1] : s[0]);
    const std::size_t m = n - 1;
    d_[m] = edge_slope(h[m - 1], m >= 2 ? h[m - 2] : h[m - 1], s[m - 1],
                       m >= 2 ? s[m - 2] : s[m - 1]);
  }

  double operator()(double t) const {
    const std::size_t n = x_.size();
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    std::size_t i =
        std::upper_bound(x_.begin(), x_.end(), t) - x_.begin() - 1;
    if (i > n - 2) i = n - 2;
    const double h = x_[i + 1] - x_[i];
    const double u = (t - x_[i]) / h;
    const double u2 = u * u;
    const double um = 1.0 - u;
    const double h00 = (1.0 + 2.0 * u) * um * um;
    const double h10 = u * um * um;
    const double h01 = u2 * (3.0 - 2.0 * u);
    const double h11 = u2 * (u - 1.0);
    return h00 * y_[i] + h * h10 * d_[i] + h01 * y_[i + 1] + h * h11 * d_[i + 1];
  }

 private:
  static double edge_slope(double h0, double h1, double s0, double s1) {
    double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
    if (d * s0 <= 0.0) return 0.0;
    if (s0 * s1 < 0.0 && std::abs(d) > 3.0 * std::abs(s0)) return 3.0 * s0;
    return d;
  }

  std::vector<double> x_, y_, d_;
};

inline std::string strip_ws(std::string s) {
  const auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && issp(s.front())) s.erase(s.begin());
  while (!s.empty() && issp(s.back())) s.pop_back();
  return s;
}

inline double parse_double_field(const std::string& field, const std::string& where) {
  const std::string f = strip_ws(field);
  double v = 0.0;
  const char* b = f.data();
  const char* e = b + f.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e)
    throw DomainError("tabulated density: bad number '" + f + "' in " + where);
  return v;
}

inline std::string sidecar_path_for(const std::string& csv_path) {
  const auto slash = csv_path.find_last_of("/\\");
  const auto dot = csv_path.find_last_of('.');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
    return csv_path + ".json";
  return csv_path.substr(0, dot) + ".json";
}

}  // namespace detail

/// Loads a tabulated density: CSV with header `xi,omega`, strictly
/// increasing xi starting at xi0, plus a JSON sidecar declaring `alpha`,
/// `xi0`, `omega0_at_xi0`, `omega0_prime_at_xi0` and `tail_decay_exponent`
/// (a number, or "inf" for super-polynomial decay).  The table is treated
/// as compactly supported: the density is zero beyond the last row.
inline MassDistribution load_tabulated_mdd(const std::string& csv_path,
                                           const std::string& sidecar_path) {
  std::ifstream side(sidecar_path);
  if (!side) throw DomainError("tabulated density: cannot open sidecar " + sidecar_path);
  nlohmann::json meta;
  try {
    side >> meta;
  } catch (const std::exception& e) {
    throw DomainError(std::string("tabulated density: sidecar parse error: ") + e.what());
  }
  double alpha, xi0, om0, om0p, l0;
  try {
    alpha = meta.at("alpha").get<double>();
    xi0 = meta.at("xi0").get<double>();
    om0 = meta.at("omega0_at_xi0").get<double>();
    om0p = meta.at("omega0_prime_at_xi0").get<double>();
    const auto& tde = meta.at("tail_decay_exponent");
    if (tde.is_string()) {
      const std::string s = tde.get<std::string>();
      if (s != "inf") throw DomainError("tabulated density: tail_decay_exponent string must be \"inf\"");
      l0 = kSuperPolynomialTail;
    } else {
      l0 = tde.get<double>();
      if (l0 >= 1e300) l0 = kSuperPolynomialTail;
    }
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& e) {
    throw DomainError(std::string("tabulated density: sidecar field error: ") + e.what());
  }
  if (!(alpha >= 0.0)) throw DomainError("tabulated density: alpha must be >= 0");
  if (!(xi0 > 0.0)) throw DomainError("tabulated density: xi0 must be > 0");
  if (!(om0 > 0.0)) throw DomainError("tabulated density: omega0_at_xi0 must be > 0");
  if (!(l0 > 0.0)) throw DomainError("tabulated density: tail_decay_exponent must be > 0");

  std::ifstream in(csv_path);
  if (!in) throw DomainError("tabulated density: cannot open " + csv_path);
  std::string line;
  bool have_header = false;
  std::vector<double> xs, ws;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_ws(line);
    if (line.empty()) continue;
    if (!have_header) {
      std::string h = line;
      h.erase(std::remove(h.begin(), h.end(), ' '), h.end());
      if (h != "xi,omega")
        throw DomainError("tabulated density: expected header 'xi,omega' in " + csv_path);
      have_header = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos)
      throw DomainError("tabulated density: missing comma at line " + std::to_string(lineno));
    const std::string where = csv_path + ":" + std::to_string(lineno);
    xs.push_back(detail::parse_double_field(line.substr(0, comma), where));
    ws.push_back(detail::parse_double_field(line.substr(comma + 1), where));
  }
  if (!have_header) throw DomainError("tabulated density: empty file " + csv_path);
  if (xs.size() < 4) throw DomainError("tabulated density: need at least 4 rows");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!std::isfinite(xs[i]) || !std::isfinite(ws[i]))
      throw DomainError("tabulated density: nonfinite entry");
    if (i > 0 && !(xs[i] > xs[i - 1]))
      throw DomainError("tabulated density: xi must be strictly increasing");
    if (ws[i] < 0.0) throw DomainError("tabulated density: omega must be >= 0");
  }
  if (std::abs(xs.front() - xi0) > 1e-9 * std::max(1.0, std::abs(xi0)))
    throw DomainError("tabulated density: first xi must equal sidecar xi0");
  xs.front() = xi0;

  // Interpolate the regular factor Omega0, anchoring the endpoint node at
  // the declared value so the (xi - xi0)^alpha closure holds exactly.
  std::vector<double> ys(xs.size());
  ys[0] = (alpha == 0.0) ? ws[0] : om0;
  for (std::size_t i = 1; i < xs.size(); ++i)
    ys[i] = (alpha == 0.0) ? ws[i] : ws[i] / std::pow(xs[i] - xi0, alpha);

  MassDistribution m;
  const auto slash = csv_path.find_last_of("/\\");
  m.name = "table(" + (slash == std::string::npos ? csv_path : csv_path.substr(slash + 1)) + ")";
  m.xi0 = xi0;
  m.alpha = alpha;
  m.omega0 = detail::PchipCurve(xs, ys);
  m.omega0_at_xi0 = (alpha == 0.0) ? ws[0] : om0;
  m.omega0_prime_at_xi0 = om0p;
  m.tail.kind = TailClass::Kind::compact;
  m.tail.xi_end = xs.back();
  m.tail_decay_exponent = l0;
  m.moments_finite_through =
      (l0 == kSuperPolynomialTail) ? kAllMomentsFinite
                                   : std::max(0, static_cast<int>(std::ceil(l0)) - 1);
  return m;
}

inline MassDistribution load_tabulated_mdd(const std::string& csv_path) {
  return load_tabulated_mdd(csv_path, detail::sidecar_path_for(csv_path));
}

/// Definite integral of density(xi) * f(xi) over the support, by adaptive
/// bisection with a Gauss-Jacobi rule on the endpoint subinterval and
/// Gauss-Legendre elsewhere.  Suited to smooth (non-oscillatory) f.
struct IntegralEstimate {
  double value = 0.0;
  double abs_error_estimate = 0.0;
};

inline IntegralEstimate integrate_density(const MassDistribution& mdd,
                                          const std::function<double(double)>& f,
                                          double target_abs_error,
                                          int max_intervals = 4000,
                                          double tail_weight_bound = 1.0) {
  if (!(target_abs_error > 0.0)) throw DomainError("integrate_density: target must be > 0");
  const double tw = std::max(1.0, tail_weight_bound);
  const double bound = std::min(target_abs_error * 0.1, 1e-13) / tw;
  const double cut = mdd.tail.cutoff_for_mass(bound, mdd.xi0);
  const double tail_term = mdd.tail.mass_above(cut) * tw;
  const double span = cut - mdd.xi0;
  if (!(span > 0.0)) throw DomainError("integrate_density: empty support");

  struct Interval {
    double lo, hi;
    bool endpoint;
    double value, err;
  };
  const int n_lo = 15, n_hi = 30;
  const auto eval = [&](Interval& iv) {
    if (iv.endpoint) {
      const double half = 0.5 * (iv.hi - iv.lo);
      const double scale = std::pow(half, 1.0 + mdd.alpha);
      double acc[2] = {0.0, 0.0};
      const gauss::Rule* rules[2] = {&gauss::jacobi(n_lo, mdd.alpha),
                                     &gauss::jacobi(n_hi, mdd.alpha)};
      for (int k = 0; k < 2; ++k) {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < rules[k]->nodes.size(); ++i) {
          const double delta = half * (1.0 + rules[k]->nodes[i]);
          const double xi = iv.lo + delta;
          const double v = rules[k]->weights[i] * mdd.omega0(xi) * f(xi);
          const double y = v - c;
          const double t = s + y;
          c = (t - s) - y;
          s = t;
        }
        acc[k] = scale * s;
      }
      iv.value = acc[1];
      iv.err = std::abs(acc[1] - acc[0]);
    } else {
      const double mid = 0.5 * (iv.lo + iv.hi), half = 0.5 * (iv.hi - iv.lo);
      double acc[2] = {0.0, 0.0};
      const gauss::Rule* rules[2] = {&gauss::legendre(n_lo), &gauss::legendre(n_hi)};
      for (int k = 0; k < 2; ++k) {
        double s = 0.0, c = 0.0;
        for (std::size_t i = 0; i < rules[k]->nodes.size(); ++i) {
          const double xi = mid + half * rules[k]->nodes[i];
          const double v = rules[k]->weights[i] * mdd.density(xi) * f(xi);
          const double y = v - c;
          const double t = s + y;
          c = (t - s) - y;
          s = t;
        }
        acc[k] = half * s;
      }
      iv.value = acc[1];
      iv.err = std::abs(acc[1] - acc[0]);
    }
  };

  // Initial partition: a short endpoint interval, geometric growth to the
  // cutoff, and mandatory breakpoints around declared sharp features.
  std::vector<double> edges{mdd.xi0};
  std::vector<double> marks;
  for (const auto& [c, s] : mdd.features) {
    for (double v : {c - 8.0 * s, c - s, c + s, c + 8.0 * s})
      if (v > mdd.xi0 && v < cut) marks.push_back(v);
  }
  std::sort(marks.begin(), marks.end());
  double w = std::min(0.25, span / 8.0);
  double pos = mdd.xi0;
  std::size_t mk = 0;
  while (pos < cut) {
    double next = std::min(pos + w, cut);
    while (mk < marks.size() && marks[mk] <= pos + 1e-12 * cut) ++mk;
    if (mk < marks.size() && marks[mk] < next) next = marks[mk];
    if (next - pos < 1e-12 * std::max(1.0, cut)) next = std::min(pos + w, cut);
    edges.push_back(next);
    pos = next;
    w *= 2.0;
  }
  edges.back() = cut;

  std::vector<Interval> ivs;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Interval iv{edges[i], edges[i + 1], i == 0, 0.0, 0.0};
    eval(iv);
    ivs.push_back(iv);
  }

  for (int step = 0; step < 4 * max_intervals; ++step) {
    double total_err = tail_term;
    std::size_t worst = 0;
    double worst_err = -1.0;
    for (std::size_t i = 0; i < ivs.size(); ++i) {
      total_err += ivs[i].err;
      if (ivs[i].err > worst_err) {
        worst_err = ivs[i].err;
        worst = i;
      }
    }
    if (total_err <= target_abs_error || static_cast<int>(ivs.size()) >= max_intervals ||
        worst_err <= 0.0)
      break;
    Interval left = ivs[worst], right = ivs[worst];
    const double mid = 0.5 * (ivs[worst].lo + ivs[worst].hi);
    left.hi = mid;
    right.lo = mid;
    right.endpoint = false;
    eval(left);
    eval(right);
    ivs[worst] = left;
    ivs.insert(ivs.begin() + worst + 1, right);
  }

  std::sort(ivs.begin(), ivs.end(),
            [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
  IntegralEstimate out;
  out.abs_error_estimate = tail_term;
  double s = 0.0, c = 0.0;
  for (const Interval& iv : ivs) {
    out.abs_error_estimate += iv.err;
    const double y = iv.value - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  out.value = s;
  return out;
}

/// Normalization, nonnegativity and endpoint-consistency diagnostics.
struct ValidationReport {
  double tolerance = 0.0;
  double normalization_defect = 0.0;
  double normalization_error_estimate = 0.0;
  double min_density = 0.0;
  double endpoint_value_defect = 0.0;  // relative, Richardson-extrapolated
  double endpoint_slope_defect = 0.0;  // informative only
  bool normalization_ok = false;
  bool nonnegative_ok = false;
  bool endpoint_ok = false;
  bool passed() const { return normalization_ok && nonnegative_ok && endpoint_ok; }
};

inline ValidationReport validate(const MassDistribution& mdd, double tol) {
  if (!(tol > 0.0)) throw DomainError("validate: tolerance must be > 0");
  ValidationReport r;
  r.tolerance = tol;

  const IntegralEstimate norm =
      integrate_density(mdd, [](double) { return 1.0; }, std::min(tol * 0.1, 1e-12));
  r.normalization_defect = std::abs(norm.value - 1.0);
  r.normalization_error_estimate = norm.abs_error_estimate;
  r.normalization_ok = r.normalization_defect < tol;

  const double cut = mdd.tail.cutoff_for_mass(1e-10, mdd.xi0);
  r.min_density = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 600; ++k) {
    const double u = k / 599.0;
    const double xi = mdd.xi0 + (cut - mdd.xi0) * u * u;
    r.min_density = std::min(r.min_density, mdd.density(xi));
  }
  r.nonnegative_ok = r.min_density >= -tol;

  // density(xi0 + h) h^{-alpha} = Omega0(xi0) + Omega0'(xi0) h + O(h^2);
  // accelerate the first-order sequence three times.
  const double h0 = 1e-3;
  double fh[4], gh[3];
  for (int k = 0; k < 4; ++k) {
    const double h = h0 / (1 << k);
    fh[k] = mdd.density(mdd.xi0 + h) * ((mdd.alpha == 0.0) ? 1.0 : std::pow(h, -mdd.alpha));
  }
  for (int k = 0; k < 3; ++k) gh[k] = (fh[k] - fh[k + 1]) / (h0 / (1 << k) - h0 / (2 << k));
  double e1[3], e2[2];
  for (int k = 0; k < 3; ++k) e1[k] = 2.0 * fh[k + 1] - fh[k];
  for (int k = 0; k < 2; ++k) e2[k] = (4.0 * e1[k + 1] - e1[k]) / 3.0;
  const double value_extrap = (8.0 * e2[1] - e2[0]) / 7.0;
  const double s1[2] = {2.0 * gh[1] - gh[0], 2.0 * gh[2] - gh[1]};
  const double slope_extrap = (4.0 * s1[1] - s1[0]) / 3.0;
  const double vscale = std::max(std::abs(mdd.omega0_at_xi0), 1e-30);
  r.endpoint_value_defect = std::abs(value_extrap - mdd.omega0_at_xi0) / vscale;
  const double sscale = std::max(std::abs(mdd.omega0_prime_at_xi0), 0.1 * vscale);
  r.endpoint_slope_defect = std::abs(slope_extrap - mdd.omega0_prime_at_xi0) / sscale;
  r.endpoint_ok = r.endpoint_value_defect < tol;
  return r;
}

}  // namespace decaylab
