#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>
#include <vector>

#include "decaylab/errors.hpp"

namespace decaylab::gauss {

/// Nodes and weights on the reference interval [-1, 1].
struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

// Legendre P_n and P_n' at x by the three-term recurrence.
inline std::pair<double, double> legendre_pair(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

inline Rule make_legendre(int n) {
  if (n < 1) throw DomainError("quadrature order must be positive");
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  if (n == 1) {
    r.nodes[0] = 0.0;
    r.weights[0] = 2.0;
    return r;
  }
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi initial guess, then Newton.
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 60; ++it) {
      auto [p, d] = legendre_pair(n, x);
      dp = d;
      double dx = p / d;
      x -= dx;
      if (std::abs(dx) < 4.0 * std::numeric_limits<double>::epsilon()) {
        dp = legendre_pair(n, x).second;
        break;
      }
    }
    double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.weights[i] = w;
    r.nodes[n - 1 - i] = x;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[half - 1] = 0.0;
  return r;
}

// Symmetric tridiagonal QL with implicit shifts, rotating only the first row
// of the eigenvector matrix (all a Gauss rule needs).  d: diagonal, e:
// subdiagonal (length n, last entry scratch), z: starts as e_1.
inline void tridiag_eigen_first_row(std::vector<double>& d, std::vector<double>& e,
                                    std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.resize(n, 0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    for (;;) {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m == l) break;
      if (iter++ == 60) throw std::runtime_error("tridiagonal eigensolver stalled");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::hypot(g, 1.0);
      g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      for (; i >= l; --i) {
        double f = s * e[i];
        double b = c * e[i];
        r = std::hypot(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
        f = z[i + 1];
        z[i + 1] = s * z[i] + c * f;
        z[i] = c * z[i] - s * f;
      }
      if (r == 0.0 && i >= l) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    }
  }
}

// Gauss rule for weight (1+x)^beta on [-1, 1] via Golub-Welsch.
inline Rule make_jacobi(int n, double beta) {
  if (n < 1) throw DomainError("quadrature order must be positive");
  if (beta <= -1.0) throw DomainError("endpoint weight exponent must exceed -1");
  std::vector<double> d(n), e(n, 0.0), z(n, 0.0);
  d[0] = beta / (beta + 2.0);
  for (int k = 1; k < n; ++k) {
    double s = 2.0 * k + beta;
    d[k] = beta * beta / (s * (s + 2.0));
    e[k - 1] = 2.0 * k * (k + beta) / (s * std::sqrt((s + 1.0) * (s - 1.0)));
  }
  z[0] = 1.0;
  tridiag_eigen_first_row(d, e, z);
  const double mu0 = std::pow(2.0, beta + 1.0) / (beta + 1.0);
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  for (int i = 1; i < n; ++i) {  // insertion sort by node, carrying weights
    int id = idx[i];
    int j = i - 1;
    while (j >= 0 && d[idx[j]] > d[id]) {
      idx[j + 1] = idx[j];
      --j;
    }
    idx[j + 1] = id;
  }
  for (int i = 0; i < n; ++i) {
    r.nodes[i] = d[idx[i]];
    r.weights[i] = mu0 * z[idx[i]] * z[idx[i]];
  }
  return r;
}

}  // namespace detail

inline const Rule& legendre(int n) {
  static std::mutex mu;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::make_legendre(n)).first;
  return it->second;
}

/// Rule for the weight (1+x)^beta; beta == 0 falls back to Gauss-Legendre.
inline const Rule& jacobi(int n, double beta) {
  if (beta == 0.0) return legendre(n);
  static std::mutex mu;
  static std::map<std::pair<int, double>, Rule> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, beta);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, detail::make_jacobi(n, beta)).first;
  return it->second;
}

/// Abscissa u in (0,1) and trapezoid jacobian for the tanh-sinh map
/// u = 1/(1 + exp(-pi sinh t)).  Level 0 holds every point at step h0 = 1/2;
/// level k > 0 holds only the new midpoints at step h0 / 2^k.
struct TanhSinhPoint {
  double u;
  double jacobian;  // pi cosh(t) u (1-u)
};

inline const std::vector<TanhSinhPoint>& tanh_sinh_level(int level) {
  constexpr double t_max = 4.0;
  constexpr double h0 = 0.5;
  static std::mutex mu;
  static std::vector<std::vector<TanhSinhPoint>> cache;
  std::lock_guard<std::mutex> lock(mu);
  while (static_cast<int>(cache.size()) <= level) {
    int k = static_cast<int>(cache.size());
    double h = h0 / static_cast<double>(1 << k);
    std::vector<TanhSinhPoint> pts;
    for (int j = -(1 << (k + 3)); j <= (1 << (k + 3)); ++j) {
      if (k > 0 && j % 2 == 0) continue;  // even points already in coarser levels
      double t = h * j;
      if (t < -t_max - 1e-12 || t > t_max + 1e-12) continue;
      double v = M_PI * std::sinh(t);
      double u = 1.0 / (1.0 + std::exp(-v));
      double jac = M_PI * std::cosh(t) * u * (1.0 - u);
      pts.push_back({u, jac});
    }
    cache.push_back(std::move(pts));
  }
  return cache[level];
}

constexpr double tanh_sinh_step(int level) { return 0.5 / static_cast<double>(1 << level); }

}  // namespace decaylab::gauss
