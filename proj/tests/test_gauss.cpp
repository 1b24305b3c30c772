#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstddef>

#include "decaylab/gauss.hpp"

using decaylab::gauss::Rule;

namespace {

double apply_power(const Rule& rule, int m) {
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * std::pow(rule.nodes[i], m);
  return sum;
}

}  // namespace

TEST_CASE("legendre rules are symmetric with unit-measure weights") {
  for (int n : {7, 15, 30, 45}) {
    const Rule& r = decaylab::gauss::legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    REQUIRE(r.weights.size() == static_cast<std::size_t>(n));
    double wsum = 0.0;
    for (double w : r.weights) {
      CHECK(w > 0.0);
      wsum += w;
    }
    CHECK(std::abs(wsum - 2.0) < 1e-14);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(r.nodes[i] + r.nodes[n - 1 - i]) < 1e-14);
      CHECK(std::abs(r.weights[i] - r.weights[n - 1 - i]) < 1e-14);
      CHECK(r.nodes[i] > -1.0);
      CHECK(r.nodes[i] < 1.0);
      if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
  }
}

TEST_CASE("legendre rules integrate monomials to degree 2n-1") {
  for (int n : {7, 15, 30}) {
    const Rule& r = decaylab::gauss::legendre(n);
    for (int m = 0; m < 2 * n; ++m) {
      double exact = (m % 2 == 0) ? 2.0 / (m + 1) : 0.0;
      CHECK(std::abs(apply_power(r, m) - exact) < 5e-14);
    }
  }
}

TEST_CASE("jacobi rules integrate (1+x)^beta weighted monomials") {
  for (double beta : {0.5, 1.0, 1.75, 2.0}) {
    for (int n : {10, 15, 30}) {
      const Rule& r = decaylab::gauss::jacobi(n, beta);
      REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
      for (std::size_t i = 0; i < r.nodes.size(); ++i) {
        CHECK(r.weights[i] > 0.0);
        CHECK(r.nodes[i] > -1.0);
        CHECK(r.nodes[i] < 1.0);
        if (i > 0) CHECK(r.nodes[i] > r.nodes[i - 1]);
      }
      // integral of (1+x)^beta (1+x)^m over [-1,1] = 2^(beta+m+1)/(beta+m+1)
      for (int m = 0; m < 2 * n; m += 3) {
        double got = 0.0;
        for (std::size_t i = 0; i < r.nodes.size(); ++i)
          got += r.weights[i] * std::pow(1.0 + r.nodes[i], m);
        double exact = std::pow(2.0, beta + m + 1) / (beta + m + 1);
        CHECK(std::abs(got / exact - 1.0) < 1e-12);
      }
    }
  }
}

TEST_CASE("jacobi with beta=0 coincides with legendre") {
  const Rule& a = decaylab::gauss::jacobi(15, 0.0);
  const Rule& b = decaylab::gauss::legendre(15);
  REQUIRE(a.nodes.size() == b.nodes.size());
  for (std::size_t i = 0; i < a.nodes.size(); ++i) {
    CHECK(a.nodes[i] == b.nodes[i]);
    CHECK(a.weights[i] == b.weights[i]);
  }
}

TEST_CASE("tanh-sinh levels integrate smooth and endpoint-singular factors") {
  // levels hold only their new points; the running point sum is weighted by
  // the step of the finest level reached
  auto integrate = [](auto&& f, int max_level) {
    double acc = 0.0, total = 0.0;
    for (int level = 0; level <= max_level; ++level) {
      for (const auto& p : decaylab::gauss::tanh_sinh_level(level))
        acc += p.jacobian * f(p.u);
      total = decaylab::gauss::tanh_sinh_step(level) * acc;
    }
    return total;
  };
  // integral of u^a over [0,1] = 1/(1+a)
  for (double a : {0.0, 0.5, 2.0}) {
    double got = integrate([a](double u) { return std::pow(u, a); }, 6);
    CHECK(std::abs(got - 1.0 / (1.0 + a)) < 1e-12);
  }
  double got = integrate([](double u) { return std::cos(3.0 * u); }, 6);
  CHECK(std::abs(got - std::sin(3.0) / 3.0) < 1e-12);
}

TEST_CASE("rule caches hand back the same object") {
  const Rule* first = &decaylab::gauss::legendre(21);
  const Rule* second = &decaylab::gauss::legendre(21);
  CHECK(first == second);
  const Rule* ja = &decaylab::gauss::jacobi(12, 1.25);
  const Rule* jb = &decaylab::gauss::jacobi(12, 1.25);
  CHECK(ja == jb);
}
