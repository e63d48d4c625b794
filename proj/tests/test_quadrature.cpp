#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stefan/quadrature.hpp"

using namespace stefan;

TEST_CASE("gauss rule: 4-point nodes and weights, ascending") {
  const QuadRule& r = gauss_legendre(4);
  REQUIRE(r.nodes.size() == 4);
  // classical values for n=4 on [-1,1]
  const double n1 = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double n2 = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(6.0 / 5.0));
  const double w1 = (18.0 + std::sqrt(30.0)) / 36.0;
  const double w2 = (18.0 - std::sqrt(30.0)) / 36.0;
  CHECK(r.nodes[0] == doctest::Approx(-n2).epsilon(1e-14));
  CHECK(r.nodes[1] == doctest::Approx(-n1).epsilon(1e-14));
  CHECK(r.nodes[2] == doctest::Approx(n1).epsilon(1e-14));
  CHECK(r.nodes[3] == doctest::Approx(n2).epsilon(1e-14));
  CHECK(r.weights[0] == doctest::Approx(w2).epsilon(1e-14));
  CHECK(r.weights[1] == doctest::Approx(w1).epsilon(1e-14));
  CHECK(r.weights[2] == doctest::Approx(w1).epsilon(1e-14));
  CHECK(r.weights[3] == doctest::Approx(w2).epsilon(1e-14));
}

TEST_CASE("gauss rule: polynomial exactness up to degree 2n-1") {
  for (int pts : {2, 4, 8, 16}) {
    const QuadRule& r = gauss_legendre(pts);
    int max_deg = 2 * pts - 1;
    for (int d = 0; d <= max_deg; ++d) {
      double acc = 0.0;
      for (size_t i = 0; i < r.nodes.size(); ++i)
        acc += r.weights[i] * std::pow(r.nodes[i], d);
      double exact = (d % 2 == 1) ? 0.0 : 2.0 / (d + 1);
      CHECK(std::abs(acc - exact) < 1e-13);
    }
  }
}

TEST_CASE("integrate: sin(pi x) over [0,1] equals 2/pi") {
  double v = integrate([](double x) { return std::sin(std::numbers::pi * x); },
                       0.0, 1.0, 64);
  CHECK(v == doctest::Approx(2.0 / std::numbers::pi).epsilon(1e-13));
}

TEST_CASE("composite rule covers interval with positive weights") {
  CompositeRule cr = composite_gauss(0.0, 2.0, 48, 16);
  REQUIRE(cr.x.size() == cr.w.size());
  double total = 0.0;
  for (size_t i = 0; i < cr.x.size(); ++i) {
    CHECK(cr.x[i] >= 0.0);
    CHECK(cr.x[i] <= 2.0);
    CHECK(cr.w[i] > 0.0);
    total += cr.w[i];
  }
  CHECK(total == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("cumulative_gauss tracks int_0^t cos on nodes and abscissae") {
  auto f = [](double t) { return std::cos(t); };
  CumulativeGauss cg = cumulative_gauss(f, 1.0, 20, 4);
  REQUIRE(cg.at_nodes.size() == 21);
  for (int j = 0; j <= 20; ++j) {
    double t = j / 20.0;
    CHECK(cg.at_nodes[size_t(j)] == doctest::Approx(std::sin(t)).epsilon(1e-12));
  }
  REQUIRE(cg.tau.size() == size_t(20 * 4));
  REQUIRE(cg.at_tau.size() == cg.tau.size());
  for (size_t i = 0; i < cg.tau.size(); ++i)
    CHECK(cg.at_tau[i] == doctest::Approx(std::sin(cg.tau[i])).epsilon(1e-12));
  // mapped weights sum to the interval length
  double wsum = 0.0;
  for (double w : cg.tau_w) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("antiderivative of exp matches exp(t)-1 at off-node times") {
  Antiderivative F([](double t) { return std::exp(t); }, 1.0, 16);
  for (double t : {0.0, 0.013, 0.25, 0.4999, 0.77, 1.0})
    CHECK(F(t) == doctest::Approx(std::exp(t) - 1.0).epsilon(1e-12));
  CHECK_THROWS_AS(F(1.5), std::domain_error);
  CHECK_THROWS_AS(F(-0.2), std::domain_error);
}

TEST_CASE("projection point budget grows with mode count") {
  CHECK(projection_points(4) == 64);
  CHECK(projection_points(16) == 64);
  CHECK(projection_points(24) == 96);
  CHECK(projection_points(64) == 256);
}
