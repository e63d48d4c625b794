#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "stefan/errors.hpp"
#include "stefan/forward.hpp"
#include "stefan/geometry.hpp"
#include "stefan/inverse.hpp"

using namespace stefan;

namespace {

constexpr double kPi = std::numbers::pi;

struct Rig {
  std::shared_ptr<const EigenBasis> basis;
  std::shared_ptr<const FixedDomainCoefficients> coeffs;
  std::shared_ptr<const ModalPropagator> prop;
};

Rig make_rig(BasisKind kind, int modes, int steps, double a2, double s0,
             double rate, double T, double k = 1.0, double L = 1.0,
             double u_star = 0.0) {
  PhysicalConstants pc;
  pc.a2 = a2;
  pc.k = k;
  pc.L = L;
  pc.u_star = u_star;
  pc.T = T;
  auto basis = std::make_shared<EigenBasis>(kind, modes);
  auto coeffs = std::make_shared<FixedDomainCoefficients>(
      MovingBoundary::affine(s0, rate, T), pc, *basis);
  auto prop = std::make_shared<ModalPropagator>(coeffs, basis,
                                                TimeGrid::uniform(T, steps));
  return {basis, coeffs, prop};
}

ModalSourceFn unit_first_mode() {
  return [](double, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
  };
}

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace

TEST_CASE("value-pinned trace rate follows the boundary acceleration") {
  PhysicalConstants pc;
  pc.k = 0.5;
  pc.L = 2.0;
  EigenBasis basis(BasisKind::DirichletDirichlet, 2);
  FixedDomainCoefficients coeffs(MovingBoundary::affine(1.0, 0.1, 1.0), pc,
                                 basis);
  auto rate = trace_rate_p1(coeffs, TimeGrid::uniform(1.0, 8));
  REQUIRE(rate.size() == 9);
  // c1 = s'' s + s'^2 = 0.01 for s = 1 + 0.1 t, so the rate is constant:
  // -L c1 / (sqrt(2) k) = -0.02 / (sqrt(2) * 0.5)
  for (double v : rate) CHECK(v == doctest::Approx(-0.028284271247461905).epsilon(1e-13));
}

TEST_CASE("slope-pinned trace rate adds the flux motion terms") {
  PhysicalConstants pc;
  pc.k = 0.5;
  pc.L = 2.0;
  EigenBasis basis(BasisKind::NeumannDirichlet, 2);
  FixedDomainCoefficients coeffs(MovingBoundary::affine(1.0, 0.1, 1.0), pc,
                                 basis);
  SmoothFn q = SmoothFn::polynomial({1.0, 1.0}); // q = 1 + t
  TimeGrid grid = TimeGrid::uniform(1.0, 4);
  auto rate = trace_rate_p2(coeffs, q, grid);
  REQUIRE(rate.size() == 5);
  double sqrt2 = std::numbers::sqrt2;
  // (q' s + q s' - L c1) / (sqrt(2) k)
  CHECK(rate[0] == doctest::Approx((1.0 + 0.1 - 0.02) / (sqrt2 * 0.5)).epsilon(1e-13));
  CHECK(rate[4] == doctest::Approx((1.1 + 0.2 - 0.02) / (sqrt2 * 0.5)).epsilon(1e-13));

  SUBCASE("zero flux reduces to the value-pinned rate") {
    auto p2 = trace_rate_p2(coeffs, SmoothFn(), grid);
    auto p1 = trace_rate_p1(coeffs, grid);
    CHECK(sup_diff(p2, p1) == 0.0);
  }
}

TEST_CASE("additive channels carry the homogenization shifts") {
  SUBCASE("value-pinned: u* xi s'/s") {
    Rig rig = make_rig(BasisKind::DirichletDirichlet, 3, 4, 1.0, 1.0, 0.2, 1.0,
                       1.0, 1.0, 0.5);
    auto ch = extra_channel_p1(rig.prop);
    REQUIRE(bool(ch));
    std::vector<double> out(3, 7.0);
    ch(0.0, out);
    // u* (s'/s) <xi, phi_1> = 0.5 * 0.2 * sqrt(2)/pi
    CHECK(out[0] == doctest::Approx(0.1 * std::numbers::sqrt2 / kPi).epsilon(1e-12));
    ch(1.0, out);
    CHECK(out[0] == doctest::Approx(0.5 * (0.2 / 1.2) * std::numbers::sqrt2 / kPi).epsilon(1e-12));
  }
  SUBCASE("value-pinned channel is empty without an interface offset") {
    Rig rig = make_rig(BasisKind::DirichletDirichlet, 3, 4, 1.0, 1.0, 0.2, 1.0);
    CHECK_FALSE(bool(extra_channel_p1(rig.prop)));
  }
  SUBCASE("slope-pinned: (q'/k) s (xi-1) - (q/k) s'") {
    Rig rig = make_rig(BasisKind::NeumannDirichlet, 3, 4, 1.0, 1.0, 0.2, 1.0, 4.0);
    auto ch = extra_channel_p2(rig.prop, SmoothFn::constant(2.0));
    std::vector<double> out(3, 0.0);
    ch(0.0, out);
    // -(q/k) s' <1, phi_1> = -0.1 * 2 sqrt(2)/pi
    CHECK(out[0] == doctest::Approx(-0.2 * std::numbers::sqrt2 / kPi).epsilon(1e-12));
  }
}

TEST_CASE("single-mode assembly freezes kernel, free term, and weights") {
  // one static mode: K(tau,t) = pi^2 exp(-pi^2 (t-tau)), denominator -pi
  const int M = 16;
  Rig rig = make_rig(BasisKind::DirichletDirichlet, 1, M, 1.0, 1.0, 0.0, 1.0);
  std::vector<double> nu(size_t(M + 1));
  TimeGrid grid = rig.prop->grid();
  for (int j = 0; j <= M; ++j) nu[size_t(j)] = std::sin(grid.node(j));

  VolterraSystem sys =
      assemble_p1({0.0}, unit_first_mode(), {}, rig.prop, nu);
  CHECK(sys.denominator_margin == doctest::Approx(kPi).epsilon(1e-13));

  for (int j = 0; j <= M; ++j) {
    CHECK(sys.free_term[size_t(j)] ==
          doctest::Approx(std::sin(grid.node(j)) / -kPi).epsilon(1e-12));
    for (int i = 0; i <= j; ++i) {
      double expect = kPi * kPi * std::exp(-kPi * kPi * (grid.node(j) - grid.node(i)));
      CHECK(sys.K(i, j) == doctest::Approx(expect).epsilon(1e-12));
    }
  }

  SUBCASE("product weights integrate the kernel row exactly") {
    REQUIRE(sys.has_product_weights());
    // sum_i W(i,j) approximates int_0^tj K = 1 - exp(-pi^2 tj); the constant
    // factor is reproduced exactly by the hat decomposition, so the only
    // error left is the in-step quadrature of the exponential.
    for (int j = 1; j <= M; ++j) {
      double sum = 0.0;
      for (int i = 0; i <= j; ++i) sum += sys.W(i, j);
      CHECK(sum == doctest::Approx(1.0 - std::exp(-kPi * kPi * grid.node(j)))
                       .epsilon(1e-10));
    }
  }

  SUBCASE("initial data feeds the free term through the companion run") {
    VolterraSystem sys2 = assemble_p1({1.0}, unit_first_mode(), {}, rig.prop,
                                      std::vector<double>(size_t(M + 1), 0.0));
    // free term = D / w = (-pi * pi^2 e^{-pi^2 t}) / (-pi)
    for (int j = 0; j <= M; ++j) {
      double expect = kPi * kPi * std::exp(-kPi * kPi * grid.node(j));
      CHECK(sys2.free_term[size_t(j)] == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("assembled free term cancels a source-free forward run") {
  // Forward data generated with the amplitude channel off must produce an
  // identically zero free term: the measured trace rate and the companion-run
  // terms go through the same modal arithmetic.
  Rig rig = make_rig(BasisKind::DirichletDirichlet, 8, 50, 1.3, 1.0, 0.2, 1.0,
                     0.9, 1.7, 0.5);
  auto initial = rig.basis->project([](double xi) {
    double b = xi * (1.0 - xi);
    return b * b * b;
  });
  ModalSourceFn f = [](double t, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0 + t;
  };
  auto e = extra_channel_p1(rig.prop);
  REQUIRE(bool(e));

  ModalSolution sol = solve_modal(initial, f, e, {}, rig.prop);
  auto nu = measured_trace_rate(sol);
  double scale = 1.0;
  for (double v : nu) scale = std::max(scale, std::abs(v));

  VolterraSystem sys = assemble_p1(initial, f, e, rig.prop, nu);
  for (double v : sys.free_term) CHECK(std::abs(v) <= 1e-10 * scale);
}

TEST_CASE("amplitude round trip through the value-pinned route") {
  const int M = 400;
  Rig rig = make_rig(BasisKind::DirichletDirichlet, 1, M, 1.0, 1.0, 0.1, 1.0);
  auto R_true = [](double t) { return 1.0 + 0.5 * t; };
  ModalSolution sol =
      solve_modal({0.7}, unit_first_mode(), {}, R_true, rig.prop);
  auto nu = measured_trace_rate(sol);
  VolterraSystem sys = assemble_p1({0.7}, unit_first_mode(), {}, rig.prop, nu);

  RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
  REQUIRE(int(rec.values.size()) == M + 1);
  double err = 0.0;
  for (int j = 0; j <= M; ++j)
    err = std::max(err, std::abs(rec.values[size_t(j)] - R_true(rig.prop->grid().node(j))));
  CHECK(err <= 1e-8);
  CHECK(rec.residual <= 1e-12);
  CHECK(rec.solver == "product-trapezoid");

  SUBCASE("fixed-point solve agrees with the march") {
    RecoveryResult pic = solve_volterra(sys, VolterraMethod::Picard);
    CHECK(pic.iterations > 0);
    CHECK(sup_diff(pic.values, rec.values) <= 1e-9);
  }
}

TEST_CASE("amplitude round trip through the slope-pinned route") {
  const int M = 400;
  Rig rig = make_rig(BasisKind::NeumannDirichlet, 1, M, 1.0, 1.0, 0.1, 1.0);
  SmoothFn q = SmoothFn::polynomial({0.3, 0.1});
  auto R_true = [](double t) { return 1.0 + 0.25 * t; };
  auto e = extra_channel_p2(rig.prop, q);
  ModalSolution sol = solve_modal({0.4}, unit_first_mode(), e, R_true, rig.prop);
  auto nu = measured_trace_rate(sol);
  VolterraSystem sys = assemble_p2_r({0.4}, unit_first_mode(), q, rig.prop, nu);

  RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
  double err = 0.0;
  for (int j = 0; j <= M; ++j)
    err = std::max(err, std::abs(rec.values[size_t(j)] - R_true(rig.prop->grid().node(j))));
  CHECK(err <= 1e-8);
}

TEST_CASE("slope-pinned assembly with zero flux equals the value-pinned one") {
  const int M = 24;
  Rig rig = make_rig(BasisKind::NeumannDirichlet, 4, M, 1.2, 1.0, 0.15, 1.0,
                     0.8, 1.1);
  std::vector<double> initial = {0.3, -0.1, 0.05, 0.0};
  ModalSourceFn f = [](double t, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    out[1] = 0.2 * std::cos(t);
  };
  auto np = trace_rate_p1(*rig.coeffs, rig.prop->grid());
  VolterraSystem a = assemble_p1(initial, f, {}, rig.prop, np);
  VolterraSystem b = assemble_p2_r(initial, f, SmoothFn(), rig.prop);
  CHECK(a.free_term == b.free_term);
  CHECK(a.kernel == b.kernel);
  CHECK(a.quad_weights == b.quad_weights);
}

TEST_CASE("march solves hand-built second-kind systems") {
  const int M = 400;
  VolterraSystem sys;
  sys.grid = TimeGrid::uniform(1.0, M);

  SUBCASE("zero kernel returns the free term unchanged") {
    sys.free_term.resize(size_t(M + 1));
    for (int j = 0; j <= M; ++j) sys.free_term[size_t(j)] = std::sin(sys.grid.node(j));
    sys.kernel.assign(size_t(M + 1) * size_t(M + 2) / 2, 0.0);
    RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
    CHECK(rec.values == sys.free_term);
  }

  SUBCASE("unit kernel grows the exponential") {
    sys.free_term.assign(size_t(M + 1), 1.0);
    sys.kernel.assign(size_t(M + 1) * size_t(M + 2) / 2, 1.0);
    RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
    double err = 0.0;
    for (int j = 0; j <= M; ++j)
      err = std::max(err, std::abs(rec.values[size_t(j)] - std::exp(sys.grid.node(j))));
    CHECK(err <= 1e-5);
    CHECK(rec.residual <= 1e-10);

    RecoveryResult pic = solve_volterra(sys, VolterraMethod::Picard);
    CHECK(pic.iterations > 0);
    CHECK(sup_diff(pic.values, rec.values) <= 1e-9);
  }

  SUBCASE("linear free term with unit kernel keeps the solution constant") {
    sys.free_term.resize(size_t(M + 1));
    for (int j = 0; j <= M; ++j) sys.free_term[size_t(j)] = 1.0 - sys.grid.node(j);
    sys.kernel.assign(size_t(M + 1) * size_t(M + 2) / 2, 1.0);
    RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
    for (double v : rec.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("fixed-point iteration reports non-contraction") {
  const int M = 10;
  VolterraSystem sys;
  sys.grid = TimeGrid::uniform(1.0, M);
  sys.free_term.assign(size_t(M + 1), 1.0);
  sys.kernel.assign(size_t(M + 1) * size_t(M + 2) / 2, 50.0);
  PicardOptions opts;
  opts.max_iter = 20;
  opts.tol = 1e-12;
  CHECK_THROWS_AS(solve_volterra(sys, VolterraMethod::Picard, opts),
                  PicardDivergence);
  try {
    solve_volterra(sys, VolterraMethod::Picard, opts);
  } catch (const PicardDivergence& e) {
    CHECK(e.iterations == 20);
    CHECK(e.residual > 1.0);
  }
}

TEST_CASE("march refuses a singular step") {
  const int M = 4;
  VolterraSystem sys;
  sys.grid = TimeGrid::uniform(1.0, M);
  sys.free_term.assign(size_t(M + 1), 1.0);
  // trapezoid diagonal weight 0.5 * dt * K = 1 kills the update
  sys.kernel.assign(size_t(M + 1) * size_t(M + 2) / 2, 8.0);
  CHECK_THROWS_AS(solve_volterra(sys, VolterraMethod::ProductTrapezoid),
                  NumericalError);
}

TEST_CASE("vanishing trace weight aborts the assembly") {
  const int M = 10;
  Rig rig = make_rig(BasisKind::DirichletDirichlet, 1, M, 1.0, 1.0, 0.0, 1.0);
  std::vector<double> nu(size_t(M + 1), 0.0);

  SUBCASE("zero crossing is located in time") {
    ModalSourceFn f = [](double t, std::vector<double>& out) {
      std::fill(out.begin(), out.end(), 0.0);
      out[0] = 0.5 - t;
    };
    CHECK_THROWS_AS(assemble_p1({0.0}, f, {}, rig.prop, nu),
                    DenominatorTooSmall);
    try {
      assemble_p1({0.0}, f, {}, rig.prop, nu);
    } catch (const DenominatorTooSmall& e) {
      CHECK(e.t == doctest::Approx(0.5).epsilon(1e-12));
      CHECK(std::abs(e.value) < e.floor);
    }
  }

  SUBCASE("identically zero weight throws at the origin") {
    CHECK_THROWS_AS(assemble_p1({0.0}, ModalSourceFn{}, {}, rig.prop, nu),
                    DenominatorTooSmall);
  }
}

TEST_CASE("direct-trace assembly freezes the value-pinned reaction route") {
  // static single mode, unit constants, interface value 1: denominator -1,
  // free term sqrt(2) pi e^{-pi^2 t}, empty kernel
  const int M = 20;
  Rig rig = make_rig(BasisKind::DirichletDirichlet, 1, M, 1.0, 1.0, 0.0, 1.0,
                     1.0, 1.0, 1.0);
  VolterraSystem sys = assemble_p3({1.0}, {}, rig.prop);
  TimeGrid grid = rig.prop->grid();
  const double sqrt2 = std::numbers::sqrt2;
  for (int j = 0; j <= M; ++j) {
    double expect = sqrt2 * kPi * std::exp(-kPi * kPi * grid.node(j));
    CHECK(sys.free_term[size_t(j)] == doctest::Approx(expect).epsilon(1e-12));
    CHECK(sys.free_term_dt[size_t(j)] ==
          doctest::Approx(-kPi * kPi * expect).epsilon(1e-12));
  }

  RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
  CHECK(rec.values == sys.free_term);

  auto rdt = differentiate_r(sys, rec);
  auto p = recover_p(rec, rdt);
  for (double v : p) CHECK(v == doctest::Approx(kPi * kPi).epsilon(1e-12));
}

TEST_CASE("direct-trace assembly freezes the slope-pinned reaction route") {
  // static single slope-pinned mode with unit flux: denominator q s - L c = 1,
  // free term -sqrt(2) (pi/2) e^{-pi^2 t / 4}
  const int M = 20;
  Rig rig = make_rig(BasisKind::NeumannDirichlet, 1, M, 1.0, 1.0, 0.0, 1.0);
  VolterraSystem sys = assemble_p4_r({1.0}, {}, SmoothFn::constant(1.0), rig.prop);
  TimeGrid grid = rig.prop->grid();
  const double mu = kPi / 2.0;
  for (int j = 0; j <= M; ++j) {
    double expect = -std::numbers::sqrt2 * mu * std::exp(-mu * mu * grid.node(j));
    CHECK(sys.free_term[size_t(j)] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("trace derivative combines the assembled tables") {
  const int M = 50;
  VolterraSystem sys;
  sys.grid = TimeGrid::uniform(1.0, M);
  sys.free_term.assign(size_t(M + 1), 1.0);
  sys.kernel.assign(size_t(M + 1) * size_t(M + 2) / 2, 1.0);
  sys.free_term_dt.assign(size_t(M + 1), 0.0);
  sys.kernel_dt.assign(sys.kernel.size(), 0.0);
  RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
  // L' = 0 and dK/dt = 0 leave R'(t) = K(t,t) R(t) = R(t)
  auto rdt = differentiate_r(sys, rec);
  CHECK(rdt == rec.values);

  SUBCASE("systems without tables refuse to differentiate") {
    VolterraSystem bare;
    bare.grid = sys.grid;
    bare.free_term = sys.free_term;
    bare.kernel = sys.kernel;
    CHECK_THROWS_AS(differentiate_r(bare, rec), NumericalError);
  }
}

TEST_CASE("reaction extraction is the logarithmic rate of the amplitude") {
  const int M = 32;
  RecoveryResult rec;
  rec.grid = TimeGrid::uniform(1.0, M);
  rec.values.resize(size_t(M + 1));
  std::vector<double> rdt(size_t(M + 1));

  SUBCASE("exponential decay recovers its constant rate") {
    for (int j = 0; j <= M; ++j) {
      double t = rec.grid.node(j);
      rec.values[size_t(j)] = std::exp(-0.3 * t);
      rdt[size_t(j)] = -0.3 * std::exp(-0.3 * t);
    }
    auto p = recover_p(rec, rdt);
    for (double v : p) CHECK(v == doctest::Approx(0.3).epsilon(1e-13));
  }

  SUBCASE("constant amplitude recovers a zero coefficient") {
    std::fill(rec.values.begin(), rec.values.end(), 1.0);
    std::fill(rdt.begin(), rdt.end(), 0.0);
    auto p = recover_p(rec, rdt);
    for (double v : p) CHECK(v == 0.0);
  }

  SUBCASE("hyperbolic amplitude recovers a time-varying coefficient") {
    for (int j = 0; j <= M; ++j) {
      double t = rec.grid.node(j);
      rec.values[size_t(j)] = 1.0 / (1.0 + t);
      rdt[size_t(j)] = -1.0 / ((1.0 + t) * (1.0 + t));
    }
    auto p = recover_p(rec, rdt);
    for (int j = 0; j <= M; ++j)
      CHECK(p[size_t(j)] ==
            doctest::Approx(1.0 / (1.0 + rec.grid.node(j))).epsilon(1e-13));
  }

  SUBCASE("an amplitude crossing zero is rejected") {
    for (int j = 0; j <= M; ++j)
      rec.values[size_t(j)] = 1.0 - 2.0 * rec.grid.node(j);
    std::fill(rdt.begin(), rdt.end(), -2.0);
    CHECK_THROWS_AS(recover_p(rec, rdt), DenominatorTooSmall);
  }
}

TEST_CASE("reaction round trip through the value-pinned end slope") {
  // moving boundary, steered two-mode data: P = 0.5 recovered through the
  // product-weighted march and the assembled derivative tables
  const int M = 200;
  Rig rig = make_rig(BasisKind::DirichletDirichlet, 2, M, 1.0, 1.0, 0.1, 1.0,
                     1.0, 1.0, 1.0);
  // amplitude e^{-t/2} and its trace: drive both modes so the end-slope
  // identity holds exactly for R(t) = e^{-t/2}
  auto coeffs = rig.coeffs;
  auto basisp = rig.basis;
  const double B1 = -1.0 / (std::numbers::sqrt2 * kPi);
  const double B2 = 0.1 / std::numbers::sqrt2;
  const double rho = -kPi * B1 + 2.0 * kPi * B2; // sum (-1)^n mu_n B_n
  auto R = [](double t) { return std::exp(-0.5 * t); };
  auto Rdt = [](double t) { return -0.5 * std::exp(-0.5 * t); };
  auto dfun = [coeffs](double t) {
    const auto& pc = coeffs->constants();
    return -(pc.L * coeffs->c(t) + pc.u_star * pc.k);
  };
  auto ddt = [coeffs](double t) {
    const auto& pc = coeffs->constants();
    return -pc.L * coeffs->c1(t);
  };
  auto theta = [&](double t) {
    return R(t) * dfun(t) / (std::numbers::sqrt2 * 1.0 * rho);
  };
  auto theta_dt = [&](double t) {
    return (Rdt(t) * dfun(t) + R(t) * ddt(t)) / (std::numbers::sqrt2 * rho);
  };
  // g_n = B_n (theta' + (a lambda_n - b) theta) / R
  ModalSourceFn g = [=](double t, std::vector<double>& out) {
    double a = coeffs->a(t), b = coeffs->b_diag(t);
    double th = theta(t), thd = theta_dt(t), r = R(t);
    out[0] = B1 * (thd + (a * basisp->eigenvalue(1) - b) * th) / r;
    out[1] = B2 * (thd + (a * basisp->eigenvalue(2) - b) * th) / r;
  };
  std::vector<double> initial = {theta(0.0) * B1, theta(0.0) * B2};

  VolterraSystem sys = assemble_p3(initial, g, rig.prop);
  RecoveryResult rec = solve_volterra(sys, VolterraMethod::ProductTrapezoid);
  double rerr = 0.0;
  for (int j = 0; j <= M; ++j)
    rerr = std::max(rerr, std::abs(rec.values[size_t(j)] - R(rig.prop->grid().node(j))));
  CHECK(rerr <= 1e-5);

  auto rdt = differentiate_r(sys, rec);
  auto p = recover_p(rec, rdt);
  double perr = 0.0;
  for (double v : p) perr = std::max(perr, std::abs(v - 0.5));
  CHECK(perr <= 1e-4);
}
