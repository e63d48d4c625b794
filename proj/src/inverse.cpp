#include "stefan/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stefan/errors.hpp"
#include "stefan/log.hpp"

namespace stefan {

namespace {

constexpr double kSqrt2 = std::numbers::sqrt2;

size_t packed(int i, int j) { return size_t(j) * (size_t(j) + 1) / 2 + size_t(i); }

// Node-sample table of a modal source (rows = nodes).
std::vector<double> node_table(const ModalSourceFn& fn, const TimeGrid& grid,
                               int N) {
  std::vector<double> out(size_t(grid.count()) * size_t(N), 0.0);
  if (!fn) return out;
  std::vector<double> buf(size_t(N), 0.0);
  for (int j = 0; j < grid.count(); ++j) {
    fn(grid.node(j), buf);
    if (int(buf.size()) != N)
      throw ValidationError("assemble: modal source returned wrong size");
    for (int n = 0; n < N; ++n) out[size_t(j) * N + n] = buf[size_t(n)];
  }
  return out;
}

// One-panel product integrals of the mode exponential against the two linear
// hats over panel [t_i, t_i+1], aimed at target node j.  Returned weights
// already carry dt and the exponential mass:
//   left  multiplies the smooth factor at t_i,
//   right multiplies it at t_i+1.
// Mildly damped steps (one-step log decay z <= 1) integrate the true
// exponential with the cached in-step Gauss rule, whose abscissa exponents
// are exact; steeper steps would defeat the polynomial rule, so they switch
// to the log-linear interpolant E(u) = E_right * exp(-z (1-u)), exact at
// both panel ends.
struct PanelMoments {
  double left;
  double right;
};

PanelMoments panel_moments(const ModalPropagator& prop, int n, int i, int j,
                           double z, double E_right) {
  double dt = prop.grid().dt();
  if (z <= 1.0) {
    double t_i = prop.grid().node(i);
    double left = 0.0, right = 0.0;
    for (int g = 0; g < prop.gauss_per_step(); ++g) {
      double u = (prop.tau(i, g) - t_i) / dt;
      double Ew = prop.tau_weight(i, g) * prop.E_tau_to_node(n, i, g, j);
      left += Ew * (1.0 - u);
      right += Ew * u;
    }
    return {left, right};
  }
  double ez = std::exp(-z);
  double f0 = (1.0 - (1.0 + z) * ez) / (z * z);
  double f1 = (z - 1.0 + ez) / (z * z);
  return {dt * E_right * f0, dt * E_right * f1};
}

void check_denominator(const std::vector<double>& d, const TimeGrid& grid,
                       DenominatorPolicy den, const std::string& what,
                       VolterraSystem& sys) {
  double sup = 0.0;
  for (double v : d) sup = std::max(sup, std::abs(v));
  double floor = std::max(den.rel * sup, den.abs);
  sys.denominator_floor = floor;
  if (sup == 0.0)
    throw DenominatorTooSmall(what, 0.0, floor, grid.node(0));
  double margin = 1e300;
  for (size_t j = 0; j < d.size(); ++j) {
    double m = std::abs(d[j]);
    if (m < margin) margin = m;
    if (!(m >= floor))
      throw DenominatorTooSmall(what, d[j], floor, grid.node(int(j)));
  }
  sys.denominator_margin = margin;
}

} // namespace

std::vector<double> trace_rate_p1(const FixedDomainCoefficients& coeffs,
                                  TimeGrid grid) {
  const auto& pc = coeffs.constants();
  std::vector<double> out(size_t(grid.count()));
  for (int j = 0; j < grid.count(); ++j)
    out[size_t(j)] = -pc.L * coeffs.c1(grid.node(j)) / (kSqrt2 * pc.k);
  return out;
}

std::vector<double> trace_rate_p2(const FixedDomainCoefficients& coeffs,
                                  const SmoothFn& q, TimeGrid grid) {
  const auto& pc = coeffs.constants();
  std::vector<double> out(size_t(grid.count()));
  for (int j = 0; j < grid.count(); ++j) {
    double t = grid.node(j);
    auto e = coeffs.boundary().eval(t);
    out[size_t(j)] = (q.deriv(t, 1) * e.s + q(t) * e.s1 - pc.L * e.c1) /
                     (kSqrt2 * pc.k);
  }
  return out;
}

std::vector<double> measured_trace_rate(const ModalSolution& sol) {
  std::vector<double> out(size_t(sol.grid().count()));
  for (int j = 0; j < sol.grid().count(); ++j) out[size_t(j)] = trace_dt(sol, j);
  return out;
}

ModalSourceFn extra_channel_p1(std::shared_ptr<const ModalPropagator> prop) {
  auto basis = prop->basis_ptr();
  auto coeffs = prop->coeffs_ptr();
  double us = coeffs->constants().u_star;
  if (us == 0.0) return {};
  // u* xi s'/s: separable, project xi once
  auto xmodes = basis->project([](double xi) { return xi; });
  return [xmodes, coeffs, us](double t, std::vector<double>& out) {
    auto e = coeffs->boundary().eval(t);
    double fac = us * e.s1 / e.s;
    out.resize(xmodes.size());
    for (size_t n = 0; n < xmodes.size(); ++n) out[n] = fac * xmodes[n];
  };
}

ModalSourceFn extra_channel_p2(std::shared_ptr<const ModalPropagator> prop,
                               SmoothFn q) {
  auto basis = prop->basis_ptr();
  auto coeffs = prop->coeffs_ptr();
  double k = coeffs->constants().k;
  // (q'/k) s (xi-1) - (q/k) s': project (xi-1) and 1 once
  auto x1 = basis->project([](double xi) { return xi - 1.0; });
  auto x0 = basis->project([](double) { return 1.0; });
  return [x1, x0, coeffs, q, k](double t, std::vector<double>& out) {
    auto e = coeffs->boundary().eval(t);
    double c1 = q.deriv(t, 1) * e.s / k;
    double c0 = -q(t) * e.s1 / k;
    out.resize(x1.size());
    for (size_t n = 0; n < x1.size(); ++n) out[n] = c1 * x1[n] + c0 * x0[n];
  };
}

namespace {

VolterraSystem assemble_trace_rate(const std::vector<double>& initial_modes,
                                   ModalSourceFn f_kernel_modes,
                                   ModalSourceFn e_extra_modes,
                                   std::shared_ptr<const ModalPropagator> prop,
                                   const std::vector<double>& nu_prime,
                                   DenominatorPolicy den, std::string tag) {
  if (!prop) throw std::invalid_argument("assemble: null propagator");
  const auto& basis = prop->basis();
  const TimeGrid grid = prop->grid();
  const int N = basis.size();
  const int M = grid.steps;
  if (int(initial_modes.size()) != N)
    throw ValidationError("assemble: initial coefficient count != modes");
  if (int(nu_prime.size()) != grid.count())
    throw ValidationError("assemble: trace-rate sample count != grid nodes");

  VolterraSystem sys;
  sys.grid = grid;
  sys.provenance = std::move(tag);

  // f-kernel node samples and the denominator w(t) = sum (-1)^n mu_n f_n(t)
  auto Ft = node_table(f_kernel_modes, grid, N);
  std::vector<double> w(size_t(M + 1), 0.0);
  for (int j = 0; j <= M; ++j) {
    double acc = 0.0;
    for (int n = 1; n <= N; ++n)
      acc += basis.endpoint_sign(n) * basis.mu(n) * Ft[size_t(j) * N + n - 1];
    w[size_t(j)] = acc;
  }
  check_denominator(w, grid, den, "trace weight of the source factor", sys);

  // Amplitude-off companion run: carries the initial data and the additive
  // channel through the same propagation the forward run uses.
  ModalSolution zero_run =
      solve_modal(initial_modes, {}, e_extra_modes, {}, prop);

  sys.free_term.resize(size_t(M + 1));
  for (int j = 0; j <= M; ++j) {
    double a = prop->a_node(j), b = prop->b_node(j);
    double D = 0.0, S = 0.0;
    for (int n = 1; n <= N; ++n) {
      double coef = basis.endpoint_sign(n) * basis.mu(n);
      double rate = a * basis.eigenvalue(n) - b;
      D += coef * rate * zero_run.U[size_t(j) * N + n - 1];
      S += coef * zero_run.Ee[size_t(j) * N + n - 1];
    }
    sys.free_term[size_t(j)] = (nu_prime[size_t(j)] + D - S) / w[size_t(j)];
  }

  sys.kernel.resize(packed(0, M) + size_t(M) + 1);
  double tail = 0.0;
  for (int j = 0; j <= M; ++j) {
    double a = prop->a_node(j), b = prop->b_node(j);
    for (int i = 0; i <= j; ++i) {
      double acc = 0.0, last = 0.0;
      for (int n = 1; n <= N; ++n) {
        double coef = basis.endpoint_sign(n) * basis.mu(n) *
                      (a * basis.eigenvalue(n) - b);
        last = coef * Ft[size_t(i) * N + n - 1] * prop->E_nodes(n, i, j);
        acc += last;
      }
      sys.kernel[packed(i, j)] = acc / w[size_t(j)];
      if (i == j && acc != 0.0)
        tail = std::max(tail, std::abs(last) / std::abs(acc));
    }
  }
  sys.diag_tail_ratio = tail;

  // product weights: per target node j, panel-exact exponential integrals
  // against the linear interpolant of the smooth factor f_n(tau) R(tau)
  sys.quad_weights.assign(sys.kernel.size(), 0.0);
  std::vector<double> zstep(size_t(M) * size_t(N));
  for (int i = 0; i < M; ++i)
    for (int n = 1; n <= N; ++n)
      zstep[size_t(i) * N + n - 1] = -prop->log_step(n, i);
  std::vector<double> ctilde(size_t(N), 0.0);
  for (int j = 1; j <= M; ++j) {
    double a = prop->a_node(j), b = prop->b_node(j);
    for (int n = 1; n <= N; ++n)
      ctilde[size_t(n - 1)] = basis.endpoint_sign(n) * basis.mu(n) *
                              (a * basis.eigenvalue(n) - b) / w[size_t(j)];
    double* row = sys.quad_weights.data() + packed(0, j);
    for (int i = 0; i < j; ++i) {
      for (int n = 1; n <= N; ++n) {
        double E_right = prop->E_nodes(n, i + 1, j);
        if (E_right == 0.0) continue;
        PanelMoments pm = panel_moments(*prop, n, i, j,
                                        zstep[size_t(i) * N + n - 1], E_right);
        double c = ctilde[size_t(n - 1)];
        row[i] += c * Ft[size_t(i) * N + n - 1] * pm.left;
        row[i + 1] += c * Ft[size_t(i + 1) * N + n - 1] * pm.right;
      }
    }
  }
  if (tail > 1e-6)
    log_info("assemble(" + sys.provenance + "): kernel diagonal tail ratio " +
             std::to_string(tail) + "; mode budget may be low");
  return sys;
}

} // namespace

VolterraSystem assemble_p1(const std::vector<double>& initial_modes,
                           ModalSourceFn f_kernel_modes,
                           ModalSourceFn e_extra_modes,
                           std::shared_ptr<const ModalPropagator> prop,
                           const std::vector<double>& nu_prime,
                           DenominatorPolicy den) {
  return assemble_trace_rate(initial_modes, std::move(f_kernel_modes),
                             std::move(e_extra_modes), std::move(prop),
                             nu_prime, den, "amplitude via value-pinned trace rate");
}

VolterraSystem assemble_p2_r(const std::vector<double>& initial_modes,
                             ModalSourceFn f_kernel_modes, const SmoothFn& q,
                             std::shared_ptr<const ModalPropagator> prop,
                             const std::vector<double>& nu_prime,
                             DenominatorPolicy den) {
  auto e_modes = extra_channel_p2(prop, q);
  std::vector<double> np = nu_prime;
  if (np.empty()) np = trace_rate_p2(prop->coeffs(), q, prop->grid());
  return assemble_trace_rate(initial_modes, std::move(f_kernel_modes),
                             std::move(e_modes), std::move(prop), np, den,
                             "amplitude via slope-pinned trace rate");
}

namespace {

// Direct-trace assembly shared by the two reaction routes.  The end-slope
// identity reads sqrt(2) * sum (-1)^n mu_n U_n(t) = d(t) R(t) / k, so
//   R = F + int K R,   F(t) =  pref(t) sum (-1)^n mu_n psi_n E_n(0,t),
//                      K(tau,t) = pref(t) sum (-1)^n mu_n g_n(tau) E_n(tau,t),
// with pref = sqrt(2) k / d.  Derivative tables come from the product rule:
// d/dt pref = -pref * d'/d and d/dt E_n = -(a lambda_n - b) E_n.
VolterraSystem assemble_direct_trace(const std::vector<double>& initial_modes,
                                     ModalSourceFn g_modes,
                                     std::shared_ptr<const ModalPropagator> prop,
                                     const std::vector<double>& denom,
                                     const std::vector<double>& denom_dt,
                                     DenominatorPolicy den, std::string tag) {
  if (!prop) throw std::invalid_argument("assemble: null propagator");
  const auto& basis = prop->basis();
  const TimeGrid grid = prop->grid();
  const int N = basis.size();
  const int M = grid.steps;
  const double k = prop->coeffs().constants().k;
  if (int(initial_modes.size()) != N)
    throw ValidationError("assemble: initial coefficient count != modes");

  VolterraSystem sys;
  sys.grid = grid;
  sys.provenance = std::move(tag);
  check_denominator(denom, grid, den, "trace denominator", sys);

  auto Gt = node_table(g_modes, grid, N);

  sys.free_term.resize(size_t(M + 1));
  sys.free_term_dt.resize(size_t(M + 1));
  sys.kernel.resize(packed(0, M) + size_t(M) + 1);
  sys.kernel_dt.resize(sys.kernel.size());

  double tail = 0.0;
  for (int j = 0; j <= M; ++j) {
    double pref = kSqrt2 * k / denom[size_t(j)];
    double dlog = denom_dt[size_t(j)] / denom[size_t(j)]; // d'/d
    double a = prop->a_node(j), b = prop->b_node(j);

    { // free term and its derivative from the initial coefficients
      double S0 = 0.0, S1 = 0.0;
      for (int n = 1; n <= N; ++n) {
        double coef = basis.endpoint_sign(n) * basis.mu(n);
        double E = prop->E_nodes(n, 0, j);
        double term = coef * initial_modes[size_t(n - 1)] * E;
        S0 += term;
        S1 += term * (a * basis.eigenvalue(n) - b);
      }
      sys.free_term[size_t(j)] = pref * S0;
      sys.free_term_dt[size_t(j)] = pref * (-dlog * S0 - S1);
    }

    for (int i = 0; i <= j; ++i) {
      double S0 = 0.0, S1 = 0.0, last = 0.0;
      for (int n = 1; n <= N; ++n) {
        double coef = basis.endpoint_sign(n) * basis.mu(n);
        double E = prop->E_nodes(n, i, j);
        double term = coef * Gt[size_t(i) * N + n - 1] * E;
        last = term;
        S0 += term;
        S1 += term * (a * basis.eigenvalue(n) - b);
      }
      sys.kernel[packed(i, j)] = pref * S0;
      sys.kernel_dt[packed(i, j)] = pref * (-dlog * S0 - S1);
      if (i == j && S0 != 0.0)
        tail = std::max(tail, std::abs(last) / std::abs(S0));
    }
  }
  sys.diag_tail_ratio = tail;

  // product weights for both kernels (smooth factor g_n(tau) R(tau))
  sys.quad_weights.assign(sys.kernel.size(), 0.0);
  sys.quad_weights_dt.assign(sys.kernel.size(), 0.0);
  std::vector<double> zstep(size_t(M) * size_t(N));
  for (int i = 0; i < M; ++i)
    for (int n = 1; n <= N; ++n)
      zstep[size_t(i) * N + n - 1] = -prop->log_step(n, i);
  for (int j = 1; j <= M; ++j) {
    double pref = kSqrt2 * k / denom[size_t(j)];
    double dlog = denom_dt[size_t(j)] / denom[size_t(j)];
    double a = prop->a_node(j), b = prop->b_node(j);
    double* row = sys.quad_weights.data() + packed(0, j);
    double* row_dt = sys.quad_weights_dt.data() + packed(0, j);
    for (int i = 0; i < j; ++i) {
      for (int n = 1; n <= N; ++n) {
        double E_right = prop->E_nodes(n, i + 1, j);
        if (E_right == 0.0) continue;
        PanelMoments pm = panel_moments(*prop, n, i, j,
                                        zstep[size_t(i) * N + n - 1], E_right);
        double c = pref * basis.endpoint_sign(n) * basis.mu(n);
        double ct = c * (-dlog - (a * basis.eigenvalue(n) - b));
        double gl = Gt[size_t(i) * N + n - 1], gr = Gt[size_t(i + 1) * N + n - 1];
        row[i] += c * gl * pm.left;
        row[i + 1] += c * gr * pm.right;
        row_dt[i] += ct * gl * pm.left;
        row_dt[i + 1] += ct * gr * pm.right;
      }
    }
  }
  if (tail > 1e-6)
    log_info("assemble(" + sys.provenance + "): kernel diagonal tail ratio " +
             std::to_string(tail) + "; mode budget may be low");
  return sys;
}

} // namespace

VolterraSystem assemble_p3(const std::vector<double>& initial_modes,
                           ModalSourceFn g_modes,
                           std::shared_ptr<const ModalPropagator> prop,
                           DenominatorPolicy den) {
  const auto& coeffs = prop->coeffs();
  const auto& pc = coeffs.constants();
  const TimeGrid grid = prop->grid();
  // slope identity denominator: -(L c + u* k)
  std::vector<double> d(size_t(grid.count())), ddt(size_t(grid.count()));
  for (int j = 0; j < grid.count(); ++j) {
    double t = grid.node(j);
    d[size_t(j)] = -(pc.L * coeffs.c(t) + pc.u_star * pc.k);
    ddt[size_t(j)] = -pc.L * coeffs.c1(t);
  }
  return assemble_direct_trace(initial_modes, std::move(g_modes),
                               std::move(prop), d, ddt, den,
                               "amplitude via value-pinned end slope");
}

VolterraSystem assemble_p4_r(const std::vector<double>& initial_modes,
                             ModalSourceFn h_modes, const SmoothFn& q,
                             std::shared_ptr<const ModalPropagator> prop,
                             DenominatorPolicy den) {
  const auto& coeffs = prop->coeffs();
  const auto& pc = coeffs.constants();
  const TimeGrid grid = prop->grid();
  // slope identity denominator: q s - L c
  std::vector<double> d(size_t(grid.count())), ddt(size_t(grid.count()));
  for (int j = 0; j < grid.count(); ++j) {
    double t = grid.node(j);
    auto e = coeffs.boundary().eval(t);
    d[size_t(j)] = q(t) * e.s - pc.L * e.c;
    ddt[size_t(j)] = q.deriv(t, 1) * e.s + q(t) * e.s1 - pc.L * e.c1;
  }
  return assemble_direct_trace(initial_modes, std::move(h_modes),
                               std::move(prop), d, ddt, den,
                               "amplitude via slope-pinned end slope");
}

RecoveryResult solve_volterra(const VolterraSystem& sys, VolterraMethod method,
                              PicardOptions opts) {
  const int M = sys.grid.steps;
  if (int(sys.free_term.size()) != M + 1)
    throw ValidationError("solve_volterra: free term size != grid nodes");
  const double dt = sys.grid.dt();

  RecoveryResult res;
  res.grid = sys.grid;
  res.denominator_margin = sys.denominator_margin;
  res.provenance = sys.provenance;
  res.values.assign(size_t(M + 1), 0.0);
  auto& R = res.values;

  // discrete weight of node i in the integral targeted at node j: product
  // weights when the assembly built them, plain trapezoid on K otherwise
  const bool product = sys.has_product_weights();
  auto weight = [&](int i, int j) -> double {
    if (product) return sys.W(i, j);
    if (j == 0) return 0.0;
    double w = (i == 0 || i == j) ? 0.5 * dt : dt;
    return w * sys.K(i, j);
  };

  if (method == VolterraMethod::ProductTrapezoid) {
    res.solver = "product-trapezoid";
    R[0] = sys.free_term[0];
    for (int j = 1; j <= M; ++j) {
      double S = 0.0;
      for (int i = 0; i < j; ++i) S += weight(i, j) * R[size_t(i)];
      double diag = 1.0 - weight(j, j);
      if (std::abs(diag) < 1e-12)
        throw NumericalError("solve_volterra: singular step at t=" +
                             std::to_string(sys.grid.node(j)));
      R[size_t(j)] = (sys.free_term[size_t(j)] + S) / diag;
    }
  } else {
    res.solver = "picard";
    R = sys.free_term;
    std::vector<double> next(size_t(M + 1));
    double delta = 0.0;
    int it = 0;
    for (; it < opts.max_iter; ++it) {
      delta = 0.0;
      for (int j = 0; j <= M; ++j) {
        double S = 0.0;
        for (int i = 0; i <= j; ++i) S += weight(i, j) * R[size_t(i)];
        next[size_t(j)] = sys.free_term[size_t(j)] + S;
        delta = std::max(delta, std::abs(next[size_t(j)] - R[size_t(j)]));
      }
      R.swap(next);
      if (!(delta == delta)) // NaN
        throw PicardDivergence(it + 1, delta);
      if (delta <= opts.tol) break;
    }
    if (delta > opts.tol) throw PicardDivergence(it, delta);
    res.iterations = it + 1;
  }

  // discrete residual of the second-kind equation under the same weights
  double resid = 0.0;
  for (int j = 0; j <= M; ++j) {
    double S = 0.0;
    for (int i = 0; i <= j; ++i) S += weight(i, j) * R[size_t(i)];
    resid = std::max(resid,
                     std::abs(R[size_t(j)] - sys.free_term[size_t(j)] - S));
  }
  res.residual = resid;
  return res;
}

std::vector<double> differentiate_r(const VolterraSystem& sys,
                                    const RecoveryResult& amplitude) {
  if (!sys.has_derivatives())
    throw NumericalError(
        "differentiate_r: system carries no derivative tables "
        "(trace-rate assemblies do not need them)");
  const int M = sys.grid.steps;
  if (int(amplitude.values.size()) != M + 1)
    throw ValidationError("differentiate_r: amplitude size != grid nodes");
  const double dt = sys.grid.dt();
  const auto& R = amplitude.values;

  const bool product = !sys.quad_weights_dt.empty();
  std::vector<double> out(size_t(M + 1));
  for (int j = 0; j <= M; ++j) {
    double S = 0.0;
    for (int i = 0; i <= j; ++i) {
      double w;
      if (product) {
        w = sys.Wt(i, j);
      } else {
        double tw = (i == 0 || i == j) ? 0.5 * dt : dt;
        if (j == 0) tw = 0.0;
        w = tw * sys.Kt(i, j);
      }
      S += w * R[size_t(i)];
    }
    out[size_t(j)] =
        sys.free_term_dt[size_t(j)] + S + sys.K(j, j) * R[size_t(j)];
  }
  return out;
}

std::vector<double> recover_p(const RecoveryResult& amplitude,
                              const std::vector<double>& amplitude_dt,
                              DenominatorPolicy den) {
  const auto& R = amplitude.values;
  if (R.size() != amplitude_dt.size())
    throw ValidationError("recover_p: sample count mismatch");
  double sup = 0.0;
  for (double v : R) sup = std::max(sup, std::abs(v));
  double floor = std::max(den.rel * sup, den.abs);
  if (sup == 0.0)
    throw DenominatorTooSmall("recovered amplitude", 0.0, floor,
                              amplitude.grid.node(0));
  for (size_t j = 0; j < R.size(); ++j)
    if (!(std::abs(R[j]) >= floor))
      throw DenominatorTooSmall("recovered amplitude", R[j], floor,
                                amplitude.grid.node(int(j)));
  std::vector<double> out(R.size());
  for (size_t j = 0; j < R.size(); ++j) out[j] = -amplitude_dt[j] / R[j];
  return out;
}

} // namespace stefan
