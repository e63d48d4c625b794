#include "stefan/forward.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stefan/errors.hpp"
#include "stefan/log.hpp"

namespace stefan {

TimeGrid TimeGrid::uniform(double T, int steps) {
  if (!(T > 0)) throw ValidationError("time grid: horizon must be positive");
  if (steps < 1) throw ValidationError("time grid: need at least one step");
  return TimeGrid{T, steps};
}

ModalPropagator::ModalPropagator(
    std::shared_ptr<const FixedDomainCoefficients> coeffs,
    std::shared_ptr<const EigenBasis> basis, TimeGrid grid)
    : coeffs_(std::move(coeffs)), basis_(std::move(basis)), grid_(grid) {
  if (!coeffs_ || !basis_)
    throw std::invalid_argument("ModalPropagator: null coefficients or basis");
  if (grid_.T > coeffs_->boundary().horizon() * (1 + 1e-12))
    throw ValidationError("ModalPropagator: grid horizon exceeds boundary data");
  const auto* c = coeffs_.get();
  A_ = cumulative_gauss([c](double t) { return c->a(t); }, grid_.T, grid_.steps,
                        kGaussPerStep);
  B_ = cumulative_gauss([c](double t) { return c->b_diag(t); }, grid_.T,
                        grid_.steps, kGaussPerStep);
  lambda_.resize(size_t(basis_->size()));
  for (int n = 1; n <= basis_->size(); ++n)
    lambda_[size_t(n - 1)] = basis_->eigenvalue(n);
  a_nodes_.resize(size_t(grid_.count()));
  b_nodes_.resize(size_t(grid_.count()));
  for (int j = 0; j < grid_.count(); ++j) {
    a_nodes_[size_t(j)] = coeffs_->a(grid_.node(j));
    b_nodes_[size_t(j)] = coeffs_->b_diag(grid_.node(j));
  }
}

double ModalPropagator::tau(int j, int g) const {
  return A_.tau[size_t(j) * kGaussPerStep + size_t(g)];
}

double ModalPropagator::tau_weight(int j, int g) const {
  return A_.tau_w[size_t(j) * kGaussPerStep + size_t(g)];
}

double ModalPropagator::E_nodes(int n, int i, int j) const {
  double dA = A_.at_nodes[size_t(j)] - A_.at_nodes[size_t(i)];
  double dB = B_.at_nodes[size_t(j)] - B_.at_nodes[size_t(i)];
  return std::exp(-lambda_[size_t(n - 1)] * dA + dB);
}

double ModalPropagator::log_step(int n, int i) const {
  double dA = A_.at_nodes[size_t(i) + 1] - A_.at_nodes[size_t(i)];
  double dB = B_.at_nodes[size_t(i) + 1] - B_.at_nodes[size_t(i)];
  return -lambda_[size_t(n - 1)] * dA + dB;
}

double ModalPropagator::E_tau_to_node(int n, int j, int g, int to) const {
  size_t idx = size_t(j) * kGaussPerStep + size_t(g);
  double dA = A_.at_nodes[size_t(to)] - A_.at_tau[idx];
  double dB = B_.at_nodes[size_t(to)] - B_.at_tau[idx];
  return std::exp(-lambda_[size_t(n - 1)] * dA + dB);
}

ModalSourceFn project_source(Field f, std::shared_ptr<const EigenBasis> basis) {
  if (!f) return {};
  return [f = std::move(f), basis = std::move(basis)](double t,
                                                      std::vector<double>& out) {
    auto c = basis->project([&f, t](double xi) { return f(xi, t); });
    out.assign(c.begin(), c.end());
  };
}

ModalSolution solve_modal(const std::vector<double>& initial,
                          ModalSourceFn f_kernel_modes,
                          ModalSourceFn e_extra_modes,
                          std::function<double(double)> amplitude,
                          std::shared_ptr<const ModalPropagator> prop) {
  if (!prop) throw std::invalid_argument("solve_modal: null propagator");
  const int N = prop->basis().size();
  const int M = prop->grid().steps;
  if (int(initial.size()) != N)
    throw ValidationError("solve_modal: initial coefficient count (" +
                          std::to_string(initial.size()) + ") != modes (" +
                          std::to_string(N) + ")");

  ModalSolution sol;
  sol.prop = prop;
  sol.U.assign(size_t(M + 1) * N, 0.0);
  sol.R.assign(size_t(M + 1), 0.0);
  sol.Fk.assign(size_t(M + 1) * N, 0.0);
  sol.Ee.assign(size_t(M + 1) * N, 0.0);

  std::vector<double> fbuf(size_t(N), 0.0), ebuf(size_t(N), 0.0);
  auto fill = [&](ModalSourceFn& fn, double t, std::vector<double>& buf) {
    if (fn) {
      fn(t, buf);
      if (int(buf.size()) != N)
        throw ValidationError("solve_modal: modal source returned wrong size");
    } else {
      std::fill(buf.begin(), buf.end(), 0.0);
    }
  };

  // node samples (diagnostics, time-derivative evaluation, kernel reuse)
  for (int j = 0; j <= M; ++j) {
    double t = prop->grid().node(j);
    fill(f_kernel_modes, t, fbuf);
    fill(e_extra_modes, t, ebuf);
    for (int n = 0; n < N; ++n) {
      sol.Fk[size_t(j) * N + n] = fbuf[size_t(n)];
      sol.Ee[size_t(j) * N + n] = ebuf[size_t(n)];
    }
    sol.R[size_t(j)] = amplitude ? amplitude(t) : 0.0;
  }

  for (int n = 0; n < N; ++n) sol.U[size_t(n)] = initial[size_t(n)];

  const int G = prop->gauss_per_step();
  std::vector<double> acc(size_t(N), 0.0);
  for (int j = 0; j < M; ++j) {
    std::fill(acc.begin(), acc.end(), 0.0);
    for (int g = 0; g < G; ++g) {
      double t = prop->tau(j, g);
      double w = prop->tau_weight(j, g);
      fill(f_kernel_modes, t, fbuf);
      fill(e_extra_modes, t, ebuf);
      double Rg = amplitude ? amplitude(t) : 0.0;
      for (int n = 0; n < N; ++n) {
        double src = Rg * fbuf[size_t(n)] + ebuf[size_t(n)];
        if (src != 0.0) acc[size_t(n)] += w * src * prop->E_tau_to_node(n + 1, j, g, j + 1);
      }
    }
    for (int n = 0; n < N; ++n)
      sol.U[size_t(j + 1) * N + n] =
          prop->E_nodes(n + 1, j, j + 1) * sol.U[size_t(j) * N + n] + acc[size_t(n)];
  }
  return sol;
}

double evaluate_field(const ModalSolution& sol, double xi, int j, FieldPart part) {
  if (!sol.prop) throw std::invalid_argument("evaluate_field: empty solution");
  const auto& basis = sol.prop->basis();
  const int N = basis.size();
  if (j < 0 || j > sol.grid().steps)
    throw std::invalid_argument("evaluate_field: node index out of range");
  if (!(xi >= 0.0 && xi <= 1.0))
    throw std::domain_error("evaluate_field: xi outside [0,1]");

  const double* row = sol.U.data() + size_t(j) * N;
  switch (part) {
    case FieldPart::Value: {
      if (xi == 1.0) return 0.0; // pinned end value
      double acc = 0.0;
      for (int n = 1; n <= N; ++n)
        acc += row[n - 1] * basis.eigenfunction(n, xi);
      return acc;
    }
    case FieldPart::Slope: {
      double acc = 0.0;
      for (int n = 1; n <= N; ++n)
        acc += row[n - 1] * basis.eigenfunction_deriv(n, xi);
      return acc;
    }
    default: {
      double a = sol.prop->a_node(j), b = sol.prop->b_node(j);
      double acc = 0.0;
      for (int n = 1; n <= N; ++n) {
        double rate = a * basis.eigenvalue(n) - b;
        double src = sol.R[size_t(j)] * sol.Fk[size_t(j) * N + n - 1] +
                     sol.Ee[size_t(j) * N + n - 1];
        acc += (-rate * row[n - 1] + src) * basis.eigenfunction(n, xi);
      }
      return acc;
    }
  }
}

TraceSample flux_trace(const ModalSolution& sol, int j) {
  if (!sol.prop) throw std::invalid_argument("flux_trace: empty solution");
  const auto& basis = sol.prop->basis();
  const int N = basis.size();
  const double* row = sol.U.data() + size_t(j) * N;
  double nu = 0.0;
  for (int n = 1; n <= N; ++n)
    nu += basis.endpoint_sign(n) * basis.mu(n) * row[n - 1];
  return {nu, std::numbers::sqrt2 * nu};
}

double trace_dt(const ModalSolution& sol, int j) {
  if (!sol.prop) throw std::invalid_argument("trace_dt: empty solution");
  const auto& basis = sol.prop->basis();
  const int N = basis.size();
  const double* row = sol.U.data() + size_t(j) * N;
  double a = sol.prop->a_node(j), b = sol.prop->b_node(j);
  double acc = 0.0;
  for (int n = 1; n <= N; ++n) {
    double rate = a * basis.eigenvalue(n) - b;
    double src = sol.R[size_t(j)] * sol.Fk[size_t(j) * N + n - 1] +
                 sol.Ee[size_t(j) * N + n - 1];
    acc += basis.endpoint_sign(n) * basis.mu(n) * (-rate * row[n - 1] + src);
  }
  return acc;
}

double FdSolution::sample(double xi, int j) const {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw std::domain_error("FdSolution::sample: xi outside [0,1]");
  double pos = xi * J;
  int i = std::min(int(pos), J - 1);
  double frac = pos - i;
  return at(i, j) * (1 - frac) + at(i + 1, j) * frac;
}

FdSolution fd_oracle(BasisKind kind, const FixedDomainCoefficients& coeffs,
                     const std::function<double(double)>& initial,
                     const Field& source, int J, TimeGrid grid) {
  if (J < 4) throw ValidationError("fd_oracle: need at least 4 intervals");
  FdSolution out;
  out.J = J;
  out.grid = grid;
  out.field.assign(size_t(grid.count()) * size_t(J + 1), 0.0);

  const double dxi = 1.0 / J;
  const double dt = grid.dt();

  for (int i = 0; i <= J; ++i)
    out.field[size_t(i)] = initial ? initial(i * dxi) : 0.0;
  if (kind == BasisKind::DirichletDirichlet) out.field[0] = initial ? initial(0.0) : 0.0;
  out.field[size_t(J)] = 0.0;

  std::vector<double> lo(size_t(J + 1)), di(size_t(J + 1)), hi(size_t(J + 1)),
      rhs(size_t(J + 1)), next(size_t(J + 1));

  for (int m = 0; m < grid.steps; ++m) {
    double tm = grid.node(m);
    double tmid = tm + 0.5 * dt;
    double a = coeffs.a(tmid);
    const double* cur = out.field.data() + size_t(m) * (J + 1);

    // interior operator rows at t_{m+1/2}
    for (int i = 1; i < J; ++i) {
      double xi = i * dxi;
      double b = coeffs.b_field(xi, tmid);
      double pe = std::abs(b) * dxi / a;
      out.max_cell_peclet = std::max(out.max_cell_peclet, pe);
      double alpha = a / (dxi * dxi);
      double l = alpha + std::max(-b, 0.0) / dxi;
      double h = alpha + std::max(b, 0.0) / dxi;
      double d = -2 * alpha - std::abs(b) / dxi;
      // (I - dt/2 Lop) U^{m+1} = (I + dt/2 Lop) U^m + dt src(t_mid)
      lo[size_t(i)] = -0.5 * dt * l;
      di[size_t(i)] = 1.0 - 0.5 * dt * d;
      hi[size_t(i)] = -0.5 * dt * h;
      rhs[size_t(i)] = cur[i] + 0.5 * dt * (l * cur[i - 1] + d * cur[i] + h * cur[i + 1]) +
                       dt * (source ? source(xi, tmid) : 0.0);
    }

    if (kind == BasisKind::DirichletDirichlet) {
      lo[0] = 0; di[0] = 1; hi[0] = 0; rhs[0] = 0.0;
    } else {
      // zero end slope via mirror ghost; transport vanishes at xi=0
      double alpha = a / (dxi * dxi);
      double d = -2 * alpha, h = 2 * alpha;
      lo[0] = 0;
      di[0] = 1.0 - 0.5 * dt * d;
      hi[0] = -0.5 * dt * h;
      rhs[0] = cur[0] + 0.5 * dt * (d * cur[0] + h * cur[1]) +
               dt * (source ? source(0.0, tmid) : 0.0);
    }
    lo[size_t(J)] = 0; di[size_t(J)] = 1; hi[size_t(J)] = 0; rhs[size_t(J)] = 0.0;

    // Thomas sweep
    for (int i = 1; i <= J; ++i) {
      double w = lo[size_t(i)] / di[size_t(i - 1)];
      di[size_t(i)] -= w * hi[size_t(i - 1)];
      rhs[size_t(i)] -= w * rhs[size_t(i - 1)];
    }
    next[size_t(J)] = rhs[size_t(J)] / di[size_t(J)];
    for (int i = J; i-- > 0;)
      next[size_t(i)] = (rhs[size_t(i)] - hi[size_t(i)] * next[size_t(i + 1)]) / di[size_t(i)];

    double* dst = out.field.data() + size_t(m + 1) * (J + 1);
    for (int i = 0; i <= J; ++i) dst[i] = next[size_t(i)];
  }

  if (out.max_cell_peclet > 2.0) {
    out.peclet_warning = true;
    log_warn("fd_oracle: cell Peclet number " +
             std::to_string(out.max_cell_peclet) +
             " > 2; transport under-resolved");
  }
  return out;
}

} // namespace stefan
