#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "stefan/basis.hpp"
#include "stefan/geometry.hpp"
#include "stefan/quadrature.hpp"

namespace stefan {

struct TimeGrid {
  double T = 1.0;
  int steps = 1;
  double dt() const { return T / steps; }
  double node(int j) const { return T * double(j) / double(steps); }
  int count() const { return steps + 1; }
  static TimeGrid uniform(double T, int steps);
};

// Per-mode exponential propagation weights for the diagonal evolution
//   U_n' + (a(t) lambda_n - b_diag(t)) U_n = source_n(t).
// Log-space: E_n(t0,t1) = exp(-lambda_n (A(t1)-A(t0)) + B(t1)-B(t0)) with
// A, B running integrals of a and b_diag kept at the grid nodes and at each
// step's Gauss abscissae.
class ModalPropagator {
public:
  ModalPropagator(std::shared_ptr<const FixedDomainCoefficients> coeffs,
                  std::shared_ptr<const EigenBasis> basis, TimeGrid grid);

  const TimeGrid& grid() const { return grid_; }
  const EigenBasis& basis() const { return *basis_; }
  const FixedDomainCoefficients& coeffs() const { return *coeffs_; }
  std::shared_ptr<const EigenBasis> basis_ptr() const { return basis_; }
  std::shared_ptr<const FixedDomainCoefficients> coeffs_ptr() const { return coeffs_; }

  int gauss_per_step() const { return kGaussPerStep; }
  double tau(int j, int g) const;        // Gauss abscissa g inside step j
  double tau_weight(int j, int g) const;

  double E_nodes(int n, int i, int j) const;            // node i -> node j
  double E_tau_to_node(int n, int j, int g, int to) const;
  // log of the one-step factor E_n(i, i+1), kept in log space so steeply
  // damped modes do not underflow before the caller can use the exponent.
  double log_step(int n, int i) const;

  double a_node(int j) const { return a_nodes_[size_t(j)]; }
  double b_node(int j) const { return b_nodes_[size_t(j)]; }

  static constexpr int kGaussPerStep = 4;

private:
  std::shared_ptr<const FixedDomainCoefficients> coeffs_;
  std::shared_ptr<const EigenBasis> basis_;
  TimeGrid grid_;
  CumulativeGauss A_, B_;
  std::vector<double> lambda_;
  std::vector<double> a_nodes_, b_nodes_;
};

using ModalSourceFn =
    std::function<void(double /*t*/, std::vector<double>& /*out, size N*/)>;

// Modal source adapters built from a field on (xi, t) via projection.
ModalSourceFn project_source(Field f, std::shared_ptr<const EigenBasis> basis);

struct ModalSolution {
  std::shared_ptr<const ModalPropagator> prop;
  std::vector<double> U;   // (steps+1) x N, node-major
  std::vector<double> R;   // amplitude samples at nodes
  std::vector<double> Fk;  // f-kernel modal samples at nodes
  std::vector<double> Ee;  // additive-channel modal samples at nodes

  int n_modes() const { return prop ? prop->basis().size() : 0; }
  const TimeGrid& grid() const { return prop->grid(); }
  double coeff(int j, int n) const { // mode n (1-based) at node j
    return U[size_t(j) * size_t(n_modes()) + size_t(n - 1)];
  }
};

// Advances the diagonal modal system with an exponential integrator.
// Source structure: amplitude(t) * f_kernel + e_extra; either ModalSourceFn
// may be empty (zero), and an empty amplitude means the kernel channel is off.
ModalSolution solve_modal(const std::vector<double>& initial,
                          ModalSourceFn f_kernel_modes,
                          ModalSourceFn e_extra_modes,
                          std::function<double(double)> amplitude,
                          std::shared_ptr<const ModalPropagator> prop);

enum class FieldPart { Value, Slope, TimeDeriv };

// Series evaluation at (xi, node j).  Value at xi=1 is identically zero by
// the end condition and is returned as exact 0 (no summation noise).
double evaluate_field(const ModalSolution& sol, double xi, int j,
                      FieldPart part = FieldPart::Value);

struct TraceSample {
  double nu;    // sum_n (-1)^n mu_n U_n(t)
  double u_xi;  // end slope sqrt(2) * nu
};
TraceSample flux_trace(const ModalSolution& sol, int j);

// d(nu)/dt evaluated through the modal equations (no finite differencing).
double trace_dt(const ModalSolution& sol, int j);

// ---- finite-difference cross-check --------------------------------------

struct FdSolution {
  int J = 0;               // space intervals
  TimeGrid grid;
  std::vector<double> field; // (steps+1) x (J+1), node-major
  double max_cell_peclet = 0.0;
  bool peclet_warning = false;

  double at(int i, int j) const { return field[size_t(j) * size_t(J + 1) + size_t(i)]; }
  double sample(double xi, int j) const; // linear interpolation in xi
};

// Crank-Nicolson with upwinded transport on the full fixed-domain equation
//   U_t = a(t) U_xixi + b(xi,t) U_xi + source(xi,t),
// left end per `kind`, right end pinned to zero.
FdSolution fd_oracle(BasisKind kind, const FixedDomainCoefficients& coeffs,
                     const std::function<double(double)>& initial,
                     const Field& source, int J, TimeGrid grid);

} // namespace stefan
