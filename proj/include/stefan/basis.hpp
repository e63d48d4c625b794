#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stefan/quadrature.hpp"
#include "stefan/smooth_fn.hpp"

namespace stefan {

// Which homogeneous condition holds at the left end of (0,1); the right end
// is always a zero value.  DirichletDirichlet: value pinned at both ends.
// NeumannDirichlet: slope pinned at the left, value at the right.
enum class BasisKind { DirichletDirichlet, NeumannDirichlet };

std::string to_string(BasisKind k);

struct CompatibilityReport {
  bool pass = true;
  int order_checked = 0;
  bool analytic_all = true;          // every checked order had a closed-form derivative
  std::vector<int> orders;           // 0..order_checked
  std::vector<double> left_values;   // |f^{(j)}(0)|
  std::vector<double> right_values;  // |f^{(j)}(1)|
  std::vector<double> tolerances;    // per-order floor actually applied
  std::vector<int> failing_orders;
};

// L2(0,1)-orthonormal eigenfunctions of -d^2/dxi^2 under the kind's end
// conditions, modes numbered from 1.
class EigenBasis {
public:
  // quad_points == 0 picks max(64, 4*n_modes) for projections.
  EigenBasis(BasisKind kind, int n_modes, int quad_points = 0);

  BasisKind kind() const { return kind_; }
  int size() const { return n_; }
  int quad_points() const { return int(rule_.x.size()); }

  // mu_n: pi*n (value/value) or pi*(2n-1)/2 (slope/value); lambda_n = mu_n^2.
  double mu(int n) const;
  double eigenvalue(int n) const;

  double eigenfunction(int n, double xi) const;        // sqrt(2) sin / cos
  double eigenfunction_deriv(int n, double xi) const;
  // phi_n'(1) evaluated in closed form: sqrt(2) * (-1)^n * mu_n for both kinds.
  double endpoint_deriv(int n) const;
  double endpoint_sign(int n) const;                   // (-1)^n

  // Coefficients of f against modes 1..size() by composite Gauss quadrature.
  std::vector<double> project(const std::function<double(double)>& f) const;

  double synthesize(const std::vector<double>& coeffs, double xi) const;
  double synthesize_deriv(const std::vector<double>& coeffs, double xi) const;

  // sum_n (-1)^n mu_n c_n  — the scaled end-slope of the expansion:
  // (d/dxi sum c_n phi_n)(1) = sqrt(2) * trace_sum(c).
  double trace_sum(const std::vector<double>& coeffs) const;

  struct WeightedSum {
    double value = 0;
    std::vector<double> partials;    // partial sums after each mode
  };
  // sum_n lambda_n^power |c_n| together with its partial-sum trajectory.
  WeightedSum weighted_abs_sum(const std::vector<double>& coeffs,
                               double power) const;

  // max_{i,j<=size()} |<phi_i,phi_j> - delta_ij| on a dense rule
  // (~16 points per wavelength regardless of the projection rule).
  double gram_defect() const;

  // Endpoint-vanishing check for derivative orders 0..order.  Only orders
  // matching the end condition's reflection parity are constrained (even at
  // a value-pinned end, odd at a slope-pinned end); the rest are recorded
  // but cannot fail.  With analytic derivatives the floor is tol;
  // divided-difference orders get a wider floor scaled to |f|.
  CompatibilityReport check_compatibility(const SmoothFn& f, int order,
                                          double tol = 1e-9) const;

private:
  BasisKind kind_;
  int n_;
  CompositeRule rule_;               // projection rule on [0,1]
  std::vector<double> phi_table_;    // phi_n at rule nodes, n-major
  void check_domain(double xi) const;
};

} // namespace stefan
