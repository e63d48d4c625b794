#pragma once

#include <functional>
#include <vector>

namespace stefan {

// Gauss-Legendre rule on [-1, 1]. Nodes ascending. Cached per point count.
struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const QuadRule& gauss_legendre(int points);

// Composite rule on [a, b]: equal panels of `panel_points` Gauss points each.
// `total_points` is rounded up to a whole number of panels.
struct CompositeRule {
  std::vector<double> x;
  std::vector<double> w;
};

CompositeRule composite_gauss(double a, double b, int total_points, int panel_points = 16);

double integrate(const std::function<double(double)>& f, double a, double b,
                 int total_points, int panel_points = 16);

// Default panel budget for spectral projections with n_modes active modes.
inline int projection_points(int n_modes) {
  int q = 4 * n_modes;
  return q < 64 ? 64 : q;
}

// Running integral of f over [0, T] on a uniform grid of `steps` steps,
// advanced step by step with a `per_step`-point Gauss rule.  Also keeps the
// running value at each step's own Gauss abscissae (nodes of the same rule),
// for exponential-integrator weights.  Node times are T*j/steps.
struct CumulativeGauss {
  int steps = 0;
  int per_step = 0;
  std::vector<double> at_nodes;  // steps+1 running values
  std::vector<double> tau;       // steps*per_step abscissae
  std::vector<double> tau_w;     // matching mapped weights
  std::vector<double> at_tau;    // running value at each abscissa
};

CumulativeGauss cumulative_gauss(const std::function<double(double)>& f,
                                 double T, int steps, int per_step = 4);

// Evaluates F(t) = int_0^t g anywhere in [0, T]: cumulative node table plus
// a one-panel Gauss tail over the partial step.
class Antiderivative {
public:
  Antiderivative() = default;
  Antiderivative(std::function<double(double)> g, double T, int steps);
  double operator()(double t) const;

private:
  std::function<double(double)> g_;
  double T_ = 1.0;
  int steps_ = 1;
  std::vector<double> nodes_;
};

}  // namespace stefan
