#pragma once

#include <functional>
#include <vector>

namespace stefan {

// Scalar function of one variable with derivatives up to order 4.
// Analytic derivatives are used when supplied; otherwise central differences
// with per-order step sizes (wider stencils need wider steps to stay above
// the roundoff floor).  Norm helpers sample a fixed uniform grid.
class SmoothFn {
public:
  using Fn = std::function<double(double)>;

  static constexpr int kMaxOrder = 4;
  // 1024 intervals -> includes both endpoints and the midpoint exactly.
  static constexpr int kGridSamples = 1025;

  SmoothFn();                                  // zero function
  explicit SmoothFn(double constant);
  explicit SmoothFn(Fn f);
  SmoothFn(Fn f, std::vector<Fn> derivatives); // derivatives[k] = d^{k+1} f

  static SmoothFn constant(double v);
  // c[0] + c[1] x + c[2] x^2 + ...   (all derivatives analytic)
  static SmoothFn polynomial(std::vector<double> coeffs);

  double operator()(double x) const;
  // order 0 = value.  Throws std::invalid_argument for order outside [0,4].
  double deriv(double x, int order) const;
  bool analytic(int order) const;              // true for order 0 always

  double sup_norm(double lo, double hi) const;
  // max over derivative orders 0..order of the sup norm on [lo,hi]
  double c_norm(int order, double lo, double hi) const;

  // Step used by the divided-difference fallback at a given order (exposed so
  // reports can state the accuracy floor that goes with it).
  static double fd_step(int order);

private:
  Fn f_;
  std::vector<Fn> d_;                          // may be shorter than kMaxOrder
  double fd_deriv(double x, int order) const;
};

} // namespace stefan
