#include "stefan/smooth_fn.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace stefan {

SmoothFn::SmoothFn() : SmoothFn(0.0) {}

SmoothFn::SmoothFn(double constant) {
  f_ = [constant](double) { return constant; };
  d_.resize(kMaxOrder, [](double) { return 0.0; });
}

SmoothFn::SmoothFn(Fn f) : f_(std::move(f)) {
  if (!f_) throw std::invalid_argument("SmoothFn: null callable");
}

SmoothFn::SmoothFn(Fn f, std::vector<Fn> derivatives)
    : f_(std::move(f)), d_(std::move(derivatives)) {
  if (!f_) throw std::invalid_argument("SmoothFn: null callable");
  if (d_.size() > kMaxOrder)
    throw std::invalid_argument("SmoothFn: at most 4 derivative callables");
  for (const auto& g : d_)
    if (!g) throw std::invalid_argument("SmoothFn: null derivative callable");
}

SmoothFn SmoothFn::constant(double v) { return SmoothFn(v); }

SmoothFn SmoothFn::polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) coeffs.push_back(0.0);
  auto eval = [](const std::vector<double>& c, double x) {
    double acc = 0.0;
    for (size_t i = c.size(); i-- > 0;) acc = acc * x + c[i];
    return acc;
  };
  auto shift = [](std::vector<double> c) { // coefficients of the derivative
    if (c.size() <= 1) return std::vector<double>{0.0};
    std::vector<double> out(c.size() - 1);
    for (size_t i = 1; i < c.size(); ++i) out[i - 1] = c[i] * double(i);
    return out;
  };
  std::vector<Fn> ders;
  std::vector<double> cur = coeffs;
  for (int k = 0; k < kMaxOrder; ++k) {
    cur = shift(cur);
    ders.push_back([cur, eval](double x) { return eval(cur, x); });
  }
  return SmoothFn([coeffs, eval](double x) { return eval(coeffs, x); },
                  std::move(ders));
}

double SmoothFn::operator()(double x) const { return f_(x); }

bool SmoothFn::analytic(int order) const {
  if (order == 0) return true;
  return order >= 1 && order <= int(d_.size());
}

double SmoothFn::fd_step(int order) {
  switch (order) {
    case 1:
    case 2: return 1e-4;
    case 3: return 1e-3;
    default: return 1e-2;
  }
}

double SmoothFn::fd_deriv(double x, int order) const {
  const double h = fd_step(order);
  const auto& f = f_;
  switch (order) {
    case 1: return (f(x + h) - f(x - h)) / (2 * h);
    case 2: return (f(x + h) - 2 * f(x) + f(x - h)) / (h * h);
    case 3:
      return (f(x + 2 * h) - 2 * f(x + h) + 2 * f(x - h) - f(x - 2 * h)) /
             (2 * h * h * h);
    case 4:
      return (f(x + 2 * h) - 4 * f(x + h) + 6 * f(x) - 4 * f(x - h) +
              f(x - 2 * h)) /
             (h * h * h * h);
    default:
      throw std::invalid_argument("SmoothFn::deriv: order must be 0..4");
  }
}

double SmoothFn::deriv(double x, int order) const {
  if (order == 0) return f_(x);
  if (order < 0 || order > kMaxOrder)
    throw std::invalid_argument("SmoothFn::deriv: order must be 0..4");
  if (order <= int(d_.size())) return d_[order - 1](x);
  return fd_deriv(x, order);
}

double SmoothFn::sup_norm(double lo, double hi) const {
  double m = 0.0;
  for (int i = 0; i < kGridSamples; ++i) {
    double x = lo + (hi - lo) * double(i) / double(kGridSamples - 1);
    m = std::max(m, std::abs(f_(x)));
  }
  return m;
}

double SmoothFn::c_norm(int order, double lo, double hi) const {
  if (order < 0 || order > kMaxOrder)
    throw std::invalid_argument("SmoothFn::c_norm: order must be 0..4");
  double m = 0.0;
  for (int k = 0; k <= order; ++k) {
    for (int i = 0; i < kGridSamples; ++i) {
      double x = lo + (hi - lo) * double(i) / double(kGridSamples - 1);
      m = std::max(m, std::abs(deriv(x, k)));
    }
  }
  return m;
}

} // namespace stefan
