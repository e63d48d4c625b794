#include "stefan/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace stefan {

namespace {

// Legendre P_n(x) and derivative by the three-term recurrence.
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  double dp = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

QuadRule build_rule(int n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      auto [p, dp] = legendre(n, x);
      double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    auto [p, dp] = legendre(n, x);
    (void)p;
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  for (int i = 0, j = n - 1; i < j; ++i, --j) { // recurrence seeds descend
    std::swap(rule.nodes[i], rule.nodes[j]);
    std::swap(rule.weights[i], rule.weights[j]);
  }
  return rule;
}

}  // namespace

const QuadRule& gauss_legendre(int points) {
  if (points < 1) throw std::invalid_argument("gauss_legendre: points must be >= 1");
  static std::map<int, QuadRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(points);
  if (it == cache.end()) it = cache.emplace(points, build_rule(points)).first;
  return it->second;
}

CompositeRule composite_gauss(double a, double b, int total_points, int panel_points) {
  if (panel_points < 1) throw std::invalid_argument("composite_gauss: bad panel size");
  int panels = (total_points + panel_points - 1) / panel_points;
  if (panels < 1) panels = 1;
  const QuadRule& base = gauss_legendre(panel_points);
  CompositeRule out;
  out.x.reserve(panels * panel_points);
  out.w.reserve(panels * panel_points);
  double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    double lo = a + p * h;
    double mid = lo + 0.5 * h;
    for (int i = 0; i < panel_points; ++i) {
      out.x.push_back(mid + 0.5 * h * base.nodes[i]);
      out.w.push_back(0.5 * h * base.weights[i]);
    }
  }
  return out;
}

double integrate(const std::function<double(double)>& f, double a, double b,
                 int total_points, int panel_points) {
  CompositeRule rule = composite_gauss(a, b, total_points, panel_points);
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.x.size(); ++i) acc += rule.w[i] * f(rule.x[i]);
  return acc;
}

CumulativeGauss cumulative_gauss(const std::function<double(double)>& f,
                                 double T, int steps, int per_step) {
  if (steps < 1) throw std::invalid_argument("cumulative_gauss: steps must be >= 1");
  if (per_step < 1) throw std::invalid_argument("cumulative_gauss: bad rule size");
  const QuadRule& base = gauss_legendre(per_step);
  CumulativeGauss out;
  out.steps = steps;
  out.per_step = per_step;
  out.at_nodes.assign(size_t(steps) + 1, 0.0);
  out.tau.resize(size_t(steps) * per_step);
  out.tau_w.resize(size_t(steps) * per_step);
  out.at_tau.resize(size_t(steps) * per_step);

  for (int j = 0; j < steps; ++j) {
    double lo = T * double(j) / double(steps);
    double hi = T * double(j + 1) / double(steps);
    double h = hi - lo, mid = lo + 0.5 * h;
    double step_sum = 0.0;
    for (int g = 0; g < per_step; ++g) {
      size_t idx = size_t(j) * per_step + g;
      double t = mid + 0.5 * h * base.nodes[g];
      double w = 0.5 * h * base.weights[g];
      out.tau[idx] = t;
      out.tau_w[idx] = w;
      // running value at t: node value plus Gauss over [lo, t]
      double part = 0.0, ph = t - lo, pm = lo + 0.5 * ph;
      for (int g2 = 0; g2 < per_step; ++g2)
        part += 0.5 * ph * base.weights[g2] * f(pm + 0.5 * ph * base.nodes[g2]);
      out.at_tau[idx] = out.at_nodes[size_t(j)] + part;
      step_sum += w * f(t);
    }
    out.at_nodes[size_t(j) + 1] = out.at_nodes[size_t(j)] + step_sum;
  }
  return out;
}

Antiderivative::Antiderivative(std::function<double(double)> g, double T, int steps)
    : g_(std::move(g)), T_(T), steps_(steps) {
  if (!g_) throw std::invalid_argument("Antiderivative: empty integrand");
  if (!(T > 0.0) || steps < 1) throw std::invalid_argument("Antiderivative: bad horizon");
  CumulativeGauss table = cumulative_gauss(g_, T, steps, 8);
  nodes_ = std::move(table.at_nodes);
}

double Antiderivative::operator()(double t) const {
  if (!(t >= -1e-12 * T_) || t > T_ * (1.0 + 1e-12))
    throw std::domain_error("Antiderivative: time outside [0, T]");
  double dt = T_ / double(steps_);
  int j = std::min(int(t / dt), steps_ - 1);
  if (j < 0) j = 0;
  double lo = dt * double(j);
  double h = t - lo;
  if (h <= 0.0) return nodes_[size_t(j)];
  const QuadRule& base = gauss_legendre(8);
  double mid = lo + 0.5 * h, part = 0.0;
  for (size_t g = 0; g < base.nodes.size(); ++g)
    part += 0.5 * h * base.weights[g] * g_(mid + 0.5 * h * base.nodes[g]);
  return nodes_[size_t(j)] + part;
}

}  // namespace stefan
