#include "stefan/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stefan/errors.hpp"
#include "stefan/log.hpp"

namespace stefan {

namespace {
constexpr double kSqrt2 = std::numbers::sqrt2;
constexpr double kPi = std::numbers::pi;
} // namespace

std::string to_string(BasisKind k) {
  return k == BasisKind::DirichletDirichlet ? "value-value" : "slope-value";
}

EigenBasis::EigenBasis(BasisKind kind, int n_modes, int quad_points)
    : kind_(kind), n_(n_modes) {
  if (n_modes < 1) throw ValidationError("EigenBasis: need at least one mode");
  int q = quad_points > 0 ? quad_points : projection_points(n_modes);
  if (q < 2 * n_modes)
    log_warn("projection rule has " + std::to_string(q) + " points for " +
             std::to_string(n_modes) + " modes; expect aliasing");
  rule_ = composite_gauss(0.0, 1.0, q);
  phi_table_.resize(size_t(n_) * rule_.x.size());
  for (int n = 1; n <= n_; ++n)
    for (size_t i = 0; i < rule_.x.size(); ++i)
      phi_table_[size_t(n - 1) * rule_.x.size() + i] =
          eigenfunction(n, rule_.x[i]);
}

double EigenBasis::mu(int n) const {
  if (n < 1) throw std::invalid_argument("EigenBasis::mu: modes start at 1");
  if (kind_ == BasisKind::DirichletDirichlet) return double(n) * kPi;
  return (2.0 * double(n) - 1.0) * kPi / 2.0;
}

double EigenBasis::eigenvalue(int n) const {
  double m = mu(n);
  return m * m;
}

void EigenBasis::check_domain(double xi) const {
  if (!(xi >= 0.0 && xi <= 1.0))
    throw std::domain_error("EigenBasis: xi outside [0,1]");
}

double EigenBasis::eigenfunction(int n, double xi) const {
  check_domain(xi);
  double m = mu(n);
  if (kind_ == BasisKind::DirichletDirichlet) return kSqrt2 * std::sin(m * xi);
  return kSqrt2 * std::cos(m * xi);
}

double EigenBasis::eigenfunction_deriv(int n, double xi) const {
  check_domain(xi);
  double m = mu(n);
  if (kind_ == BasisKind::DirichletDirichlet)
    return kSqrt2 * m * std::cos(m * xi);
  return -kSqrt2 * m * std::sin(m * xi);
}

double EigenBasis::endpoint_sign(int n) const { return (n % 2 == 0) ? 1.0 : -1.0; }

double EigenBasis::endpoint_deriv(int n) const {
  return kSqrt2 * endpoint_sign(n) * mu(n);
}

std::vector<double> EigenBasis::project(
    const std::function<double(double)>& f) const {
  const size_t q = rule_.x.size();
  std::vector<double> fw(q);
  for (size_t i = 0; i < q; ++i) fw[i] = f(rule_.x[i]) * rule_.w[i];
  std::vector<double> out(size_t(n_), 0.0);
  for (int n = 0; n < n_; ++n) {
    const double* row = phi_table_.data() + size_t(n) * q;
    double acc = 0.0;
    for (size_t i = 0; i < q; ++i) acc += row[i] * fw[i];
    out[size_t(n)] = acc;
  }
  return out;
}

double EigenBasis::synthesize(const std::vector<double>& coeffs,
                              double xi) const {
  check_domain(xi);
  double acc = 0.0;
  int m = std::min<int>(n_, int(coeffs.size()));
  for (int n = 1; n <= m; ++n) acc += coeffs[size_t(n - 1)] * eigenfunction(n, xi);
  return acc;
}

double EigenBasis::synthesize_deriv(const std::vector<double>& coeffs,
                                    double xi) const {
  check_domain(xi);
  double acc = 0.0;
  int m = std::min<int>(n_, int(coeffs.size()));
  for (int n = 1; n <= m; ++n)
    acc += coeffs[size_t(n - 1)] * eigenfunction_deriv(n, xi);
  return acc;
}

double EigenBasis::trace_sum(const std::vector<double>& coeffs) const {
  double acc = 0.0;
  int m = std::min<int>(n_, int(coeffs.size()));
  for (int n = 1; n <= m; ++n)
    acc += endpoint_sign(n) * mu(n) * coeffs[size_t(n - 1)];
  return acc;
}

EigenBasis::WeightedSum EigenBasis::weighted_abs_sum(
    const std::vector<double>& coeffs, double power) const {
  WeightedSum ws;
  int m = std::min<int>(n_, int(coeffs.size()));
  ws.partials.reserve(size_t(m));
  for (int n = 1; n <= m; ++n) {
    double w = power == 0.0 ? 1.0 : std::pow(eigenvalue(n), power);
    ws.value += w * std::abs(coeffs[size_t(n - 1)]);
    ws.partials.push_back(ws.value);
  }
  return ws;
}

double EigenBasis::gram_defect() const {
  // ~16 nodes per wavelength of the highest pairwise frequency 2*mu_n/pi.
  int dense = std::max(1024, 32 * n_);
  CompositeRule r = composite_gauss(0.0, 1.0, dense);
  const size_t q = r.x.size();
  std::vector<double> tab(size_t(n_) * q);
  for (int n = 1; n <= n_; ++n)
    for (size_t i = 0; i < q; ++i)
      tab[size_t(n - 1) * q + i] = eigenfunction(n, r.x[i]);
  double defect = 0.0;
  for (int a = 0; a < n_; ++a)
    for (int b = a; b < n_; ++b) {
      double acc = 0.0;
      const double* ra = tab.data() + size_t(a) * q;
      const double* rb = tab.data() + size_t(b) * q;
      for (size_t i = 0; i < q; ++i) acc += ra[i] * rb[i] * r.w[i];
      double target = (a == b) ? 1.0 : 0.0;
      defect = std::max(defect, std::abs(acc - target));
    }
  return defect;
}

CompatibilityReport EigenBasis::check_compatibility(const SmoothFn& f,
                                                    int order,
                                                    double tol) const {
  if (order < 0 || order > SmoothFn::kMaxOrder)
    throw std::invalid_argument("check_compatibility: order must be 0..4");
  CompatibilityReport rep;
  rep.order_checked = order;
  double scale = std::max(1.0, f.sup_norm(0.0, 1.0));
  for (int j = 0; j <= order; ++j) {
    double lv = std::abs(f.deriv(0.0, j));
    double rv = std::abs(f.deriv(1.0, j));
    double floor = tol;
    if (j > 0 && !f.analytic(j)) {
      rep.analytic_all = false;
      // Divided-difference accuracy floors per order (see fd_step).
      static constexpr double fd_floor[5] = {0.0, 1e-7, 1e-6, 1e-4, 5e-2};
      floor = std::max(tol, fd_floor[j] * scale);
    }
    // Only the orders matching the end condition's reflection parity are
    // constrained: even orders at a value-pinned end, odd at a slope-pinned
    // end.  Unconstrained orders are recorded but never fail the check.
    bool left_applies = (kind_ == BasisKind::DirichletDirichlet) ? (j % 2 == 0)
                                                                 : (j % 2 == 1);
    bool right_applies = (j % 2 == 0);
    rep.orders.push_back(j);
    rep.left_values.push_back(lv);
    rep.right_values.push_back(rv);
    rep.tolerances.push_back(floor);
    if ((left_applies && lv > floor) || (right_applies && rv > floor)) {
      rep.pass = false;
      rep.failing_orders.push_back(j);
    }
  }
  return rep;
}

} // namespace stefan
