#include "stefan/geometry.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "stefan/errors.hpp"
#include "stefan/quadrature.hpp"

namespace stefan {

std::string to_string(Variant v) {
  switch (v) {
    case Variant::P1: return "P1";
    case Variant::P2: return "P2";
    case Variant::P3: return "P3";
    default: return "P4";
  }
}

Variant variant_from_string(const std::string& s) {
  if (s == "P1" || s == "p1") return Variant::P1;
  if (s == "P2" || s == "p2") return Variant::P2;
  if (s == "P3" || s == "p3") return Variant::P3;
  if (s == "P4" || s == "p4") return Variant::P4;
  throw ConfigError("unknown variant '" + s + "' (expected P1..P4)");
}

BasisKind basis_for(Variant v) {
  return (v == Variant::P1 || v == Variant::P3)
             ? BasisKind::DirichletDirichlet
             : BasisKind::NeumannDirichlet;
}

void PhysicalConstants::validate() const {
  if (!(a2 > 0)) throw ValidationError("constants: a2 must be positive");
  if (!(k > 0)) throw ValidationError("constants: k must be positive");
  if (!(L > 0)) throw ValidationError("constants: L must be positive");
  if (!(T > 0)) throw ValidationError("constants: T must be positive");
}

// ---- MovingBoundary ----------------------------------------------------

MovingBoundary MovingBoundary::affine(double s0, double rate, double T) {
  MovingBoundary b;
  b.rep_ = Rep::Affine;
  b.T_ = T;
  b.coef_ = {s0, rate};
  std::ostringstream os;
  os << "affine(s0=" << s0 << ",rate=" << rate << ")";
  b.label_ = os.str();
  return b;
}

MovingBoundary MovingBoundary::polynomial(std::vector<double> coeffs, double T) {
  if (coeffs.empty()) throw ConfigError("boundary: empty coefficient list");
  MovingBoundary b;
  b.rep_ = Rep::Polynomial;
  b.T_ = T;
  b.coef_ = std::move(coeffs);
  b.label_ = "polynomial(degree=" + std::to_string(b.coef_.size() - 1) + ")";
  return b;
}

MovingBoundary MovingBoundary::sampled(std::vector<double> times,
                                       std::vector<double> values) {
  if (times.size() != values.size())
    throw ConfigError("boundary: times/values length mismatch");
  if (times.size() < 3)
    throw ConfigError("boundary: sampled form needs at least 3 knots");
  for (size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1]))
      throw ConfigError("boundary: times must be strictly increasing");
  if (times.front() != 0.0)
    throw ConfigError("boundary: first sample time must be 0");

  MovingBoundary b;
  b.rep_ = Rep::Sampled;
  b.T_ = times.back();
  b.knots_ = std::move(times);
  b.vals_ = std::move(values);

  const auto& t = b.knots_;
  const auto& y = b.vals_;
  const size_t n = t.size() - 1; // number of intervals

  // Three-point end slope: derivative at t0 of the parabola through the three
  // samples.  The divided-difference form is valid for descending nodes too,
  // so the right end reuses it with the order reversed.
  auto slope3 = [](double t0, double t1, double t2, double y0, double y1,
                   double y2) {
    double h0 = t1 - t0, h1 = t2 - t1;
    return -(2 * h0 + h1) / (h0 * (h0 + h1)) * y0 +
           (h0 + h1) / (h0 * h1) * y1 - h0 / (h1 * (h0 + h1)) * y2;
  };
  double d0 = slope3(t[0], t[1], t[2], y[0], y[1], y[2]);
  double dn = slope3(t[n], t[n - 1], t[n - 2], y[n], y[n - 1], y[n - 2]);

  // Clamped spline: solve the tridiagonal system for second derivatives M_i.
  std::vector<double> a(n + 1), diag(n + 1), cup(n + 1), rhs(n + 1);
  diag[0] = 2 * (t[1] - t[0]);
  cup[0] = t[1] - t[0];
  rhs[0] = 6 * ((y[1] - y[0]) / (t[1] - t[0]) - d0);
  for (size_t i = 1; i < n; ++i) {
    double hl = t[i] - t[i - 1], hr = t[i + 1] - t[i];
    a[i] = hl;
    diag[i] = 2 * (hl + hr);
    cup[i] = hr;
    rhs[i] = 6 * ((y[i + 1] - y[i]) / hr - (y[i] - y[i - 1]) / hl);
  }
  a[n] = t[n] - t[n - 1];
  diag[n] = 2 * (t[n] - t[n - 1]);
  rhs[n] = 6 * (dn - (y[n] - y[n - 1]) / (t[n] - t[n - 1]));

  for (size_t i = 1; i <= n; ++i) { // Thomas sweep
    double m = a[i] / diag[i - 1];
    diag[i] -= m * cup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  b.second_.resize(n + 1);
  b.second_[n] = rhs[n] / diag[n];
  for (size_t i = n; i-- > 0;)
    b.second_[i] = (rhs[i] - cup[i] * b.second_[i + 1]) / diag[i];

  b.label_ = "sampled(knots=" + std::to_string(b.knots_.size()) + ")";
  return b;
}

MovingBoundary::Eval MovingBoundary::eval_poly(double t) const {
  double v = 0, d1 = 0, d2 = 0;
  for (size_t i = coef_.size(); i-- > 0;) {
    d2 = d2 * t + 2 * d1;
    d1 = d1 * t + v;
    v = v * t + coef_[i];
  }
  // Horner pass above accumulates v = p(t), d1 = p'(t), d2 = p''(t).
  Eval e;
  e.s = v;
  e.s1 = d1;
  e.s2 = d2;
  e.c = d1 * v;
  e.c1 = d2 * v + d1 * d1;
  return e;
}

MovingBoundary::Eval MovingBoundary::eval_spline(double t) const {
  size_t lo = 0, hi = knots_.size() - 1;
  while (hi - lo > 1) {
    size_t mid = (lo + hi) / 2;
    if (knots_[mid] <= t) lo = mid; else hi = mid;
  }
  double h = knots_[lo + 1] - knots_[lo];
  double A = (knots_[lo + 1] - t) / h, B = (t - knots_[lo]) / h;
  double Ml = second_[lo], Mr = second_[lo + 1];
  Eval e;
  e.s = A * vals_[lo] + B * vals_[lo + 1] +
        ((A * A * A - A) * Ml + (B * B * B - B) * Mr) * h * h / 6.0;
  e.s1 = (vals_[lo + 1] - vals_[lo]) / h -
         (3 * A * A - 1) / 6.0 * h * Ml + (3 * B * B - 1) / 6.0 * h * Mr;
  e.s2 = A * Ml + B * Mr;
  e.c = e.s1 * e.s;
  e.c1 = e.s2 * e.s + e.s1 * e.s1;
  return e;
}

MovingBoundary::Eval MovingBoundary::eval(double t) const {
  if (!(t >= 0.0 && t <= T_ * (1 + 1e-12) + 1e-300))
    throw std::domain_error("boundary: t outside [0," + std::to_string(T_) + "]");
  if (rep_ == Rep::Sampled) return eval_spline(std::min(t, T_));
  return eval_poly(t);
}

MovingBoundary::PositivityReport MovingBoundary::scan(int samples) const {
  PositivityReport r;
  r.m_s = 1e300;
  r.M_s = -1e300;
  r.min_s1 = 1e300;
  for (int i = 0; i < samples; ++i) {
    double t = T_ * double(i) / double(samples - 1);
    Eval e = eval(t);
    r.m_s = std::min(r.m_s, e.s);
    r.M_s = std::max(r.M_s, e.s);
    r.min_s1 = std::min(r.min_s1, e.s1);
  }
  r.positive = r.m_s > 0;
  r.nondecreasing = r.min_s1 >= -1e-12;
  return r;
}

void MovingBoundary::validate() const {
  auto r = scan();
  if (!r.positive)
    throw ValidationError("boundary: interface position must stay positive (min " +
                          std::to_string(r.m_s) + ")");
}

std::string MovingBoundary::describe() const { return label_; }

// ---- FixedDomainCoefficients -------------------------------------------

FixedDomainCoefficients::FixedDomainCoefficients(MovingBoundary boundary,
                                                 PhysicalConstants consts,
                                                 const EigenBasis& basis)
    : boundary_(std::move(boundary)), consts_(consts), kind_(basis.kind()) {
  consts_.validate();
  boundary_.validate();
  // <xi phi_n', phi_n> oscillates at twice the mode frequency; use a rule
  // dense enough for the top mode.
  int dense = std::max(256, 32 * basis.size());
  CompositeRule r = composite_gauss(0.0, 1.0, dense);
  transport_.resize(size_t(basis.size()));
  for (int n = 1; n <= basis.size(); ++n) {
    double acc = 0.0;
    for (size_t i = 0; i < r.x.size(); ++i)
      acc += r.x[i] * basis.eigenfunction_deriv(n, r.x[i]) *
             basis.eigenfunction(n, r.x[i]) * r.w[i];
    transport_[size_t(n - 1)] = acc;
  }
}

double FixedDomainCoefficients::a(double t) const {
  auto e = boundary_.eval(t);
  return consts_.a2 / (e.s * e.s);
}

double FixedDomainCoefficients::b_field(double xi, double t) const {
  auto e = boundary_.eval(t);
  return xi * e.s1 / e.s;
}

double FixedDomainCoefficients::b_diag(double t) const {
  auto e = boundary_.eval(t);
  return (e.s1 / e.s) * transport_[0];
}

double FixedDomainCoefficients::c(double t) const { return boundary_.eval(t).c; }
double FixedDomainCoefficients::c1(double t) const { return boundary_.eval(t).c1; }

double FixedDomainCoefficients::transport_projection(int n) const {
  if (n < 1 || n > int(transport_.size()))
    throw std::invalid_argument("transport_projection: mode out of range");
  return transport_[size_t(n - 1)];
}

double FixedDomainCoefficients::transport_defect() const {
  double d = 0.0;
  for (double v : transport_) d = std::max(d, std::abs(v - transport_[0]));
  return d;
}

// ---- transform chains ---------------------------------------------------

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("transform: missing required function: " + what);
}

} // namespace

FixedDomainData to_fixed_domain(Variant v, const PhysicalData& data,
                                const MovingBoundary& b,
                                const PhysicalConstants& consts) {
  FixedDomainData out;
  const double s0 = b.eval(0.0).s;
  const double us = consts.u_star;
  const double k = consts.k;

  require(bool(data.phi), "phi");
  const SmoothFn phi = *data.phi;
  Field f = data.f;
  require(bool(f), "f");

  switch (v) {
    case Variant::P1: {
      out.initial = [phi, s0, us](double xi) { return phi(s0 * xi) - us * xi; };
      out.f_kernel = [f, b](double xi, double t) {
        return f(xi * b.eval(t).s, t);
      };
      out.e_extra = [b, us](double xi, double t) {
        auto e = b.eval(t);
        return us * xi * e.s1 / e.s;
      };
      return out;
    }
    case Variant::P2: {
      require(bool(data.q), "q");
      const SmoothFn q = *data.q;
      const double q0 = q(0.0);
      out.initial = [phi, s0, us, q0, k](double xi) {
        return phi(s0 * xi) - us + (q0 / k) * (s0 * xi - s0);
      };
      out.f_kernel = [f, b](double xi, double t) {
        return f(xi * b.eval(t).s, t);
      };
      out.e_extra = [b, q, k](double xi, double t) {
        auto e = b.eval(t);
        return (q.deriv(t, 1) / k) * e.s * (xi - 1.0) - (q(t) / k) * e.s1;
      };
      return out;
    }
    case Variant::P3: {
      out.initial = [phi, s0, us](double xi) { return phi(s0 * xi) - us * xi; };
      if (us == 0.0) {
        out.f_kernel = [f, b](double xi, double t) {
          return f(xi * b.eval(t).s, t);
        };
      } else {
        require(bool(data.R), "R (amplitude; required when u_star != 0)");
        const SmoothFn R = *data.R;
        out.f_kernel = [f, b, R, us](double xi, double t) {
          auto e = b.eval(t);
          double Rt = R(t);
          if (std::abs(Rt) < 1e-14)
            throw NumericalError("transform: amplitude vanishes at t=" +
                                 std::to_string(t));
          double logdR = R.deriv(t, 1) / Rt;
          return f(xi * e.s, t) - us * xi * (logdR - e.s1 / e.s);
        };
      }
      return out;
    }
    default: { // P4
      require(bool(data.q), "q");
      require(bool(data.R), "R (amplitude; the transformed source depends on it)");
      const SmoothFn q = *data.q;
      const SmoothFn R = *data.R;
      const double q0 = q(0.0);
      out.initial = [phi, s0, us, q0, k](double xi) {
        return phi(s0 * xi) - us + (q0 / k) * (s0 * xi - s0);
      };
      out.f_kernel = [f, b, q, R, us, k](double xi, double t) {
        auto e = b.eval(t);
        double Rt = R(t);
        if (std::abs(Rt) < 1e-14)
          throw NumericalError("transform: amplitude vanishes at t=" +
                               std::to_string(t));
        double logdR = R.deriv(t, 1) / Rt;
        double qt = q(t), qp = q.deriv(t, 1);
        return f(xi * e.s, t) - us * logdR +
               (qp / k + qt * logdR / k) * e.s * (xi - 1.0) - qt * e.s1 / k;
      };
      return out;
    }
  }
}

Field from_fixed_domain(Variant v, Field U, const FieldAux& aux,
                        const MovingBoundary& b,
                        const PhysicalConstants& consts) {
  if (!U) throw ConfigError("from_fixed_domain: missing field");
  const double us = consts.u_star;
  const double k = consts.k;
  const bool needs_R = (v == Variant::P3 || v == Variant::P4);
  const bool needs_q = (v == Variant::P2 || v == Variant::P4);
  if (needs_R && !aux.R)
    throw ConfigError("from_fixed_domain: missing amplitude R");
  if (needs_q && !aux.q)
    throw ConfigError("from_fixed_domain: missing flux q");
  auto R = aux.R;
  auto q = aux.q;

  return [v, U, R, q, b, us, k](double x, double t) {
    auto e = b.eval(t);
    if (!(x >= 0.0 && x <= e.s * (1 + 1e-12)))
      throw std::domain_error("from_fixed_domain: x outside [0,s(t)]");
    double xi = std::min(x / e.s, 1.0);
    double base = U(xi, t);
    if (v == Variant::P3 || v == Variant::P4) {
      double Rt = R(t);
      if (std::abs(Rt) < 1e-14)
        throw NumericalError("from_fixed_domain: amplitude vanishes at t=" +
                             std::to_string(t));
      base /= Rt;
    }
    switch (v) {
      case Variant::P1:
      case Variant::P3: return base + us * x / e.s;
      default: return base + us - (q(t) / k) * (x - e.s);
    }
  };
}

Field to_fixed_field(Variant v, Field u, const FieldAux& aux,
                     const MovingBoundary& b, const PhysicalConstants& consts) {
  if (!u) throw ConfigError("to_fixed_field: missing field");
  const double us = consts.u_star;
  const double k = consts.k;
  const bool needs_R = (v == Variant::P3 || v == Variant::P4);
  const bool needs_q = (v == Variant::P2 || v == Variant::P4);
  if (needs_R && !aux.R) throw ConfigError("to_fixed_field: missing amplitude R");
  if (needs_q && !aux.q) throw ConfigError("to_fixed_field: missing flux q");
  auto R = aux.R;
  auto q = aux.q;

  return [v, u, R, q, b, us, k](double xi, double t) {
    auto e = b.eval(t);
    double x = xi * e.s;
    double val;
    switch (v) {
      case Variant::P1:
      case Variant::P3: val = u(x, t) - us * xi; break;
      default: val = u(x, t) - us + (q(t) / k) * (x - e.s); break;
    }
    if (v == Variant::P3 || v == Variant::P4) val *= R(t);
    return val;
  };
}

} // namespace stefan
