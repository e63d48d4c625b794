#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stefan/basis.hpp"
#include "stefan/smooth_fn.hpp"

namespace stefan {

// The four recovery problems.  P1/P3 pin the value at the left end, P2/P4 pin
// the slope there; P3/P4 carry a reaction term folded into the amplitude.
enum class Variant { P1, P2, P3, P4 };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);
BasisKind basis_for(Variant v);

struct PhysicalConstants {
  double a2 = 1.0;     // diffusivity (squared coefficient)
  double k = 1.0;      // conductivity
  double L = 1.0;      // latent heat
  double u_star = 0.0; // fixed interface value
  double T = 1.0;      // time horizon
  void validate() const; // throws ValidationError
};

// Interface position s(t) > 0 on [0, horizon], twice differentiable.
class MovingBoundary {
public:
  struct Eval {
    double s;   // position
    double s1;  // first derivative
    double s2;  // second derivative
    double c;   // s1 * s
    double c1;  // s2 * s + s1 * s1
  };

  static MovingBoundary affine(double s0, double rate, double T);
  // c[0] + c[1] t + ...
  static MovingBoundary polynomial(std::vector<double> coeffs, double T);
  // Clamped cubic spline through (times, values); end slopes from one-sided
  // three-point differences.  Horizon = times.back().
  static MovingBoundary sampled(std::vector<double> times,
                                std::vector<double> values);

  Eval eval(double t) const;     // domain_error outside [0, horizon]
  double s(double t) const { return eval(t).s; }
  double horizon() const { return T_; }

  struct PositivityReport {
    double m_s = 0, M_s = 0;     // min/max of s
    double min_s1 = 0;           // min of s'
    bool positive = false;
    bool nondecreasing = false;
  };
  PositivityReport scan(int samples = 4096) const;
  void validate() const;         // throws ValidationError if min s <= 0
  std::string describe() const;

private:
  enum class Rep { Affine, Polynomial, Sampled };
  Rep rep_ = Rep::Affine;
  double T_ = 1.0;
  std::vector<double> coef_;                    // affine/polynomial
  std::vector<double> knots_, vals_, second_;   // sampled spline data
  std::string label_;
  Eval eval_poly(double t) const;
  Eval eval_spline(double t) const;
};

// Coefficients of the fixed-domain evolution after mapping (0,s(t)) to (0,1):
//   U_t = a(t) U_xixi + b(xi,t) U_xi + source,
// with the transport term reduced to its modal diagonal b_diag(t).
class FixedDomainCoefficients {
public:
  FixedDomainCoefficients(MovingBoundary boundary, PhysicalConstants consts,
                          const EigenBasis& basis);

  double a(double t) const;                  // a2 / s^2
  double b_field(double xi, double t) const; // xi s'/s
  double b_diag(double t) const;             // (s'/s) * <xi phi_n', phi_n>
  double c(double t) const;                  // s' s
  double c1(double t) const;                 // (s' s)'

  // <xi phi_n', phi_n> for mode n, dense quadrature.
  double transport_projection(int n) const;
  double transport_defect() const;           // max_n |I_n - I_1|

  const MovingBoundary& boundary() const { return boundary_; }
  const PhysicalConstants& constants() const { return consts_; }
  BasisKind kind() const { return kind_; }

private:
  MovingBoundary boundary_;
  PhysicalConstants consts_;
  BasisKind kind_;
  std::vector<double> transport_; // I_n per mode
};

// ---- transform chains -------------------------------------------------

using Field = std::function<double(double, double)>; // (first arg, t)

struct PhysicalData {
  std::optional<SmoothFn> phi;  // initial profile, argument x in [0, s(0)]
  Field f;                      // source f(x,t); empty means zero
  std::optional<SmoothFn> q;    // end flux q(t)
  std::optional<SmoothFn> R;    // amplitude R(t) (given or truth)
  std::optional<SmoothFn> P;    // reaction P(t)
};

struct FixedDomainData {
  std::function<double(double)> initial; // transformed initial profile of xi
  Field f_kernel;                        // source factor multiplying the amplitude
  Field e_extra;                         // known additive source channel (may be empty)
};

// Errors: ConfigError naming any missing required function.
FixedDomainData to_fixed_domain(Variant v, const PhysicalData& data,
                                const MovingBoundary& b,
                                const PhysicalConstants& consts);

struct FieldAux {
  std::function<double(double)> R; // required for P3/P4
  std::function<double(double)> q; // required for P2/P4
};

// Maps a fixed-domain field U(xi,t) back to u(x,t) on 0 <= x <= s(t).
Field from_fixed_domain(Variant v, Field U, const FieldAux& aux,
                        const MovingBoundary& b,
                        const PhysicalConstants& consts);

// Forward field map (testing aid): u(x,t) -> U(xi,t).
Field to_fixed_field(Variant v, Field u, const FieldAux& aux,
                     const MovingBoundary& b, const PhysicalConstants& consts);

} // namespace stefan
