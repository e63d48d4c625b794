#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stefan/forward.hpp"
#include "stefan/geometry.hpp"
#include "stefan/smooth_fn.hpp"

namespace stefan {

// Second-kind Volterra system R(t) = L(t) + int_0^t K(tau,t) R(tau) dtau
// discretized on a uniform grid; kernel stored lower-triangular packed.
// When the assembly also provides dL/dt and dK/dt (P3/P4 routes), the
// recovered amplitude can be differentiated without finite differences.
struct VolterraSystem {
  TimeGrid grid;
  std::vector<double> free_term;     // L at nodes
  std::vector<double> kernel;        // K(t_i, t_j), i <= j, packed j*(j+1)/2 + i
  std::vector<double> free_term_dt;  // dL/dt at nodes (empty if not assembled)
  std::vector<double> kernel_dt;     // dK/dt(t_i, t_j), same packing
  // Product-integration weights (same packing): W(i,j) multiplies R_i in
  // int_0^{t_j} K(tau,t_j) R(tau) dtau, built from panel-exact integrals of
  // the mode exponentials against a piecewise-linear smooth factor.  Modal
  // assemblies fill these; hand-built systems leave them empty and the solver
  // falls back to plain trapezoid weights on `kernel`.
  std::vector<double> quad_weights;
  std::vector<double> quad_weights_dt;  // same, for the kernel_dt integral
  double denominator_margin = 0.0;   // min |denominator| met during assembly
  double denominator_floor = 0.0;    // floor the margin was checked against
  double diag_tail_ratio = 0.0;      // last-mode share of the diagonal kernel sums
  std::string provenance;

  double K(int i, int j) const {
    return kernel[size_t(j) * (size_t(j) + 1) / 2 + size_t(i)];
  }
  double Kt(int i, int j) const {
    return kernel_dt[size_t(j) * (size_t(j) + 1) / 2 + size_t(i)];
  }
  double W(int i, int j) const {
    return quad_weights[size_t(j) * (size_t(j) + 1) / 2 + size_t(i)];
  }
  double Wt(int i, int j) const {
    return quad_weights_dt[size_t(j) * (size_t(j) + 1) / 2 + size_t(i)];
  }
  bool has_derivatives() const { return !free_term_dt.empty(); }
  bool has_product_weights() const { return !quad_weights.empty(); }
};

struct DenominatorPolicy {
  double rel = 1e-10; // floor = max(rel * sup|denominator|, abs)
  double abs = 0.0;
};

enum class VolterraMethod { ProductTrapezoid, Picard };

struct PicardOptions {
  int max_iter = 200;
  double tol = 1e-12;
};

struct RecoveryResult {
  TimeGrid grid;
  std::vector<double> values;
  double residual = 0.0;            // discrete second-kind residual, sup norm
  double denominator_margin = 0.0;
  std::string solver;
  std::string provenance;
  int iterations = 0;               // Picard sweeps (0 for the direct march)
};

// ---- trace-rate assemblies (value-pinned P1 / slope-pinned P2) ----------
//
// Differentiating the end-slope identity turns the modal representation into
// a Volterra equation for the amplitude.  nu_prime holds d(nu)/dt samples at
// the grid nodes: either the modeled rate (trace_rate_* below) or the rate
// measured from a forward run (measured_trace_rate).

std::vector<double> trace_rate_p1(const FixedDomainCoefficients& coeffs,
                                  TimeGrid grid);
std::vector<double> trace_rate_p2(const FixedDomainCoefficients& coeffs,
                                  const SmoothFn& q, TimeGrid grid);
std::vector<double> measured_trace_rate(const ModalSolution& sol);

// Modal additive channels for the two trace-rate variants.
ModalSourceFn extra_channel_p1(std::shared_ptr<const ModalPropagator> prop);
ModalSourceFn extra_channel_p2(std::shared_ptr<const ModalPropagator> prop,
                               SmoothFn q);

VolterraSystem assemble_p1(const std::vector<double>& initial_modes,
                           ModalSourceFn f_kernel_modes,
                           ModalSourceFn e_extra_modes,
                           std::shared_ptr<const ModalPropagator> prop,
                           const std::vector<double>& nu_prime,
                           DenominatorPolicy den = {});

// Builds the flux channel and (unless nu_prime is supplied) the modeled
// trace rate from q.
VolterraSystem assemble_p2_r(const std::vector<double>& initial_modes,
                             ModalSourceFn f_kernel_modes, const SmoothFn& q,
                             std::shared_ptr<const ModalPropagator> prop,
                             const std::vector<double>& nu_prime = {},
                             DenominatorPolicy den = {});

// ---- direct-trace assemblies (reaction routes P3 / P4) ------------------
//
// The end-slope identity itself is the equation; derivative tables for the
// free term and kernel are assembled alongside.

VolterraSystem assemble_p3(const std::vector<double>& initial_modes,
                           ModalSourceFn g_modes,
                           std::shared_ptr<const ModalPropagator> prop,
                           DenominatorPolicy den = {});

VolterraSystem assemble_p4_r(const std::vector<double>& initial_modes,
                             ModalSourceFn h_modes, const SmoothFn& q,
                             std::shared_ptr<const ModalPropagator> prop,
                             DenominatorPolicy den = {});

// ---- solving and post-processing ----------------------------------------

RecoveryResult solve_volterra(const VolterraSystem& sys, VolterraMethod method,
                              PicardOptions opts = {});

// dR/dt at the nodes via the assembled derivative tables:
//   R'(t) = L'(t) + K(t,t) R(t) + int_0^t dK/dt(tau,t) R(tau) dtau.
std::vector<double> differentiate_r(const VolterraSystem& sys,
                                    const RecoveryResult& amplitude);

// Reaction coefficient from the amplitude: P = -R'/R.
std::vector<double> recover_p(const RecoveryResult& amplitude,
                              const std::vector<double>& amplitude_dt,
                              DenominatorPolicy den = {});

} // namespace stefan
