#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "stefan/config.hpp"
#include "stefan/flux.hpp"
#include "stefan/forward.hpp"
#include "stefan/inverse.hpp"

namespace stefan {

// Deterministic 64-bit linear congruential generator.
//   x <- 6364136223846793005 * x + 1442695040888963407  (mod 2^64)
// Uniform draws take the top 53 bits, so every platform with IEEE doubles
// produces identical streams for a given seed.
struct Lcg {
  std::uint64_t state;
  explicit Lcg(std::uint64_t seed = 1) : state(seed) {}
  std::uint64_t next_u64() {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    return state;
  }
  double next_unit() { return double(next_u64() >> 11) * 0x1.0p-53; } // [0,1)
  double next_symmetric(double amp) { return amp * (2.0 * next_unit() - 1.0); }
  double next_in(double lo, double hi) { return lo + (hi - lo) * next_unit(); }
};

// ---- shared discretization bundle ----------------------------------------

struct Setup {
  std::shared_ptr<const EigenBasis> basis;
  std::shared_ptr<const FixedDomainCoefficients> coeffs;
  std::shared_ptr<const ModalPropagator> prop;
};

Setup make_setup(Variant v, const MovingBoundary& boundary,
                 const PhysicalConstants& consts, int modes, int steps,
                 int quadrature = 0);
Setup make_setup(const ProblemConfig& cfg);

// Eigenfunction combination sum_n coefs[n-1] * phi_n(xi) as a SmoothFn with
// analytic derivatives through fourth order (used by the trial generators,
// where exact high-order norms matter).
SmoothFn eigen_combo(BasisKind kind, const std::vector<double>& coefs);

// ---- data-hypothesis validation -------------------------------------------

struct ValidationClause {
  std::string id;
  bool required = false;  // required clauses abort manufacture when violated
  bool checked = true;    // false when the config lacks the data to evaluate
  bool pass = true;
  double measured = 0.0;
  double threshold = 0.0;
  std::string note;
};

struct ValidationReport {
  std::vector<ValidationClause> clauses;
  bool required_ok = true;
  bool all_ok = true;
  const ValidationClause* find(const std::string& id) const;
};

// Checks the solvability hypotheses that are testable from the config data:
// positive constants and boundary, endpoint compatibility of the transformed
// initial profile, modal sign patterns, flux positivity.  Violations of the
// structural hypotheses are reported as advisory (recoveries often still
// converge); positivity of the geometry and of divisors is required.
ValidationReport validate_assumptions(const ProblemConfig& cfg);

// ---- manufactured instances ------------------------------------------------

// A forward problem with known target, ready to feed the recovery routines.
struct Manufactured {
  Setup setup;
  ModalSolution sol;                  // forward solution carrying the truth
  std::vector<double> initial_modes;
  ModalSourceFn f_modes;              // amplitude-weighted kernel channel
  ModalSourceFn e_modes;              // additive channel
  std::vector<double> nu_prime;       // measured trace rate (amplitude targets)
  std::vector<double> truth;          // target samples at the grid nodes
  std::vector<double> truth_r;        // amplitude samples when target != R
  SmoothFn q;                         // flux data, when the variant uses one
  bool has_q = false;
  SmoothFn amplitude;                 // known amplitude (reaction/flux routes)
  bool has_amplitude = false;
  std::string notes;
};

// Amplitude targets: run the forward problem with the known amplitude and
// measure the trace rate it induces.  extra_override replaces the variant's
// built-in additive channel (value-pinned family only).
Manufactured manufacture_amplitude(const Setup& setup, const SmoothFn& R_true,
                                   const std::function<double(double)>& initial_fd,
                                   const Field& f_kernel,
                                   std::optional<SmoothFn> q = {},
                                   const Field& extra_override = {});

// Flux / reaction targets: a two-mode profile B is steered along an exact
// trace history theta(t) chosen so the recovery target equals the requested
// truth; the modal sources that realize theta are computed in closed form.
Manufactured manufacture_flux_p2(const Setup& setup, const SmoothFn& q_true);
Manufactured manufacture_flux_p4(const Setup& setup, const SmoothFn& q_true,
                                 const SmoothFn& R_true);
Manufactured manufacture_reaction_p3(const Setup& setup, const SmoothFn& P_true,
                                     const SmoothFn& R_true);
Manufactured manufacture_reaction_p4(const Setup& setup, const SmoothFn& P_true,
                                     const SmoothFn& R_true, const SmoothFn& q);

// Config-driven dispatch (builds truths from the config expressions; for
// reaction targets R is reconstructed from P by quadrature when absent).
Manufactured manufacture(const ProblemConfig& cfg);

// Amplitude induced by a reaction history: R(t) = exp(-int_0^t P), with an
// analytic first derivative -P R.
SmoothFn amplitude_from_reaction(const SmoothFn& P, double T, int steps = 512);

// ---- randomized trial batteries -------------------------------------------

struct ComparisonOutcome {
  int trials = 0;
  int passed = 0;
  double worst_margin = 0.0;  // most negative slack seen (>= -tol on pass)
  std::vector<std::string> failures;
};

// Randomized comparison-principle trials: nonnegative source, sign-free
// initial data, the field must stay above the floor assembled from the
// initial minimum, the end-slope history, and zero (and below the mirrored
// ceiling for the negated data).
ComparisonOutcome run_comparison_trials(int trials, std::uint64_t seed);

struct StabilityTrial {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
};

struct StabilityOutcome {
  std::vector<StabilityTrial> trials;
  int passed = 0;
  double worst_ratio = 0.0;  // max lhs/rhs across trials
};

// Randomized data-continuity trials: perturb initial profile, source, and
// (slope-pinned family) amplitude; the forward-solution difference must stay
// under the a-priori envelope assembled from the perturbation norms.
StabilityOutcome run_stability_trials(BasisKind kind, int trials,
                                      double perturbation, std::uint64_t seed);

// ---- experiment driver -----------------------------------------------------

struct ExperimentResult {
  std::string type;
  std::vector<std::string> files;            // artifacts written under out_dir
  std::map<std::string, double> metrics;
  std::map<std::string, std::string> annotations; // free-text report notes
  ValidationReport validation;
  bool ok = true;
  std::string summary;                       // one-line outcome
};

// Runs the configured experiment and writes its artifacts (CSV tables plus
// report.json) under cfg.out_dir.  Throws StefanError subclasses on invalid
// configs or numerical failure.
ExperimentResult run_experiment(const ProblemConfig& cfg);

} // namespace stefan
