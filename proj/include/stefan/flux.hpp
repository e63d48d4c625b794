#pragma once

#include <functional>
#include <string>
#include <vector>

#include "stefan/forward.hpp"
#include "stefan/inverse.hpp"

namespace stefan {

struct FluxResult {
  TimeGrid grid;
  std::vector<double> q;     // recovered end flux at the nodes
  std::vector<double> u_xi;  // end-slope trace the formula consumed
  double trace_residual = 0; // max |k u_xi - (q s - L c)| (x amplitude)
  int n_modes = 0;
  std::string provenance;
};

// End flux from the interface balance: q = (k U_xi(1,t) + L c(t)) / s(t).
// The end slope comes from the closed-form mode slopes (flux_trace), not
// from a sampled series near the end point.
FluxResult recover_q_p2(const ModalSolution& sol);

// Reaction-folded version: the stored field is amplitude-scaled, so the
// slope is unscaled first: q = (k U_xi(1,t)/R(t) + L c(t)) / s(t).
// With R identically 1 this reproduces recover_q_p2 exactly (same operation
// sequence; division by 1.0 is exact).
FluxResult recover_q_p4(const ModalSolution& sol,
                        const std::function<double(double)>& amplitude,
                        DenominatorPolicy den = {});

} // namespace stefan
