#include "stefan/flux.hpp"

#include <cmath>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

FluxResult recover_impl(const ModalSolution& sol,
                        const std::vector<double>& amp, std::string tag) {
  const auto& coeffs = sol.prop->coeffs();
  const auto& pc = coeffs.constants();
  const TimeGrid grid = sol.grid();

  FluxResult out;
  out.grid = grid;
  out.n_modes = sol.n_modes();
  out.provenance = std::move(tag);
  out.q.resize(size_t(grid.count()));
  out.u_xi.resize(size_t(grid.count()));

  double resid = 0.0;
  for (int j = 0; j < grid.count(); ++j) {
    auto e = coeffs.boundary().eval(grid.node(j));
    double uxi = flux_trace(sol, j).u_xi;
    out.u_xi[size_t(j)] = uxi;
    double slope = uxi / amp[size_t(j)];
    double q = (pc.k * slope + pc.L * e.c) / e.s;
    out.q[size_t(j)] = q;
    resid = std::max(resid, std::abs(pc.k * uxi -
                                     (q * e.s - pc.L * e.c) * amp[size_t(j)]));
  }
  out.trace_residual = resid;
  return out;
}

} // namespace

FluxResult recover_q_p2(const ModalSolution& sol) {
  if (!sol.prop) throw ValidationError("recover_q: empty solution");
  std::vector<double> ones(size_t(sol.grid().count()), 1.0);
  return recover_impl(sol, ones, "end flux from interface balance");
}

FluxResult recover_q_p4(const ModalSolution& sol,
                        const std::function<double(double)>& amplitude,
                        DenominatorPolicy den) {
  if (!sol.prop) throw ValidationError("recover_q: empty solution");
  if (!amplitude) throw ValidationError("recover_q: missing amplitude");
  const TimeGrid grid = sol.grid();
  std::vector<double> amp(size_t(grid.count()));
  double sup = 0.0;
  for (int j = 0; j < grid.count(); ++j) {
    amp[size_t(j)] = amplitude(grid.node(j));
    sup = std::max(sup, std::abs(amp[size_t(j)]));
  }
  double floor = std::max(den.rel * sup, den.abs);
  if (sup == 0.0)
    throw DenominatorTooSmall("amplitude", 0.0, floor, grid.node(0));
  for (int j = 0; j < grid.count(); ++j)
    if (!(std::abs(amp[size_t(j)]) >= floor))
      throw DenominatorTooSmall("amplitude", amp[size_t(j)], floor,
                                grid.node(j));
  return recover_impl(sol, amp, "end flux from interface balance (scaled field)");
}

} // namespace stefan
