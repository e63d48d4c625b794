#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "stefan/expression.hpp"
#include "stefan/geometry.hpp"

namespace stefan {

struct Discretization {
  int modes = 24;
  int steps = 400;
  int quadrature = 0;   // 0 -> projection default
  int oracle_J = 0;     // 0 -> no finite-difference cross-check
  int oracle_M = 0;
};

struct NoiseSpec {
  double amplitude = 0.0;
  std::uint64_t seed = 1;
  std::string target = "trace"; // trace | initial | source
};

struct ExperimentSpec {
  std::string type = "round-trip"; // round-trip | convergence | stability | forward-only
  std::string target = "R";       // R | q | P
  std::string solver = "march";   // march (product trapezoid) | picard
  int levels = 4;                  // convergence refinements
  int trials = 100;                // stability draws
  double perturbation = 1e-2;      // stability perturbation scale
  std::string instance;            // optional named analytic instance
};

struct DataSpec {
  std::optional<Expr> phi;        // x
  std::optional<Expr> f;          // (x, t)
  std::optional<Expr> q;          // t
  std::optional<Expr> R;          // t
  std::optional<Expr> P;          // t
  std::optional<Expr> initial_fd; // xi      (fixed-domain initial, bypasses transform)
  std::optional<Expr> source_fd;  // (xi, t) (fixed-domain kernel source)
  std::optional<Expr> extra_fd;   // (xi, t) (fixed-domain additive channel)
};

struct TruthSpec {
  std::optional<Expr> R; // t
  std::optional<Expr> q; // t
  std::optional<Expr> P; // t
};

struct ProblemConfig {
  Variant variant = Variant::P1;
  PhysicalConstants constants;
  MovingBoundary boundary = MovingBoundary::affine(1.0, 0.0, 1.0);
  DataSpec data;
  TruthSpec truth;
  Discretization disc;
  NoiseSpec noise;
  ExperimentSpec experiment;
  std::string out_dir = ".";
  std::string source_path; // where this config was loaded from
};

ProblemConfig load_config(const std::string& path); // IoError / ConfigError
ProblemConfig parse_config(const std::string& json_text,
                           const std::string& origin);

} // namespace stefan
