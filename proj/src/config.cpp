#include "stefan/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stefan/errors.hpp"

namespace stefan {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& origin, const std::string& why) {
  throw ConfigError(origin + ": " + why);
}

double num(const json& j, const std::string& origin, const std::string& key,
           double fallback, bool required = false) {
  if (!j.contains(key)) {
    if (required) bad(origin, "missing required number '" + key + "'");
    return fallback;
  }
  if (!j[key].is_number()) bad(origin, "'" + key + "' must be a number");
  return j[key].get<double>();
}

int integer(const json& j, const std::string& origin, const std::string& key,
            int fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_integer()) bad(origin, "'" + key + "' must be an integer");
  return j[key].get<int>();
}

std::string text(const json& j, const std::string& origin,
                 const std::string& key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_string()) bad(origin, "'" + key + "' must be a string");
  return j[key].get<std::string>();
}

std::optional<Expr> expr_opt(const json& j, const std::string& origin,
                             const std::string& key,
                             std::vector<std::string> vars) {
  if (!j.contains(key)) return std::nullopt;
  if (!j[key].is_string()) bad(origin, "'" + key + "' must be an expression string");
  return Expr::parse(j[key].get<std::string>(), std::move(vars));
}

MovingBoundary parse_boundary(const json& j, const std::string& origin,
                              double T) {
  if (!j.is_object()) bad(origin, "'boundary' must be an object");
  std::string type = text(j, origin, "type", "");
  if (type == "affine") {
    double s0 = num(j, origin, "s0", 1.0, true);
    double rate = num(j, origin, "rate", 0.0);
    return MovingBoundary::affine(s0, rate, T);
  }
  if (type == "polynomial") {
    if (!j.contains("coeffs") || !j["coeffs"].is_array())
      bad(origin, "polynomial boundary needs a 'coeffs' array");
    std::vector<double> c;
    for (const auto& v : j["coeffs"]) {
      if (!v.is_number()) bad(origin, "boundary coeffs must be numbers");
      c.push_back(v.get<double>());
    }
    return MovingBoundary::polynomial(std::move(c), T);
  }
  if (type == "sampled") {
    if (!j.contains("times") || !j.contains("values"))
      bad(origin, "sampled boundary needs 'times' and 'values' arrays");
    std::vector<double> ts, vs;
    for (const auto& v : j["times"]) ts.push_back(v.get<double>());
    for (const auto& v : j["values"]) vs.push_back(v.get<double>());
    return MovingBoundary::sampled(std::move(ts), std::move(vs));
  }
  bad(origin, "boundary type must be affine | polynomial | sampled (got '" +
                  type + "')");
}

} // namespace

ProblemConfig parse_config(const std::string& json_text,
                           const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& ex) {
    throw ConfigError(origin + ": JSON parse failure: " + ex.what());
  }
  if (!j.is_object()) bad(origin, "top level must be an object");

  ProblemConfig cfg;
  cfg.source_path = origin;
  cfg.variant = variant_from_string(text(j, origin, "variant", "P1"));

  if (j.contains("constants")) {
    const auto& c = j["constants"];
    if (!c.is_object()) bad(origin, "'constants' must be an object");
    cfg.constants.a2 = num(c, origin, "a2", cfg.constants.a2);
    cfg.constants.k = num(c, origin, "k", cfg.constants.k);
    cfg.constants.L = num(c, origin, "L", cfg.constants.L);
    cfg.constants.u_star = num(c, origin, "u_star", cfg.constants.u_star);
    cfg.constants.T = num(c, origin, "T", cfg.constants.T);
  }
  cfg.constants.validate();

  if (!j.contains("boundary")) bad(origin, "missing 'boundary'");
  cfg.boundary = parse_boundary(j["boundary"], origin, cfg.constants.T);
  cfg.boundary.validate();

  if (j.contains("data")) {
    const auto& d = j["data"];
    if (!d.is_object()) bad(origin, "'data' must be an object");
    cfg.data.phi = expr_opt(d, origin, "phi", {"x"});
    cfg.data.f = expr_opt(d, origin, "f", {"x", "t"});
    cfg.data.q = expr_opt(d, origin, "q", {"t"});
    cfg.data.R = expr_opt(d, origin, "R", {"t"});
    cfg.data.P = expr_opt(d, origin, "P", {"t"});
    cfg.data.initial_fd = expr_opt(d, origin, "initial_fd", {"xi"});
    cfg.data.source_fd = expr_opt(d, origin, "source_fd", {"xi", "t"});
    cfg.data.extra_fd = expr_opt(d, origin, "extra_fd", {"xi", "t"});
  }

  if (j.contains("truth")) {
    const auto& t = j["truth"];
    if (!t.is_object()) bad(origin, "'truth' must be an object");
    cfg.truth.R = expr_opt(t, origin, "R", {"t"});
    cfg.truth.q = expr_opt(t, origin, "q", {"t"});
    cfg.truth.P = expr_opt(t, origin, "P", {"t"});
  }

  if (j.contains("discretization")) {
    const auto& d = j["discretization"];
    if (!d.is_object()) bad(origin, "'discretization' must be an object");
    cfg.disc.modes = integer(d, origin, "modes", cfg.disc.modes);
    cfg.disc.steps = integer(d, origin, "steps", cfg.disc.steps);
    cfg.disc.quadrature = integer(d, origin, "quadrature", cfg.disc.quadrature);
    if (d.contains("oracle")) {
      const auto& o = d["oracle"];
      if (!o.is_object()) bad(origin, "'oracle' must be an object");
      cfg.disc.oracle_J = integer(o, origin, "J", 200);
      cfg.disc.oracle_M = integer(o, origin, "M", 400);
    }
    if (cfg.disc.modes < 1) bad(origin, "modes must be >= 1");
    if (cfg.disc.steps < 1) bad(origin, "steps must be >= 1");
  }

  if (j.contains("noise")) {
    const auto& n = j["noise"];
    if (!n.is_object()) bad(origin, "'noise' must be an object");
    cfg.noise.amplitude = num(n, origin, "amplitude", 0.0);
    if (n.contains("seed")) {
      if (!n["seed"].is_number_unsigned() && !n["seed"].is_number_integer())
        bad(origin, "'seed' must be an integer");
      cfg.noise.seed = n["seed"].get<std::uint64_t>();
    }
    cfg.noise.target = text(n, origin, "target", "trace");
    if (cfg.noise.target != "trace" && cfg.noise.target != "initial" &&
        cfg.noise.target != "source")
      bad(origin, "noise target must be trace | initial | source");
  }

  if (j.contains("experiment")) {
    const auto& e = j["experiment"];
    if (!e.is_object()) bad(origin, "'experiment' must be an object");
    cfg.experiment.type = text(e, origin, "type", cfg.experiment.type);
    cfg.experiment.target = text(e, origin, "target", cfg.experiment.target);
    cfg.experiment.solver = text(e, origin, "solver", cfg.experiment.solver);
    if (cfg.experiment.solver != "march" && cfg.experiment.solver != "picard")
      bad(origin, "experiment solver must be march | picard");
    cfg.experiment.levels = integer(e, origin, "levels", cfg.experiment.levels);
    cfg.experiment.trials = integer(e, origin, "trials", cfg.experiment.trials);
    cfg.experiment.perturbation =
        num(e, origin, "perturbation", cfg.experiment.perturbation);
    cfg.experiment.instance = text(e, origin, "instance", "");
    const auto& ty = cfg.experiment.type;
    if (ty != "round-trip" && ty != "convergence" && ty != "stability" &&
        ty != "forward-only")
      bad(origin,
          "experiment type must be round-trip | convergence | stability | "
          "forward-only");
    const auto& tg = cfg.experiment.target;
    if (tg != "R" && tg != "q" && tg != "P")
      bad(origin, "experiment target must be R | q | P");
  }

  if (j.contains("output")) {
    const auto& o = j["output"];
    if (!o.is_object()) bad(origin, "'output' must be an object");
    cfg.out_dir = text(o, origin, "dir", cfg.out_dir);
  }

  return cfg;
}

ProblemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

} // namespace stefan
