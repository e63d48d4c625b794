// Command-line front end: loads a JSON config, runs the requested experiment,
// and writes CSV artifacts plus report.json to the output directory.
#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <exception>
#include <string>

#include "stefan/config.hpp"
#include "stefan/emit.hpp"
#include "stefan/errors.hpp"
#include "stefan/harness.hpp"

namespace {

struct CliOptions {
  std::string config_path;
  std::string out_dir;
  int modes = 0;
  int steps = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* sub, CliOptions& opt) {
  sub->add_option("-c,--config", opt.config_path, "problem config (JSON)")
      ->required();
  sub->add_option("-o,--out", opt.out_dir, "output directory (overrides config)");
  sub->add_option("--modes", opt.modes, "override mode count");
  sub->add_option("--steps", opt.steps, "override time steps");
  sub->add_option("--seed", opt.seed, "override noise/trial seed")
      ->each([&opt](const std::string&) { opt.seed_set = true; });
}

stefan::ProblemConfig load_with_overrides(const CliOptions& opt) {
  stefan::ProblemConfig cfg = stefan::load_config(opt.config_path);
  if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
  if (opt.modes > 0) cfg.disc.modes = opt.modes;
  if (opt.steps > 0) cfg.disc.steps = opt.steps;
  if (opt.seed_set) cfg.noise.seed = opt.seed;
  return cfg;
}

int run_type(const CliOptions& opt, const char* type, const char* target) {
  stefan::ProblemConfig cfg = load_with_overrides(opt);
  cfg.experiment.type = type;
  if (target) cfg.experiment.target = target;
  stefan::ExperimentResult res = stefan::run_experiment(cfg);
  std::printf("%s\n", res.summary.c_str());
  for (const auto& [key, value] : res.metrics)
    std::printf("  %-22s %s\n", key.c_str(), stefan::format_double(value).c_str());
  std::printf("artifacts in %s:", cfg.out_dir.c_str());
  for (const auto& f : res.files) std::printf(" %s", f.c_str());
  std::printf("\n");
  return 0;
}

int run_validate(const CliOptions& opt) {
  stefan::ProblemConfig cfg = load_with_overrides(opt);
  stefan::ValidationReport rep = stefan::validate_assumptions(cfg);
  for (const auto& c : rep.clauses) {
    const char* verdict = !c.checked ? "SKIP" : c.pass ? "PASS" : "FAIL";
    std::printf("%-26s %-4s%s  measured=%s  %s\n", c.id.c_str(), verdict,
                c.required ? " (required)" : "",
                stefan::format_double(c.measured).c_str(), c.note.c_str());
  }
  std::printf("required checks: %s; advisory checks: %s\n",
              rep.required_ok ? "ok" : "FAILED",
              rep.all_ok ? "ok" : "violations noted above");
  return rep.required_ok ? 0 : int(stefan::ExitCode::ConfigError);
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-dependent unknowns of one-phase moving-interface "
               "diffusion problems: forward runs and recoveries"};
  app.require_subcommand(1);
  CliOptions opt;

  CLI::App* forward = app.add_subcommand("forward", "solve the forward problem");
  CLI::App* recover_r =
      app.add_subcommand("recover-r", "recover the source amplitude R(t)");
  CLI::App* recover_q =
      app.add_subcommand("recover-q", "recover the end flux q(t)");
  CLI::App* recover_p =
      app.add_subcommand("recover-p", "recover the reaction coefficient P(t)");
  CLI::App* validate =
      app.add_subcommand("validate", "check the data hypotheses and exit");
  CLI::App* convergence =
      app.add_subcommand("convergence", "grid-refinement study");
  CLI::App* stability =
      app.add_subcommand("stability", "randomized data-continuity trials");
  for (CLI::App* sub : {forward, recover_r, recover_q, recover_p, validate,
                        convergence, stability})
    add_common(sub, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (forward->parsed()) return run_type(opt, "forward-only", nullptr);
    if (recover_r->parsed()) return run_type(opt, "round-trip", "R");
    if (recover_q->parsed()) return run_type(opt, "round-trip", "q");
    if (recover_p->parsed()) return run_type(opt, "round-trip", "P");
    if (validate->parsed()) return run_validate(opt);
    if (convergence->parsed()) return run_type(opt, "convergence", nullptr);
    if (stability->parsed()) return run_type(opt, "stability", nullptr);
  } catch (const stefan::StefanError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return int(e.code);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return 1;
  }
  return 0;
}
