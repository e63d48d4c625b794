#pragma once

#include <stdexcept>
#include <string>

namespace stefan {

// Exit codes used by the CLI. Library exceptions map onto these.
enum class ExitCode : int {
  Ok = 0,
  ConfigError = 2,
  NumericalError = 3,
  IoError = 4,
};

struct StefanError : std::runtime_error {
  ExitCode code;
  StefanError(ExitCode c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

struct ConfigError : StefanError {
  explicit ConfigError(const std::string& msg) : StefanError(ExitCode::ConfigError, msg) {}
};

struct ValidationError : StefanError {
  explicit ValidationError(const std::string& msg) : StefanError(ExitCode::ConfigError, msg) {}
};

struct NumericalError : StefanError {
  explicit NumericalError(const std::string& msg) : StefanError(ExitCode::NumericalError, msg) {}
};

// Raised when a recovery denominator w(t) (or a modal weight) falls under its
// configured floor: the inverse problem is ill-posed at that instant.
struct DenominatorTooSmall : NumericalError {
  double value;
  double floor;
  double t;
  DenominatorTooSmall(const std::string& what, double v, double f, double when)
      : NumericalError(what + " |" + std::to_string(v) + "| below floor " +
                       std::to_string(f) + " at t=" + std::to_string(when)),
        value(v), floor(f), t(when) {}
};

struct PicardDivergence : NumericalError {
  int iterations;
  double residual;
  PicardDivergence(int iters, double res)
      : NumericalError("fixed-point iteration failed to contract after " +
                       std::to_string(iters) + " sweeps (residual " +
                       std::to_string(res) + ")"),
        iterations(iters), residual(res) {}
};

struct IoError : StefanError {
  explicit IoError(const std::string& msg) : StefanError(ExitCode::IoError, msg) {}
};

}  // namespace stefan
