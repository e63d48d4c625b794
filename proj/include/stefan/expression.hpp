#pragma once

#include <memory>
#include <string>
#include <vector>

#include "stefan/geometry.hpp"
#include "stefan/smooth_fn.hpp"

namespace stefan {

// Arithmetic expression over named variables with the usual functions:
//   sin cos tan exp log sqrt sinh cosh tanh abs, pow(a,b), ^, unary minus,
// and the constants pi, e.  Parse failures throw ConfigError with position.
class Expr {
public:
  Expr() = default;
  static Expr parse(const std::string& text,
                    std::vector<std::string> variables);

  bool empty() const { return root_ == nullptr; }
  double eval(const std::vector<double>& args) const; // positional
  const std::vector<std::string>& variables() const { return vars_; }
  const std::string& text() const { return text_; }

  struct Node;

private:
  std::shared_ptr<const Node> root_;
  std::vector<std::string> vars_;
  std::string text_;
};

// Adapters.  Derivatives fall back to divided differences (SmoothFn).
SmoothFn time_fn(const Expr& e);                 // variables {"t"}
SmoothFn space_fn(const Expr& e);                // single space variable
Field space_time_field(const Expr& e);           // (space, t)

} // namespace stefan
