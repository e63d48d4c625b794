#include "stefan/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>

#include "stefan/errors.hpp"

namespace stefan {

struct Expr::Node {
  enum class Op { Const, Var, Add, Sub, Mul, Div, Pow, Neg, Fn1, Fn2 };
  Op op = Op::Const;
  double value = 0.0;
  int var = -1;
  double (*fn1)(double) = nullptr;
  double (*fn2)(double, double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const std::vector<double>& args) const {
    switch (op) {
      case Op::Const: return value;
      case Op::Var: return args[size_t(var)];
      case Op::Add: return a->eval(args) + b->eval(args);
      case Op::Sub: return a->eval(args) - b->eval(args);
      case Op::Mul: return a->eval(args) * b->eval(args);
      case Op::Div: return a->eval(args) / b->eval(args);
      case Op::Pow: return std::pow(a->eval(args), b->eval(args));
      case Op::Neg: return -a->eval(args);
      case Op::Fn1: return fn1(a->eval(args));
      default: return fn2(a->eval(args), b->eval(args));
    }
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;
using Node = Expr::Node;

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::Const;
  n->value = v;
  return n;
}

NodePtr make_var(int idx) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::Var;
  n->var = idx;
  return n;
}

NodePtr make_bin(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

NodePtr make_neg(NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::Neg;
  n->a = std::move(a);
  return n;
}

const std::map<std::string, double (*)(double)>& unary_table() {
  static const std::map<std::string, double (*)(double)> table = {
      {"sin", std::sin},   {"cos", std::cos},   {"tan", std::tan},
      {"exp", std::exp},   {"log", std::log},   {"sqrt", std::sqrt},
      {"sinh", std::sinh}, {"cosh", std::cosh}, {"tanh", std::tanh},
      {"abs", std::fabs},
  };
  return table;
}

struct Parser {
  const std::string& s;
  const std::vector<std::string>& vars;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& why) const {
    throw ConfigError("expression: " + why + " at position " +
                      std::to_string(pos) + " in \"" + s + "\"");
  }

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < s.size() ? s[pos] : '\0';
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (eat('+')) lhs = make_bin(Node::Op::Add, lhs, parse_term());
      else if (eat('-')) lhs = make_bin(Node::Op::Sub, lhs, parse_term());
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (eat('*')) lhs = make_bin(Node::Op::Mul, lhs, parse_unary());
      else if (eat('/')) lhs = make_bin(Node::Op::Div, lhs, parse_unary());
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (eat('-')) return make_neg(parse_unary());
    if (eat('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (eat('^')) {
      // right-associative; exponent may itself be signed
      NodePtr expo = parse_unary();
      return make_bin(Node::Op::Pow, base, expo);
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input");
    char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s.c_str() + pos;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      pos += size_t(end - begin);
      return make_const(v);
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = parse_expr();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t start = pos;
      while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) ||
                                s[pos] == '_'))
        ++pos;
      std::string name = s.substr(start, pos - start);
      if (peek() == '(') {
        ++pos; // consume '('
        if (name == "pow") {
          NodePtr a = parse_expr();
          if (!eat(',')) fail("pow needs two arguments");
          NodePtr b = parse_expr();
          if (!eat(')')) fail("missing ')'");
          auto n = std::make_shared<Node>();
          n->op = Node::Op::Fn2;
          n->fn2 = [](double x, double y) { return std::pow(x, y); };
          n->a = a;
          n->b = b;
          return n;
        }
        auto it = unary_table().find(name);
        if (it == unary_table().end()) fail("unknown function '" + name + "'");
        NodePtr a = parse_expr();
        if (!eat(')')) fail("missing ')'");
        auto n = std::make_shared<Node>();
        n->op = Node::Op::Fn1;
        n->fn1 = it->second;
        n->a = a;
        return n;
      }
      if (name == "pi") return make_const(std::numbers::pi);
      if (name == "e") return make_const(std::numbers::e);
      for (size_t i = 0; i < vars.size(); ++i)
        if (vars[i] == name) return make_var(int(i));
      std::string allowed;
      for (const auto& v : vars) allowed += (allowed.empty() ? "" : ", ") + v;
      fail("unknown identifier '" + name + "' (variables here: " + allowed + ")");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

} // namespace

Expr Expr::parse(const std::string& text, std::vector<std::string> variables) {
  Expr e;
  e.vars_ = std::move(variables);
  e.text_ = text;
  Parser p{text, e.vars_, 0};
  e.root_ = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

double Expr::eval(const std::vector<double>& args) const {
  if (!root_) throw ConfigError("expression: evaluating an empty expression");
  if (args.size() != vars_.size())
    throw ConfigError("expression: argument count mismatch");
  return root_->eval(args);
}

SmoothFn time_fn(const Expr& e) {
  if (e.variables() != std::vector<std::string>{"t"})
    throw ConfigError("expression: expected a function of t: " + e.text());
  return SmoothFn([e](double t) { return e.eval({t}); });
}

SmoothFn space_fn(const Expr& e) {
  if (e.variables().size() != 1)
    throw ConfigError("expression: expected one space variable: " + e.text());
  return SmoothFn([e](double x) { return e.eval({x}); });
}

Field space_time_field(const Expr& e) {
  if (e.variables().size() != 2 || e.variables()[1] != "t")
    throw ConfigError("expression: expected variables (space, t): " + e.text());
  return [e](double x, double t) { return e.eval({x, t}); };
}

} // namespace stefan
