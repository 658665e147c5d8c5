#include "nonholo/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <vector>

#include "nonholo/errors.hpp"

namespace nonholo {

namespace {

enum class Op { Num, Var, Add, Sub, Mul, Div, Pow, Neg, Sin, Cos, Exp, Log, Sqrt, Abs };

struct Node {
  Op op = Op::Num;
  double value = 0.0;
  int var = -1;
  std::shared_ptr<const Node> a, b;
  bool constant() const { return op == Op::Num; }
};
using NodePtr = std::shared_ptr<const Node>;

double fold(Op op, double x, double y) {
  switch (op) {
    case Op::Add: return x + y;
    case Op::Sub: return x - y;
    case Op::Mul: return x * y;
    case Op::Div: return x / y;
    case Op::Pow: return std::pow(x, y);
    case Op::Neg: return -x;
    case Op::Sin: return std::sin(x);
    case Op::Cos: return std::cos(x);
    case Op::Exp: return std::exp(x);
    case Op::Log: return std::log(x);
    case Op::Sqrt: return std::sqrt(x);
    case Op::Abs: return std::abs(x);
    default: return 0.0;
  }
}

NodePtr make(Op op, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  const bool unary = !n->b;
  if (n->a->constant() && (unary || n->b->constant())) {
    const double v = fold(op, n->a->value, unary ? 0.0 : n->b->value);
    if (std::isfinite(v)) {
      auto c = std::make_shared<Node>();
      c->value = v;
      return c;
    }
  }
  return n;
}

class Parser {
 public:
  Parser(const std::string& src, int arity, const std::map<std::string, double>& constants, int line, int offset)
      : s_(src), arity_(arity), constants_(constants), line_(line), offset_(offset) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (pos_ != s_.size()) error("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void error(const std::string& what) const {
    throw ParseFailure(what, line_, offset_ + static_cast<int>(pos_) + 1);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr n = term();
    while (true) {
      if (accept('+')) n = make(Op::Add, n, term());
      else if (accept('-')) n = make(Op::Sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    NodePtr n = unary();
    while (true) {
      if (accept('*')) n = make(Op::Mul, n, unary());
      else if (accept('/')) n = make(Op::Div, n, unary());
      else return n;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::Neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::Pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) error("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr n = expr();
      if (!accept(')')) error("expected ')'");
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return symbol();
    error("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) error("malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  NodePtr symbol() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    static const std::map<std::string, Op> functions = {{"sin", Op::Sin},   {"cos", Op::Cos},   {"exp", Op::Exp},
                                                        {"log", Op::Log},   {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};
    if (auto f = functions.find(name); f != functions.end()) {
      if (!accept('(')) error("expected '(' after " + name);
      NodePtr arg = expr();
      if (!accept(')')) error("expected ')'");
      return make(f->second, arg);
    }
    if (name.size() >= 2 && name[0] == 'u' &&
        name.find_first_not_of("0123456789", 1) == std::string::npos) {
      const int k = std::atoi(name.c_str() + 1);
      if (k < 1 || k > arity_) {
        pos_ = start;
        error("coordinate " + name + " outside chart of dimension " + std::to_string(arity_));
      }
      auto n = std::make_shared<Node>();
      n->op = Op::Var;
      n->var = k - 1;
      return n;
    }
    double v = 0.0;
    if (auto it = constants_.find(name); it != constants_.end()) v = it->second;
    else if (name == "pi") v = std::numbers::pi;
    else if (name == "e") v = std::numbers::e;
    else {
      pos_ = start;
      error("unknown symbol '" + name + "'");
    }
    auto n = std::make_shared<Node>();
    n->value = v;
    return n;
  }

  const std::string& s_;
  int arity_;
  const std::map<std::string, double>& constants_;
  int line_;
  int offset_;
  std::size_t pos_ = 0;
};

Jet evaluate(const Node& n, std::span<const Jet> u) {
  switch (n.op) {
    case Op::Num: return Jet::exact(n.value);
    case Op::Var: return u[n.var];
    case Op::Add: return evaluate(*n.a, u) + evaluate(*n.b, u);
    case Op::Sub: return evaluate(*n.a, u) - evaluate(*n.b, u);
    case Op::Mul: return evaluate(*n.a, u) * evaluate(*n.b, u);
    case Op::Div: return evaluate(*n.a, u) / evaluate(*n.b, u);
    case Op::Pow:
      if (n.b->constant()) return pow(evaluate(*n.a, u), n.b->value);
      return pow(evaluate(*n.a, u), evaluate(*n.b, u));
    case Op::Neg: return -evaluate(*n.a, u);
    case Op::Sin: return sin(evaluate(*n.a, u));
    case Op::Cos: return cos(evaluate(*n.a, u));
    case Op::Exp: return exp(evaluate(*n.a, u));
    case Op::Log: return log(evaluate(*n.a, u));
    case Op::Sqrt: return sqrt(evaluate(*n.a, u));
    case Op::Abs: return abs(evaluate(*n.a, u));
  }
  return Jet();
}

}  // namespace

ScalarField parse_expression(const std::string& source, int arity, const std::map<std::string, double>& constants,
                             int line, int column_offset) {
  Parser parser(source, arity, constants, line, column_offset);
  NodePtr root = parser.parse();
  if (root->constant()) return ScalarField::constant(arity, root->value);
  return ScalarField(arity, source, [root](std::span<const Jet> u) { return evaluate(*root, u); });
}

}  // namespace nonholo
