#include "hpbem/expression.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hpbem {

struct Expression::Node {
  enum Kind { Num, X1, X2, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Num;
  double value = 0.0;
  std::string fn;
  std::vector<std::shared_ptr<const Node>> args;

  double eval(const Vec2& x) const {
    switch (kind) {
      case Num: return value;
      case X1: return x.x();
      case X2: return x.y();
      case Neg: return -args[0]->eval(x);
      case Add: return args[0]->eval(x) + args[1]->eval(x);
      case Sub: return args[0]->eval(x) - args[1]->eval(x);
      case Mul: return args[0]->eval(x) * args[1]->eval(x);
      case Div: return args[0]->eval(x) / args[1]->eval(x);
      case Pow: return std::pow(args[0]->eval(x), args[1]->eval(x));
      case Call: break;
    }
    const double a = args[0]->eval(x);
    if (fn == "sqrt") return std::sqrt(a);
    if (fn == "exp") return std::exp(a);
    if (fn == "log") return std::log(a);
    if (fn == "abs") return std::abs(a);
    if (fn == "sign") return (a > 0) - (a < 0);
    if (fn == "sin") return std::sin(a);
    if (fn == "cos") return std::cos(a);
    if (fn == "min") return std::min(a, args[1]->eval(x));
    return std::max(a, args[1]->eval(x));  // max
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make(Node::Kind k, std::vector<NodePtr> args = {}, double v = 0.0, std::string fn = {}) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->args = std::move(args);
  n->value = v;
  n->fn = std::move(fn);
  return n;
}

int arity(const std::string& fn) {
  if (fn == "min" || fn == "max") return 2;
  if (fn == "sqrt" || fn == "exp" || fn == "log" || fn == "abs" || fn == "sign" || fn == "sin" || fn == "cos")
    return 1;
  return -1;
}

// expr   := term (('+'|'-') term)*
// term   := unary (('*'|'/') unary)*
// unary  := '-' unary | '+' unary | power
// power  := atom ('^' unary)?
// atom   := number | name | name '(' args ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = expr();
    skip();
    if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  std::size_t i_ = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("expression \"" + s_ + "\": " + msg + " at position " + std::to_string(i_));
  }
  void skip() {
    while (i_ < s_.size() && std::isspace((unsigned char)s_[i_])) ++i_;
  }
  bool accept(char c) {
    skip();
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr l = term();
    for (;;) {
      if (accept('+')) l = make(Node::Add, {l, term()});
      else if (accept('-')) l = make(Node::Sub, {l, term()});
      else return l;
    }
  }
  NodePtr term() {
    NodePtr l = unary();
    for (;;) {
      if (accept('*')) l = make(Node::Mul, {l, unary()});
      else if (accept('/')) l = make(Node::Div, {l, unary()});
      else return l;
    }
  }
  NodePtr unary() {
    if (accept('-')) return make(Node::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }
  NodePtr power() {
    NodePtr b = atom();
    if (accept('^')) return make(Node::Pow, {b, unary()});
    return b;
  }
  NodePtr atom() {
    skip();
    if (i_ >= s_.size()) fail("unexpected end");
    if (accept('(')) {
      NodePtr n = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[i_];
    if (std::isdigit((unsigned char)c) || c == '.') {
      const char* begin = s_.c_str() + i_;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) fail("bad number");
      i_ += end - begin;
      return make(Node::Num, {}, v);
    }
    if (std::isalpha((unsigned char)c)) {
      std::size_t j = i_;
      while (j < s_.size() && (std::isalnum((unsigned char)s_[j]) || s_[j] == '_')) ++j;
      std::string name = s_.substr(i_, j - i_);
      i_ = j;
      if (name == "x1") return make(Node::X1);
      if (name == "x2") return make(Node::X2);
      if (name == "pi") return make(Node::Num, {}, std::numbers::pi);
      const int n = arity(name);
      if (n < 0) fail("unknown name '" + name + "'");
      if (!accept('(')) fail("expected '(' after " + name);
      std::vector<NodePtr> args{expr()};
      while (accept(',')) args.push_back(expr());
      if (!accept(')')) fail("missing ')'");
      if ((int)args.size() != n) fail(name + " takes " + std::to_string(n) + " argument(s)");
      return make(Node::Call, std::move(args), 0.0, name);
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text).parse()) {}

double Expression::operator()(const Vec2& x) const {
  if (!root_) throw std::logic_error("empty expression");
  return root_->eval(x);
}

}  // namespace hpbem
