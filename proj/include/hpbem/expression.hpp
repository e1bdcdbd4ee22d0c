#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hpbem/mesh.hpp"

namespace hpbem {

// Arithmetic expressions over x1, x2: numbers, + - * / ^, unary minus,
// parentheses, the constant pi and the functions sqrt exp log abs sign sin
// cos, min(a,b), max(a,b).
class Expression {
 public:
  Expression() = default;
  explicit Expression(const std::string& text);  // throws std::invalid_argument

  double operator()(const Vec2& x) const;
  const std::string& text() const { return text_; }
  bool empty() const { return !root_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace hpbem
