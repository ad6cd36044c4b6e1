#pragma once

#include <memory>
#include <string>
#include <string_view>

namespace chj {

/// A scalar expression in one variable `x`, as written in experiment
/// configs: numbers, `x`, `pi`, `+ - * / ^`, parentheses, `sin`, `cos`,
/// `exp`. Derivatives are exact (forward-mode dual evaluation).
class Expression {
 public:
  struct Node;

  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double operator()(double x) const;
  double derivative(double x) const;
  const std::string& source() const noexcept { return source_; }

 private:
  Expression(std::shared_ptr<const Node> root, std::string source);

  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace chj
