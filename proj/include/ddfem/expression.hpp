#pragma once

#include <Eigen/Dense>

#include <memory>
#include <string>

namespace ddfem {

/// Closed-form scalar expression over the coordinates x, y, z.
///
/// Grammar: numbers, x y z, pi, + - * / ^ (right associative), unary minus,
/// parentheses, and the functions exp log sqrt sin cos tan abs.
class Expression {
 public:
  /// Throws ParseError (line 0) on malformed input.
  explicit Expression(std::string source);

  double operator()(const Eigen::VectorXd& x) const;
  const std::string& source() const noexcept { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
};

}  // namespace ddfem
