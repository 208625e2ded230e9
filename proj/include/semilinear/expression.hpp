#pragma once

// Whitelisted arithmetic over x1, x2, t and |x| for inline right-hand sides and
// boundary data. Grammar:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | 'pi' | 'x1' | 'x2' | 't' | '|x|' | '(' expr ')'
//           | ('log' | 'abs') '(' expr ')' | 'max' '(' expr ',' expr ')'

#include <memory>
#include <string>

namespace semilinear {

class Expression {
 public:
  struct Node;

  Expression() = default;
  /// Throws ConfigError on any token outside the grammar.
  static Expression parse(const std::string& text);

  double operator()(double x1, double x2, double t = 0.0) const;
  const std::string& source() const { return source_; }
  bool uses_t() const { return uses_t_; }

 private:
  std::shared_ptr<const Node> root_;
  std::string source_;
  bool uses_t_ = false;
};

}  // namespace semilinear
