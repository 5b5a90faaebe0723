#pragma once

// Field expressions over the ambient coordinates x, y, z:
//   numbers, pi, + - * / ^ (right associative, binds tighter than unary
//   minus), sin cos exp sqrt abs, cap_bump(cx, cy, cz, r).

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qstate/errors.hpp"
#include "qstate/geometry.hpp"

namespace qstate {

// Syntax error, unknown identifier or arity mismatch, with a 1-based source
// position.
class ParseError : public ArgumentError {
 public:
  ParseError(const std::string& message, int line, int column);
  int line() const { return line_; }
  int column() const { return column_; }
  const std::string& message() const { return message_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

struct ExprNode {
  enum class Kind { kNumber, kVariable, kNegate, kAdd, kSub, kMul, kDiv, kPow, kCall };
  Kind kind = Kind::kNumber;
  double number = 0.0;  // kNumber
  int variable = 0;     // kVariable: 0, 1, 2 for x, y, z
  std::string name;     // kCall
  std::vector<std::shared_ptr<const ExprNode>> args;
};

bool operator==(const ExprNode& a, const ExprNode& b);

class FieldExpression {
 public:
  FieldExpression(std::string source, std::shared_ptr<const ExprNode> root);

  const std::string& source() const { return source_; }
  const ExprNode& root() const { return *root_; }

  double evaluate(const Vec3& p) const;
  // Fully parenthesized form with 17 significant digits; parses back to an
  // equal tree.
  std::string to_string() const;

  friend bool operator==(const FieldExpression& a, const FieldExpression& b) {
    return *a.root_ == *b.root_;
  }

 private:
  std::string source_;
  std::shared_ptr<const ExprNode> root_;
};

FieldExpression parse_expression(std::string_view source);

// Samples the expression at every vertex; EvaluationError on a non-finite
// value.
ScalarField sample_expression(const MeshPtr& mesh, const FieldExpression& expr);

}  // namespace qstate
