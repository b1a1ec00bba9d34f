#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "warpiso/errors.hpp"

namespace warpiso::expr {

/// Parse failure. Carries the 0-based byte offset of the failure and the
/// set of token descriptions that would have been accepted there.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset,
             std::vector<std::string> expected);
  std::size_t offset;
  std::vector<std::string> expected;
};

using Bindings = std::map<std::string, double>;

enum class NodeKind {
  constant,
  radius,     // the reserved variable `r`
  parameter,  // named free parameter
  negate,
  add,
  sub,
  mul,
  div,
  pow,
  call,
};

enum class Func { sqrt, exp, log, sin, cos, tanh };

const char* func_name(Func f);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

/// Immutable AST node. Trees are shared freely across threads after
/// construction; evaluation never mutates them.
struct Node {
  NodeKind kind = NodeKind::constant;
  double value = 0.0;       // constant
  std::string name;         // parameter
  Func func = Func::sqrt;   // call
  NodePtr lhs, rhs;         // rhs empty for negate/call
};

/// A closed-form expression in the radial variable `r` with named parameters.
class Expression {
 public:
  Expression() = default;
  explicit Expression(NodePtr root) : root_(std::move(root)) {}

  bool valid() const { return root_ != nullptr; }

  /// Evaluate at radius r with the given parameter bindings.
  /// Bit-for-bit deterministic for identical inputs.
  double evaluate(double r, const Bindings& bindings = {}) const;

  /// Symbolic derivative d/dr. The result may be unreduced apart from
  /// constant folding.
  Expression derivative() const;

  /// Render with minimal parenthesization; parse(to_string()) is
  /// structurally identical to this tree.
  std::string to_string() const;

  bool structurally_equal(const Expression& other) const;

  /// Sorted, de-duplicated names of free parameters.
  std::vector<std::string> parameters() const;

  bool is_constant() const;

  const NodePtr& root() const { return root_; }

 private:
  NodePtr root_;
};

/// Parse an expression over `r`. Grammar: `^` binds tighter than unary
/// minus, then `*` `/`, then `+` `-`; all left-associative except `^`
/// (right-associative). Functions: sqrt, exp, log, sin, cos, tanh.
/// Identifiers are [a-zA-Z_][a-zA-Z0-9_]*, with `r` reserved for the
/// radial variable. Throws ParseError with a byte offset on failure.
Expression parse(std::string_view text);

// Node constructors with constant folding (a folded result must be finite,
// otherwise the node is kept and the error surfaces at evaluation time).
NodePtr make_constant(double v);
NodePtr make_radius();
NodePtr make_parameter(std::string name);
NodePtr make_negate(NodePtr a);
NodePtr make_binary(NodeKind op, NodePtr a, NodePtr b);
NodePtr make_call(Func f, NodePtr a);

}  // namespace warpiso::expr
