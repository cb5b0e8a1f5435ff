#pragma once

#include <memory>
#include <string>
#include <vector>

namespace stlgp {

// ---------------------------------------------------------------------------
// Arithmetic expressions used inside atomic predicates.

class Expr;
using ExprPtr = std::shared_ptr<const Expr>;

class Expr {
public:
  enum class Kind { Number, Variable, Negate, Add, Subtract, Multiply, Divide };

  static ExprPtr number(double value);
  static ExprPtr variable(std::string name);
  static ExprPtr negate(ExprPtr operand);
  static ExprPtr binary(Kind kind, ExprPtr lhs, ExprPtr rhs);

  Kind kind() const { return kind_; }
  double value() const { return value_; }
  const std::string& name() const { return name_; }
  const ExprPtr& lhs() const { return lhs_; }
  const ExprPtr& rhs() const { return rhs_; }

  std::string to_string() const;
  void collect_variables(std::vector<std::string>& out) const;

  Expr(Kind kind, double value, std::string name, ExprPtr lhs, ExprPtr rhs)
      : kind_(kind), value_(value), name_(std::move(name)), lhs_(std::move(lhs)),
        rhs_(std::move(rhs)) {}

private:
  Kind kind_;
  double value_;
  std::string name_;
  ExprPtr lhs_;
  ExprPtr rhs_;
};

bool structurally_equal(const Expr& a, const Expr& b);

// ---------------------------------------------------------------------------
// STL formulas

enum class Comparison { Less, LessEqual, Greater, GreaterEqual };

struct TimeBounds {
  double lo = 0.0;
  double hi = 0.0;
};

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

/// Immutable STL syntax tree. Atoms are `lhs cmp rhs`, monitored as g >= 0 with
/// g = rhs - lhs for `<`, `<=` and g = lhs - rhs for `>`, `>=`.
class Formula {
public:
  enum class Op { True, False, Atom, Not, And, Or, Until, Eventually, Globally };

  static FormulaPtr make_true();
  static FormulaPtr make_false();
  static FormulaPtr atom(ExprPtr lhs, Comparison cmp, ExprPtr rhs);
  static FormulaPtr negation(FormulaPtr operand);
  static FormulaPtr conjunction(FormulaPtr lhs, FormulaPtr rhs);
  static FormulaPtr disjunction(FormulaPtr lhs, FormulaPtr rhs);
  /// a -> b, stored as (not a) or b.
  static FormulaPtr implication(FormulaPtr lhs, FormulaPtr rhs);
  static FormulaPtr until(FormulaPtr lhs, TimeBounds bounds, FormulaPtr rhs);
  static FormulaPtr eventually(TimeBounds bounds, FormulaPtr operand);
  static FormulaPtr globally(TimeBounds bounds, FormulaPtr operand);

  Op op() const { return op_; }
  const std::vector<FormulaPtr>& children() const { return children_; }
  const FormulaPtr& child(std::size_t i = 0) const { return children_.at(i); }
  TimeBounds bounds() const { return bounds_; }

  // Atom accessors.
  const ExprPtr& lhs() const { return lhs_; }
  const ExprPtr& rhs() const { return rhs_; }
  Comparison comparison() const { return cmp_; }
  /// The normalized expression g of `g >= 0`.
  ExprPtr normalized() const;

  bool is_temporal() const { return op_ == Op::Until || op_ == Op::Eventually || op_ == Op::Globally; }

  /// Fully parenthesized text that parses back to an equal tree.
  std::string to_string() const;
  /// Short label of the top operator, e.g. "G[0,30]".
  std::string operator_label() const;

  /// Largest future time offset the formula looks at (sum of nested upper bounds).
  double horizon() const;
  std::vector<std::string> variables() const;
  std::size_t depth() const;

  Formula(Op op, std::vector<FormulaPtr> children, TimeBounds bounds, ExprPtr lhs, Comparison cmp,
          ExprPtr rhs)
      : op_(op), children_(std::move(children)), bounds_(bounds), lhs_(std::move(lhs)),
        rhs_(std::move(rhs)), cmp_(cmp) {}

private:
  Op op_;
  std::vector<FormulaPtr> children_;
  TimeBounds bounds_;
  ExprPtr lhs_;
  ExprPtr rhs_;
  Comparison cmp_;
};

bool structurally_equal(const Formula& a, const Formula& b);

} // namespace stlgp
