#include "stlgp/formula.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stlgp {

namespace {

std::string number_text(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.17g", v);
  return buffer;
}

void check_bounds(TimeBounds b) {
  if (!std::isfinite(b.lo) || !std::isfinite(b.hi) || b.lo < 0.0 || !(b.lo < b.hi)) {
    throw ValidationError("temporal bounds must satisfy 0 <= lo < hi < inf, got [" +
                          number_text(b.lo) + "," + number_text(b.hi) + "]");
  }
}

const char* comparison_text(Comparison c) {
  switch (c) {
    case Comparison::Less: return "<";
    case Comparison::LessEqual: return "<=";
    case Comparison::Greater: return ">";
    case Comparison::GreaterEqual: return ">=";
  }
  return "?";
}

} // namespace

// ---------------------------------------------------------------------------
// Expr

ExprPtr Expr::number(double value) {
  return std::make_shared<const Expr>(Kind::Number, value, std::string{}, nullptr, nullptr);
}

ExprPtr Expr::variable(std::string name) {
  return std::make_shared<const Expr>(Kind::Variable, 0.0, std::move(name), nullptr, nullptr);
}

ExprPtr Expr::negate(ExprPtr operand) {
  return std::make_shared<const Expr>(Kind::Negate, 0.0, std::string{}, std::move(operand), nullptr);
}

ExprPtr Expr::binary(Kind kind, ExprPtr lhs, ExprPtr rhs) {
  return std::make_shared<const Expr>(kind, 0.0, std::string{}, std::move(lhs), std::move(rhs));
}

std::string Expr::to_string() const {
  switch (kind_) {
    case Kind::Number: return number_text(value_);
    case Kind::Variable: return name_;
    case Kind::Negate: return "(-" + lhs_->to_string() + ")";
    case Kind::Add: return "(" + lhs_->to_string() + " + " + rhs_->to_string() + ")";
    case Kind::Subtract: return "(" + lhs_->to_string() + " - " + rhs_->to_string() + ")";
    case Kind::Multiply: return "(" + lhs_->to_string() + " * " + rhs_->to_string() + ")";
    case Kind::Divide: return "(" + lhs_->to_string() + " / " + rhs_->to_string() + ")";
  }
  return {};
}

void Expr::collect_variables(std::vector<std::string>& out) const {
  if (kind_ == Kind::Variable) {
    if (std::find(out.begin(), out.end(), name_) == out.end()) out.push_back(name_);
    return;
  }
  if (lhs_) lhs_->collect_variables(out);
  if (rhs_) rhs_->collect_variables(out);
}

bool structurally_equal(const Expr& a, const Expr& b) {
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case Expr::Kind::Number: return a.value() == b.value();
    case Expr::Kind::Variable: return a.name() == b.name();
    case Expr::Kind::Negate: return structurally_equal(*a.lhs(), *b.lhs());
    default:
      return structurally_equal(*a.lhs(), *b.lhs()) && structurally_equal(*a.rhs(), *b.rhs());
  }
}

// ---------------------------------------------------------------------------
// Formula

FormulaPtr Formula::make_true() {
  return std::make_shared<const Formula>(Op::True, std::vector<FormulaPtr>{}, TimeBounds{}, nullptr,
                                         Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::make_false() {
  return std::make_shared<const Formula>(Op::False, std::vector<FormulaPtr>{}, TimeBounds{}, nullptr,
                                         Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::atom(ExprPtr lhs, Comparison cmp, ExprPtr rhs) {
  return std::make_shared<const Formula>(Op::Atom, std::vector<FormulaPtr>{}, TimeBounds{},
                                         std::move(lhs), cmp, std::move(rhs));
}

FormulaPtr Formula::negation(FormulaPtr operand) {
  return std::make_shared<const Formula>(Op::Not, std::vector<FormulaPtr>{std::move(operand)},
                                         TimeBounds{}, nullptr, Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::conjunction(FormulaPtr lhs, FormulaPtr rhs) {
  return std::make_shared<const Formula>(Op::And,
                                         std::vector<FormulaPtr>{std::move(lhs), std::move(rhs)},
                                         TimeBounds{}, nullptr, Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::disjunction(FormulaPtr lhs, FormulaPtr rhs) {
  return std::make_shared<const Formula>(Op::Or,
                                         std::vector<FormulaPtr>{std::move(lhs), std::move(rhs)},
                                         TimeBounds{}, nullptr, Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::implication(FormulaPtr lhs, FormulaPtr rhs) {
  return disjunction(negation(std::move(lhs)), std::move(rhs));
}

FormulaPtr Formula::until(FormulaPtr lhs, TimeBounds bounds, FormulaPtr rhs) {
  check_bounds(bounds);
  return std::make_shared<const Formula>(Op::Until,
                                         std::vector<FormulaPtr>{std::move(lhs), std::move(rhs)},
                                         bounds, nullptr, Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::eventually(TimeBounds bounds, FormulaPtr operand) {
  check_bounds(bounds);
  return std::make_shared<const Formula>(Op::Eventually, std::vector<FormulaPtr>{std::move(operand)},
                                         bounds, nullptr, Comparison::GreaterEqual, nullptr);
}

FormulaPtr Formula::globally(TimeBounds bounds, FormulaPtr operand) {
  check_bounds(bounds);
  return std::make_shared<const Formula>(Op::Globally, std::vector<FormulaPtr>{std::move(operand)},
                                         bounds, nullptr, Comparison::GreaterEqual, nullptr);
}

ExprPtr Formula::normalized() const {
  if (op_ != Op::Atom) throw ValidationError("normalized() called on a non-atomic formula");
  if (cmp_ == Comparison::Less || cmp_ == Comparison::LessEqual) {
    return Expr::binary(Expr::Kind::Subtract, rhs_, lhs_);
  }
  return Expr::binary(Expr::Kind::Subtract, lhs_, rhs_);
}

std::string Formula::operator_label() const {
  const auto window = [this] {
    return "[" + number_text(bounds_.lo) + "," + number_text(bounds_.hi) + "]";
  };
  switch (op_) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom: return "atom";
    case Op::Not: return "not";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Until: return "U" + window();
    case Op::Eventually: return "F" + window();
    case Op::Globally: return "G" + window();
  }
  return {};
}

std::string Formula::to_string() const {
  switch (op_) {
    case Op::True: return "true";
    case Op::False: return "false";
    case Op::Atom:
      return "(" + lhs_->to_string() + " " + comparison_text(cmp_) + " " + rhs_->to_string() + ")";
    case Op::Not: return "(not " + child()->to_string() + ")";
    case Op::And: return "(" + child(0)->to_string() + " and " + child(1)->to_string() + ")";
    case Op::Or: return "(" + child(0)->to_string() + " or " + child(1)->to_string() + ")";
    case Op::Until:
      return "(" + child(0)->to_string() + " " + operator_label() + " " + child(1)->to_string() + ")";
    case Op::Eventually:
    case Op::Globally: return "(" + operator_label() + " " + child()->to_string() + ")";
  }
  return {};
}

double Formula::horizon() const {
  double inner = 0.0;
  for (const auto& c : children_) inner = std::max(inner, c->horizon());
  return is_temporal() ? bounds_.hi + inner : inner;
}

std::vector<std::string> Formula::variables() const {
  std::vector<std::string> out;
  const auto visit = [&out](const Formula& f, const auto& self) -> void {
    if (f.op() == Op::Atom) {
      f.lhs()->collect_variables(out);
      f.rhs()->collect_variables(out);
    }
    for (const auto& c : f.children()) self(*c, self);
  };
  visit(*this, visit);
  return out;
}

std::size_t Formula::depth() const {
  std::size_t d = 0;
  for (const auto& c : children_) d = std::max(d, c->depth());
  return d + 1;
}

bool structurally_equal(const Formula& a, const Formula& b) {
  if (a.op() != b.op() || a.children().size() != b.children().size()) return false;
  if (a.is_temporal() && (a.bounds().lo != b.bounds().lo || a.bounds().hi != b.bounds().hi)) {
    return false;
  }
  if (a.op() == Formula::Op::Atom) {
    return a.comparison() == b.comparison() && structurally_equal(*a.lhs(), *b.lhs()) &&
           structurally_equal(*a.rhs(), *b.rhs());
  }
  for (std::size_t i = 0; i < a.children().size(); ++i) {
    if (!structurally_equal(*a.children()[i], *b.children()[i])) return false;
  }
  return true;
}

} // namespace stlgp
