#include "stlgp/decomposition.hpp"
#include "stlgp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace stlgp {

// ---------------------------------------------------------------------------
// Skeleton

SkeletonPtr Skeleton::constant(bool value) {
  return std::make_shared<const Skeleton>(Kind::Constant, value, 0, nullptr, nullptr);
}

SkeletonPtr Skeleton::atom(std::size_t index) {
  return std::make_shared<const Skeleton>(Kind::Atom, false, index, nullptr, nullptr);
}

SkeletonPtr Skeleton::negation(SkeletonPtr operand) {
  return std::make_shared<const Skeleton>(Kind::Not, false, 0, std::move(operand), nullptr);
}

SkeletonPtr Skeleton::conjunction(SkeletonPtr lhs, SkeletonPtr rhs) {
  return std::make_shared<const Skeleton>(Kind::And, false, 0, std::move(lhs), std::move(rhs));
}

SkeletonPtr Skeleton::disjunction(SkeletonPtr lhs, SkeletonPtr rhs) {
  return std::make_shared<const Skeleton>(Kind::Or, false, 0, std::move(lhs), std::move(rhs));
}

std::string Skeleton::to_string() const {
  switch (kind_) {
    case Kind::Constant: return value_ ? "true" : "false";
    case Kind::Atom: return "a" + std::to_string(index_);
    case Kind::Not: return "not " + lhs_->to_string();
    case Kind::And: return "(" + lhs_->to_string() + " and " + rhs_->to_string() + ")";
    case Kind::Or: return "(" + lhs_->to_string() + " or " + rhs_->to_string() + ")";
  }
  return {};
}

std::size_t Skeleton::atom_bound() const {
  switch (kind_) {
    case Kind::Constant: return 0;
    case Kind::Atom: return index_ + 1;
    case Kind::Not: return lhs_->atom_bound();
    default: return std::max(lhs_->atom_bound(), rhs_->atom_bound());
  }
}

// ---------------------------------------------------------------------------
// Rewriting and extraction

namespace {

FormulaPtr push_globally(TimeBounds b, const FormulaPtr& operand) {
  if (operand->op() == Formula::Op::And) {
    return Formula::conjunction(push_globally(b, operand->child(0)),
                                push_globally(b, operand->child(1)));
  }
  return Formula::globally(b, operand);
}

FormulaPtr push_eventually(TimeBounds b, const FormulaPtr& operand) {
  if (operand->op() == Formula::Op::Or) {
    return Formula::disjunction(push_eventually(b, operand->child(0)),
                                push_eventually(b, operand->child(1)));
  }
  return Formula::eventually(b, operand);
}

SkeletonPtr extract(const FormulaPtr& f, std::vector<FormulaPtr>& atoms) {
  using Op = Formula::Op;
  switch (f->op()) {
    case Op::True: return Skeleton::constant(true);
    case Op::False: return Skeleton::constant(false);
    case Op::Not: return Skeleton::negation(extract(f->child(), atoms));
    case Op::And:
    case Op::Or: {
      // left operand first so atoms are numbered in reading order
      auto lhs = extract(f->child(0), atoms);
      auto rhs = extract(f->child(1), atoms);
      return f->op() == Op::And ? Skeleton::conjunction(std::move(lhs), std::move(rhs))
                                : Skeleton::disjunction(std::move(lhs), std::move(rhs));
    }
    default: break;
  }
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (structurally_equal(*atoms[i], *f)) return Skeleton::atom(i);
  }
  atoms.push_back(f);
  return Skeleton::atom(atoms.size() - 1);
}

void check_probability(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw ValidationError("atom probability " + std::to_string(p) + " outside [0, 1]");
  }
}

} // namespace

FormulaPtr distribute_temporal(const FormulaPtr& phi) {
  using Op = Formula::Op;
  switch (phi->op()) {
    case Op::True:
    case Op::False:
    case Op::Atom: return phi;
    case Op::Not: return Formula::negation(distribute_temporal(phi->child()));
    case Op::And:
      return Formula::conjunction(distribute_temporal(phi->child(0)),
                                  distribute_temporal(phi->child(1)));
    case Op::Or:
      return Formula::disjunction(distribute_temporal(phi->child(0)),
                                  distribute_temporal(phi->child(1)));
    case Op::Until:
      return Formula::until(distribute_temporal(phi->child(0)), phi->bounds(),
                            distribute_temporal(phi->child(1)));
    case Op::Globally: return push_globally(phi->bounds(), distribute_temporal(phi->child()));
    case Op::Eventually: return push_eventually(phi->bounds(), distribute_temporal(phi->child()));
  }
  return phi;
}

bool is_basic(const Formula& phi) {
  using Op = Formula::Op;
  switch (phi.op()) {
    case Op::Atom:
    case Op::Until: return true;
    case Op::Globally: return phi.child()->op() != Op::And;
    case Op::Eventually: return phi.child()->op() != Op::Or;
    default: return false;
  }
}

Decomposition decompose(const FormulaPtr& phi) {
  Decomposition d;
  d.skeleton = extract(distribute_temporal(phi), d.atoms);
  return d;
}

FormulaPtr substitute(const Skeleton& skeleton, std::span<const FormulaPtr> atoms) {
  switch (skeleton.kind()) {
    case Skeleton::Kind::Constant: return skeleton.value() ? Formula::make_true() : Formula::make_false();
    case Skeleton::Kind::Atom:
      if (skeleton.index() >= atoms.size()) throw ValidationError("skeleton atom index out of range");
      return atoms[skeleton.index()];
    case Skeleton::Kind::Not: return Formula::negation(substitute(*skeleton.lhs(), atoms));
    case Skeleton::Kind::And:
      return Formula::conjunction(substitute(*skeleton.lhs(), atoms), substitute(*skeleton.rhs(), atoms));
    case Skeleton::Kind::Or:
      return Formula::disjunction(substitute(*skeleton.lhs(), atoms), substitute(*skeleton.rhs(), atoms));
  }
  return nullptr;
}

double pas(const Skeleton& skeleton, std::span<const double> p) {
  switch (skeleton.kind()) {
    case Skeleton::Kind::Constant: return skeleton.value() ? 1.0 : 0.0;
    case Skeleton::Kind::Atom: {
      if (skeleton.index() >= p.size()) throw ValidationError("missing probability for atom a" +
                                                              std::to_string(skeleton.index()));
      check_probability(p[skeleton.index()]);
      return p[skeleton.index()];
    }
    case Skeleton::Kind::Not: return 1.0 - pas(*skeleton.lhs(), p);
    case Skeleton::Kind::And: return pas(*skeleton.lhs(), p) * pas(*skeleton.rhs(), p);
    case Skeleton::Kind::Or: {
      const double a = pas(*skeleton.lhs(), p);
      const double b = pas(*skeleton.rhs(), p);
      return a + b - a * b;
    }
  }
  return 0.0;
}

bool evaluate(const Skeleton& skeleton, const std::vector<bool>& v) {
  switch (skeleton.kind()) {
    case Skeleton::Kind::Constant: return skeleton.value();
    case Skeleton::Kind::Atom: return v.at(skeleton.index());
    case Skeleton::Kind::Not: return !evaluate(*skeleton.lhs(), v);
    case Skeleton::Kind::And: return evaluate(*skeleton.lhs(), v) && evaluate(*skeleton.rhs(), v);
    case Skeleton::Kind::Or: return evaluate(*skeleton.lhs(), v) || evaluate(*skeleton.rhs(), v);
  }
  return false;
}

double compose_robustness(const Skeleton& skeleton, std::span<const double> r) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (skeleton.kind()) {
    case Skeleton::Kind::Constant: return skeleton.value() ? inf : -inf;
    case Skeleton::Kind::Atom: return r[skeleton.index()];
    case Skeleton::Kind::Not: return -compose_robustness(*skeleton.lhs(), r);
    case Skeleton::Kind::And:
      return std::min(compose_robustness(*skeleton.lhs(), r), compose_robustness(*skeleton.rhs(), r));
    case Skeleton::Kind::Or:
      return std::max(compose_robustness(*skeleton.lhs(), r), compose_robustness(*skeleton.rhs(), r));
  }
  return 0.0;
}

} // namespace stlgp
