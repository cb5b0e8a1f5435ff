#include "doctest.h"
#include "stl_oracle.hpp"

#include "stlgp/decomposition.hpp"
#include "stlgp/errors.hpp"
#include "stlgp/monitor.hpp"
#include "stlgp/parser.hpp"
#include "stlgp/rng.hpp"
#include "stlgp/trace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

using namespace stlgp;
using namespace stlgp::testing;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Trace constant_trace(double value, std::string name = "x") {
  return scalar_trace({0.0, 0.5, 1.0}, {{value}, {value}, {value}}, {std::move(name)});
}

const char* kToy = "not (G[0,0.51](x > 0 and x < 0.2) and G[0.55,1](x > 0.8 and x < 1))";

} // namespace

TEST_CASE("parse examples") {
  auto f = parse("G[0,30](v <= 160 and w <= 4500)");
  REQUIRE(f->op() == Formula::Op::Globally);
  CHECK(f->bounds().lo == 0.0);
  CHECK(f->bounds().hi == 30.0);
  const auto& conj = f->child();
  REQUIRE(conj->op() == Formula::Op::And);
  CHECK(conj->child(0)->normalized()->to_string() == "(160 - v)");
  CHECK(conj->child(1)->normalized()->to_string() == "(4500 - w)");

  auto toy = parse(kToy);
  REQUIRE(toy->op() == Formula::Op::Not);
  REQUIRE(toy->child()->op() == Formula::Op::And);
  CHECK(toy->child()->child(0)->op() == Formula::Op::Globally);
  CHECK(toy->child()->child(1)->bounds().lo == 0.55);

  CHECK(parse("true")->op() == Formula::Op::True);
  CHECK(parse("false")->op() == Formula::Op::False);
}

TEST_CASE("parse precedence") {
  auto f = parse("not a > 0 and b > 0 or c > 0");
  REQUIRE(f->op() == Formula::Op::Or);
  REQUIRE(f->child(0)->op() == Formula::Op::And);
  CHECK(f->child(0)->child(0)->op() == Formula::Op::Not);

  auto g = parse("G[0,1] a > 0 and b > 0");
  REQUIRE(g->op() == Formula::Op::And);
  CHECK(g->child(0)->op() == Formula::Op::Globally);

  auto imp = parse("a > 0 -> b > 0 -> c > 0");
  REQUIRE(imp->op() == Formula::Op::Or);
  CHECK(imp->child(0)->op() == Formula::Op::Not);
  CHECK(imp->child(1)->op() == Formula::Op::Or);

  auto u = parse("a > 0 U[0,1] b > 0 and c > 0");
  REQUIRE(u->op() == Formula::Op::And);
  CHECK(u->child(0)->op() == Formula::Op::Until);

  auto arith = parse("2 * x + 1 > (y - 3) / 2");
  CHECK(arith->op() == Formula::Op::Atom);
  CHECK(arith->normalized()->to_string() == "(((2 * x) + 1) - ((y - 3) / 2))");
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse("G[1,0](x > 0)"), ParseError);
  CHECK_THROWS_AS(parse("G[1,1](x > 0)"), ParseError);
  CHECK_THROWS_AS(parse("G[a,1](x > 0)"), ParseError);
  CHECK_THROWS_AS(parse("x >"), ParseError);
  CHECK_THROWS_AS(parse("(x > 0"), ParseError);
  CHECK_THROWS_AS(parse("x > 0 y"), ParseError);
  try {
    parse("x > 0 and\n  G[2,1] y > 0");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() >= 3);
  }
}

TEST_CASE("to_string round trips") {
  Rng rng(11);
  for (int i = 0; i < 300; ++i) {
    auto f = random_formula(rng, 4);
    auto back = parse(f->to_string());
    REQUIRE(structurally_equal(*f, *back));
  }
  auto toy = parse(kToy);
  CHECK(structurally_equal(*toy, *parse(toy->to_string())));
}

TEST_CASE("robustness examples") {
  CHECK(robustness(*parse("x >= 0"), constant_trace(2.0)) == 2.0);
  CHECK(robustness(*parse("G[0,1](x <= 160)"), constant_trace(150.0)) == 10.0);
  CHECK(robustness(*parse("true"), constant_trace(0.0)) == kInf);
  CHECK(robustness(*parse("false"), constant_trace(0.0)) == -kInf);
}

TEST_CASE("toy requirement on a constant input") {
  auto toy = parse(kToy);
  const TimeGrid grid = TimeGrid::uniform(1.0, 0.01);
  const Signal x = Signal::constant(grid, {0.1});
  const Trace trace(x, x, {"x"}, {"u"});
  const double r = robustness(*toy, trace);
  // First conjunct holds (margin 0.1), second fails by 0.7; negated min is 0.7.
  CHECK(r == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(r == Oracle{trace}.rho(*toy, 0).value());
}

TEST_CASE("horizon errors") {
  const Trace t = constant_trace(1.0);
  CHECK_THROWS_AS(robustness(*parse("G[0,2](x > 0)"), t), HorizonError);
  CHECK_THROWS_AS(robustness(*parse("F[0,0.6] G[0,0.6](x > 0)"), t), HorizonError);
  CHECK_THROWS_AS(robustness(*parse("F[0.1,0.2](x > 0)"), t), HorizonError);
  CHECK_THROWS_AS(robustness(*parse("z > 0"), t), ValidationError);
  CHECK_THROWS_AS(robustness(*parse("x > 0"), t, 0.3), DomainError);
  try {
    robustness(*parse("x > 0 and G[0,2](x > 0)"), t);
  } catch (const HorizonError& e) {
    CHECK(std::string(e.what()).find("G[0,2]") != std::string::npos);
  }
  const auto sig = robustness_signal(*parse("G[0,0.5](x > 0)"), t);
  CHECK(sig[0] == 1.0);
  CHECK(sig[1] == 1.0);
  CHECK(std::isnan(sig[2]));
}

TEST_CASE("until and eventually agree on single-point windows") {
  Rng rng(5);
  for (int i = 0; i < 50; ++i) {
    const Trace t = random_pwc_trace(rng);
    auto u = parse("true U[0,0.25] x > 0");
    auto f = parse("F[0,0.25] x > 0");
    CHECK(robustness(*u, t) == robustness(*f, t));
  }
}

TEST_CASE("soundness against brute force") {
  Rng rng(2024);
  int checked = 0;
  for (int trial = 0; checked < 500 && trial < 20000; ++trial) {
    const auto f = random_formula(rng, 4);
    const Trace t = random_pwc_trace(rng);
    const Oracle oracle{t};
    const auto expected = oracle.rho(*f, 0);
    if (!expected) {
      CHECK_THROWS_AS(robustness(*f, t), HorizonError);
      continue;
    }
    ++checked;
    const double r = robustness(*f, t);
    REQUIRE(r == *expected);
    REQUIRE((r > 0) == oracle.holds(*f, 0));
    REQUIRE(robustness(*Formula::negation(f), t) == -r);
    const auto other = random_formula(rng, 2);
    if (auto o = oracle.rho(*other, 0)) {
      REQUIRE(robustness(*Formula::disjunction(f, other), t) == std::max(r, *o));
    }
    const auto sig = robustness_signal(*f, t);
    for (std::size_t i = 0; i < sig.size(); ++i) {
      const auto e = oracle.rho(*f, i);
      if (e) REQUIRE(sig[i] == *e);
      else REQUIRE(std::isnan(sig[i]));
    }
  }
  CHECK(checked == 500);
}

TEST_CASE("decompose examples") {
  auto d = decompose(parse("G[0,30](v <= 160 and w <= 4500)"));
  REQUIRE(d.atoms.size() == 2);
  CHECK(structurally_equal(*d.atoms[0], *parse("G[0,30](v <= 160)")));
  CHECK(structurally_equal(*d.atoms[1], *parse("G[0,30](w <= 4500)")));
  CHECK(d.skeleton->to_string() == "(a0 and a1)");

  auto single = decompose(parse("x >= 0"));
  CHECK(single.atoms.size() == 1);
  CHECK(single.skeleton->to_string() == "a0");

  auto neg = decompose(parse("not (G[0,1](x > 0) and F[0,1](x < 1))"));
  REQUIRE(neg.atoms.size() == 2);
  CHECK(neg.skeleton->to_string() == "not (a0 and a1)");

  auto toy = decompose(parse(kToy));
  CHECK(toy.atoms.size() == 4);
  CHECK(toy.skeleton->to_string() == "not ((a0 and a1) and (a2 and a3))");

  auto shared = decompose(parse("G[0,1](x > 0) or (G[0,1](x > 0) and y > 1)"));
  CHECK(shared.atoms.size() == 2);

  auto nested = decompose(parse("F[0,1](a > 0 or G[0,1](b > 0 and c > 0))"));
  CHECK(nested.atoms.size() == 2);
  for (const auto& a : nested.atoms) CHECK(is_basic(*a));
}

TEST_CASE("pas examples") {
  const auto a0 = Skeleton::atom(0);
  const auto a1 = Skeleton::atom(1);
  const double p03[] = {0.3};
  CHECK(pas(*a0, p03) == doctest::Approx(0.3));
  const double p[] = {0.9, 0.5};
  CHECK(pas(*Skeleton::negation(Skeleton::conjunction(a0, a1)), p) == doctest::Approx(0.55));
  const double q[] = {0.5, 0.5};
  CHECK(pas(*Skeleton::disjunction(a0, a1), q) == doctest::Approx(0.75));
  const double bad[] = {1.2};
  CHECK_THROWS_AS(pas(*a0, bad), ValidationError);
  const double none[] = {0.2};
  CHECK_THROWS_AS(pas(*a1, none), ValidationError);
}

TEST_CASE("decomposition preserves robustness") {
  Rng rng(99);
  int checked = 0;
  for (int trial = 0; checked < 300 && trial < 10000; ++trial) {
    const auto f = random_formula(rng, 4);
    const Trace t = random_pwc_trace(rng);
    if (!Oracle{t}.rho(*f, 0)) continue;
    ++checked;
    const auto d = decompose(f);
    std::vector<double> r;
    for (const auto& a : d.atoms) {
      REQUIRE(is_basic(*a));
      r.push_back(robustness(*a, t));
    }
    REQUIRE(compose_robustness(*d.skeleton, r) == robustness(*f, t));
    const auto rebuilt = substitute(*d.skeleton, d.atoms);
    REQUIRE(robustness(*rebuilt, t) == robustness(*f, t));
    std::vector<bool> truth;
    for (double v : r) truth.push_back(v > 0);
    REQUIRE(evaluate(*d.skeleton, truth) == Oracle{t}.holds(*f, 0));
  }
  CHECK(checked == 300);
}

TEST_CASE("pas is monotone for positive skeletons with distinct atoms") {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    // (a0 and a1) or a2, (a0 or a1) and (a2 or a3), ...
    std::vector<SkeletonPtr> leaves;
    const std::size_t n = 2 + uniform_index(rng, 4);
    for (std::size_t i = 0; i < n; ++i) leaves.push_back(Skeleton::atom(i));
    while (leaves.size() > 1) {
      auto a = leaves.back();
      leaves.pop_back();
      auto b = leaves.back();
      leaves.pop_back();
      leaves.insert(leaves.begin(), uniform01(rng) < 0.5 ? Skeleton::conjunction(a, b)
                                                         : Skeleton::disjunction(a, b));
    }
    std::vector<double> p(n);
    for (double& v : p) v = uniform01(rng);
    const double base = pas(*leaves[0], p);
    REQUIRE(base >= 0.0);
    REQUIRE(base <= 1.0);
    const std::size_t k = uniform_index(rng, n);
    p[k] = std::min(1.0, p[k] + uniform(rng, 0.0, 0.5));
    REQUIRE(pas(*leaves[0], p) >= base - 1e-15);
  }
}
