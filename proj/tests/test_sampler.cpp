#include "doctest.h"

#include "stlgp/errors.hpp"
#include "stlgp/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

using namespace stlgp;

namespace {

double bump(double x, double m, double s) { return std::exp(-0.5 * (x - m) * (x - m) / (s * s)); }

double second_curve(double x) { return -0.2 + 0.9 * (1.0 - bump(x, 0.7, 0.035) - bump(x, 0.85, 0.035)); }

DomainEstimationConfig small_config(std::uint64_t seed, int max_iter = 40) {
  DomainEstimationConfig c;
  c.seed = seed;
  c.max_iter = max_iter;
  c.m = 200;
  c.gp.restarts = 2;
  c.gp.evaluations = 60;
  return c;
}

} // namespace

TEST_CASE("lhs stratification") {
  Rng rng(1);
  const auto four = lhs(4, 1, rng);
  std::set<int> strata;
  for (const auto& p : four) strata.insert(static_cast<int>(std::floor(p[0] * 4)));
  CHECK(strata.size() == 4);

  for (int trial = 0; trial < 50; ++trial) {
    const auto pts = lhs(10, 3, rng);
    for (std::size_t d = 0; d < 3; ++d) {
      std::set<int> s;
      for (const auto& p : pts) {
        REQUIRE(p[d] >= 0.0);
        REQUIRE(p[d] < 1.0);
        s.insert(static_cast<int>(std::floor(p[d] * 10)));
      }
      REQUIRE(s.size() == 10);
    }
  }
  CHECK_THROWS_AS(lhs(0, 2, rng), ValidationError);
}

TEST_CASE("lhs chi-square uniformity") {
  Rng rng(2);
  // m = 8 does not align with the 10 bins, so stratification alone cannot pass the test
  for (std::size_t d = 0; d < 2; ++d) {
    std::vector<int> bins(10, 0);
    for (int call = 0; call < 125; ++call) {
      for (const auto& p : lhs(8, 2, rng)) ++bins[static_cast<std::size_t>(p[d] * 10)];
    }
    double chi2 = 0.0;
    for (int b : bins) chi2 += (b - 100.0) * (b - 100.0) / 100.0;
    CHECK(chi2 < 21.666);  // 99th percentile, 9 degrees of freedom
  }
}

TEST_CASE("distance_to_interval") {
  CHECK(distance_to_interval(-1.0, Interval::below(0.0)) == 0.0);
  CHECK(distance_to_interval(0.7, Interval::below(0.0)) == 0.7);
  CHECK(distance_to_interval(5.0, Interval::open(2.0, 3.0)) == 2.0);
  CHECK(distance_to_interval(2.5, Interval::open(2.0, 3.0)) == 0.0);
}

TEST_CASE("categorical_sample") {
  Rng rng(3);
  const double first[] = {1.0, 0.0, 0.0};
  for (int i = 0; i < 100; ++i) CHECK(categorical_sample(first, rng) == 0);
  const double zeros[] = {0.0, 0.0};
  int ones = 0;
  for (int i = 0; i < 2000; ++i) ones += static_cast<int>(categorical_sample(zeros, rng));
  CHECK(ones > 850);
  CHECK(ones < 1150);
  const double w[] = {1.0, 3.0};
  int hits = 0;
  for (int i = 0; i < 10000; ++i) hits += static_cast<int>(categorical_sample(w, rng));
  CHECK(hits >= 7200);
  CHECK(hits <= 7800);
  const double bad[] = {1.0, -0.1};
  CHECK_THROWS_AS(categorical_sample(bad, rng), ValidationError);
}

TEST_CASE("half-space target is found at once") {
  int found = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto r = domain_estimation([](const Point& x) { return x[0] - 0.5; }, Interval::below(0.0), 1,
                                     small_config(seed));
    if (!r.members.empty() && r.total_evaluations() <= 5) ++found;
  }
  CHECK(found >= 95);
}

TEST_CASE("exhaustion without a root") {
  auto cfg = small_config(7, 30);
  const auto r = domain_estimation([](const Point& x) { return x[0] + 1.0; }, Interval::below(0.0), 1, cfg);
  CHECK(r.members.empty());
  CHECK(r.evaluations == 30);
  CHECK(r.total_evaluations() == static_cast<int>(r.knowledge.size()));
  double best = 1e300;
  for (const auto& k : r.knowledge) best = std::min(best, k.values[0]);
  CHECK(r.d == best);
  CHECK(r.d > 0.0);
}

TEST_CASE("single narrow dip") {
  double total = 0.0;
  int runs = 0;
  for (std::uint64_t seed = 100; seed < 150; ++seed) {
    const auto r = domain_estimation([](const Point& x) { return second_curve(x[0]); }, Interval::below(0.0), 1,
                                     small_config(seed, 100));
    REQUIRE(!r.members.empty());
    total += r.total_evaluations();
    ++runs;
  }
  MESSAGE("mean evaluations " << total / runs);
  CHECK(total / runs <= 35.0);
}

TEST_CASE("members are certified by the true function and d is monotone") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto cfg = small_config(seed, 25);
    cfg.ce = 3;
    auto f = [](const Point& x) { return std::sin(6 * x[0]) * x[1] - 0.3; };
    const auto r = domain_estimation(f, Interval::below(0.0), 2, cfg);
    for (const auto& b : r.members) CHECK(f(b) < 0.0);
    CHECK(static_cast<int>(r.members.size()) <= 3 + r.initial);
    double d = 1e300;
    for (const auto& k : r.knowledge) d = std::min(d, std::max(0.0, k.values[0]));
    CHECK(r.d == (r.members.empty() ? d : 0.0));
    CHECK(r.evaluations <= cfg.max_iter);
  }
}

TEST_CASE("same seed, same evaluation sequence") {
  auto f = [](const Point& x) { return second_curve(x[0]) + x[1] * 0.1; };
  const auto a = domain_estimation(f, Interval::below(0.0), 2, small_config(9));
  const auto b = domain_estimation(f, Interval::below(0.0), 2, small_config(9));
  REQUIRE(a.knowledge.size() == b.knowledge.size());
  for (std::size_t i = 0; i < a.knowledge.size(); ++i) CHECK(a.knowledge[i].x == b.knowledge[i].x);
}

TEST_CASE("single-atom skeleton behaves like the plain sampler") {
  auto f = [](const Point& x) { return 0.4 - x[0]; };
  const auto skel = Skeleton::atom(0);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto plain = domain_estimation(f, Interval::above(0.0), 1, small_config(seed));
    const auto viapas = pas_domain_estimation(std::vector<Objective>{f}, *skel, 1, small_config(seed));
    REQUIRE(plain.knowledge.size() == viapas.knowledge.size());
    for (std::size_t i = 0; i < plain.knowledge.size(); ++i) CHECK(plain.knowledge[i].x == viapas.knowledge[i].x);
  }
}

TEST_CASE("robustly true formula exhausts the budget") {
  const auto skel = Skeleton::negation(Skeleton::atom(0));
  const auto r = pas_domain_estimation(std::vector<Objective>{[](const Point& x) { return x[0] + 1.0; }}, *skel, 1,
                                       small_config(4, 20));
  CHECK(r.members.empty());
  CHECK(r.evaluations == 20);
  CHECK(r.d > 0.0);
}

TEST_CASE("pas membership uses the composed robustness") {
  // target a0 and a1, i.e. x0 > 0.6 with x1 < 0.5
  const auto skel = Skeleton::conjunction(Skeleton::atom(0), Skeleton::atom(1));
  auto cfg = small_config(11, 40);
  const auto r = pas_domain_estimation(
      [](const Point& x) { return std::vector<double>{x[0] - 0.6, 0.5 - x[1]}; }, *skel, 2, cfg);
  REQUIRE(!r.members.empty());
  for (const auto& b : r.members) {
    CHECK(b[0] > 0.6);
    CHECK(b[1] < 0.5);
  }
}

TEST_CASE("conditional variant") {
  auto requirement = [](const Point& x) { return x[0] - 0.5; };
  int found = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto r = conditional_domain_estimation([](const Point&) { return 5.0; }, requirement, 1,
                                                 small_config(seed));
    if (!r.members.empty()) ++found;
    for (const auto& b : r.members) CHECK(requirement(b) < 0.0);
  }
  CHECK(found == 10);

  // the antecedent never holds, so the implication is never violated
  const auto none = conditional_domain_estimation([](const Point&) { return -1.0; },
                                                  [](const Point& x) { return 1.0 + x[0]; }, 1, small_config(3, 15));
  CHECK(none.members.empty());
  CHECK(none.evaluations == 15);
}

TEST_CASE("conditional variant stays where the antecedent holds") {
  // the requirement is closest to failing at x = 1, where the antecedent is false
  auto antecedent = [](const Point& x) { return 0.3 - x[0]; };
  auto requirement = [](const Point& x) { return 2.0 - x[0]; };
  int inside = 0, sampled = 0, plain_inside = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = conditional_domain_estimation(antecedent, requirement, 1, small_config(seed, 30));
    const auto p = domain_estimation(requirement, Interval::below(0.0), 1, small_config(seed, 30));
    for (std::size_t i = static_cast<std::size_t>(r.initial); i < r.knowledge.size(); ++i) {
      ++sampled;
      inside += r.knowledge[i].x[0] < 0.3;
      plain_inside += p.knowledge[i].x[0] < 0.3;
    }
  }
  CHECK(sampled == 150);
  CHECK(inside >= 0.8 * sampled);
  CHECK(inside > plain_inside);
}

TEST_CASE("evaluation errors carry the point") {
  try {
    domain_estimation([](const Point& x) -> double {
      if (x[0] >= 0.0) throw SimulationError("boom");
      return 0.0;
    }, Interval::below(0.0), 1, small_config(1));
    FAIL("no error");
  } catch (const EvaluationError& e) {
    CHECK(e.point().size() == 1);
    CHECK(std::string(e.what()).find("boom") != std::string::npos);
  }
}
