#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracle.hpp"
#include "synthetic.hpp"
#include "trustcf/errors.hpp"
#include "trustcf/prediction.hpp"

using namespace trustcf;

namespace {

const UserId q = user_id(0);
const UserId a = user_id(1);
const UserId b = user_id(2);
const UserId c = user_id(3);
const UserId d = user_id(4);
const ItemId t = item_id(9);

RatingStore make_store(std::vector<Rating> ratings) { return RatingStore(RatingDomain::epinions(), ratings); }

bool same(const Prediction& x, const Prediction& y, double tol = 1e-12) {
  if (x.defined() != y.defined()) return false;
  return !x.defined() || std::abs(*x.value - *y.value) <= tol;
}

bool same(const Prediction& x, const std::optional<double>& y, double tol = 1e-12) {
  if (x.defined() != y.has_value()) return false;
  return !y || std::abs(*x.value - *y) <= tol;
}

std::vector<UserId> members(std::span<const UserId> xs) { return {xs.begin(), xs.end()}; }

}  // namespace

TEST_CASE("baseline examples") {
  SUBCASE("single scorer") {
    // sim(q, a) = 1 - 2/4
    const auto store = make_store({{q, item_id(0), 1}, {a, item_id(0), 3}, {a, t, 4}});
    CHECK(*predict_baseline(store, q, t).value == 4.0);
  }
  SUBCASE("equal weights") {
    const auto store =
        make_store({{q, item_id(0), 3}, {a, item_id(0), 3}, {a, t, 2}, {b, item_id(0), 3}, {b, t, 4}});
    CHECK(*predict_baseline(store, q, t).value == 3.0);
  }
  SUBCASE("unequal weights") {
    // sims 0.75 and 0.25
    const auto store =
        make_store({{q, item_id(0), 2}, {a, item_id(0), 3}, {a, t, 5}, {b, item_id(0), 5}, {b, t, 1}});
    CHECK(*predict_baseline(store, q, t).value == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("unknown item") {
    const auto store = make_store({{q, item_id(0), 2}, {a, item_id(0), 3}});
    CHECK_FALSE(predict_baseline(store, q, item_id(500)).defined());
  }
  SUBCASE("no similar scorer") {
    const auto store = make_store({{q, item_id(0), 1}, {a, item_id(0), 5}, {a, t, 3}, {b, t, 2}});
    CHECK_FALSE(predict_baseline(store, q, t).defined());
  }
}

TEST_CASE("query user is never its own scorer") {
  const auto store = make_store({{q, item_id(0), 2}, {q, t, 1}, {a, item_id(0), 2}, {a, t, 5}});
  const TrustGraph graph(std::vector<std::pair<UserId, UserId>>{});
  CHECK(*predict_baseline(store, q, t).value == 5.0);
  CHECK(*predict_two_level(store, graph, q, t, {1, 1, 1}).value == 5.0);
}

TEST_CASE("pure trust prediction covers a user with no overlap") {
  // q shares nothing with the scorer a, but q's trustee b agrees with a.
  const auto store = make_store({{q, item_id(5), 3}, {a, item_id(0), 4}, {a, t, 2}, {b, item_id(0), 4}});
  const std::vector<std::pair<UserId, UserId>> edges{{q, b}};
  const TrustGraph graph(edges);
  CHECK_FALSE(predict_baseline(store, q, t).defined());
  const auto one = predict_one_level(store, graph, q, t, 0.0, 1.0);
  REQUIRE(one.defined());
  CHECK(*one.value == 2.0);

  const std::vector<UserId> self{q};
  const std::vector<WeightedGroup> clusters{{self, 0.0}, {direct_trustees(graph, q), 1.0}};
  CHECK(same(predict_clusters(store, q, t, clusters), one));
}

TEST_CASE("all similarity terms undefined gives unpredictable") {
  const auto store = make_store({{q, item_id(0), 3}, {a, item_id(1), 4}, {a, t, 2}, {b, item_id(2), 4}});
  const std::vector<std::pair<UserId, UserId>> edges{{q, b}, {b, c}};
  const TrustGraph graph(edges);
  const auto p = predict_two_level(store, graph, q, t, {1, 1, 1});
  CHECK_FALSE(p.defined());
  CHECK(p.denominator == 0.0);
}

TEST_CASE("two-level hand instance with a trust chain") {
  // q -> a -> c, q -> b; d is the only other scorer.
  const auto store = make_store({{q, item_id(0), 5}, {q, item_id(1), 2}, {a, item_id(0), 4}, {a, item_id(2), 1},
                                 {b, item_id(1), 1}, {b, t, 3},          {c, item_id(2), 2}, {c, t, 5},
                                 {d, item_id(0), 5}, {d, item_id(1), 3}, {d, t, 4}});
  const std::vector<std::pair<UserId, UserId>> edges{{q, a}, {q, b}, {a, c}};
  testing::World world;
  world.n_users = 5;
  world.n_items = 10;
  world.ratings = store.ratings();
  world.edges = edges;
  const auto dense = testing::oracle::densify(world);
  const TrustGraph graph(edges);
  for (const WeightVector w : {WeightVector{0.5, 0.5, 0.0}, WeightVector{0.2, 0.7, 0.4}, WeightVector{1, 0, 1}}) {
    const auto p = predict_two_level(store, graph, q, t, w);
    const auto expected = testing::oracle::predict_two_level(dense, 0, 9, w.w0, w.w1, w.w2);
    REQUIRE(expected);
    CHECK(same(p, expected));
  }
}

TEST_CASE("predictors agree with the naive evaluator on random instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const auto world = testing::random_world(seed, {.max_users = 8, .max_items = 6, .rating_density = 0.5});
    const auto dense = testing::oracle::densify(world);
    const RatingStore store = world.store();
    const TrustGraph graph = world.graph();
    const WeightVector w{weight(rng), weight(rng), weight(rng)};
    for (std::size_t qi = 0; qi < world.n_users; ++qi) {
      const UserId query = user_id(qi);
      for (std::size_t ti = 0; ti < world.n_items; ++ti) {
        const ItemId item = item_id(ti);
        const auto base = predict_baseline(store, query, item);
        CHECK(same(base, testing::oracle::predict(dense, qi, ti, {{{qi}, 1.0}})));

        const auto one = predict_one_level(store, graph, query, item, w.w0, w.w1);
        CHECK(same(one, testing::oracle::predict_two_level(dense, qi, ti, w.w0, w.w1, 0.0)));

        const auto two = predict_two_level(store, graph, query, item, w);
        CHECK(same(two, testing::oracle::predict_two_level(dense, qi, ti, w.w0, w.w1, w.w2)));

        const std::vector<UserId> self{query};
        const auto direct = direct_trustees(graph, query);
        const auto indirect = indirect_trustees(graph, query);
        const std::vector<WeightedGroup> clusters{{self, w.w0}, {direct, w.w1}, {indirect, w.w2}};
        CHECK(same(predict_clusters(store, query, item, clusters), two));

        const std::vector<WeightedGroup> only_self{{self, 1.0}};
        CHECK(same(predict_clusters(store, query, item, only_self), base));
      }
    }
  }
}

TEST_CASE("degeneracy chain") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> weight(0.0, 1.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto world = testing::random_world(seed, {.max_users = 10, .max_items = 8});
    const RatingStore store = world.store();
    const TrustGraph graph = world.graph();
    const double w0 = weight(rng);
    const double w1 = weight(rng);
    for (std::size_t qi = 0; qi < world.n_users; ++qi) {
      for (std::size_t ti = 0; ti < world.n_items; ++ti) {
        const UserId query = user_id(qi);
        const ItemId item = item_id(ti);
        CHECK(same(predict_two_level(store, graph, query, item, {w0, w1, 0.0}),
                   predict_one_level(store, graph, query, item, w0, w1)));
        CHECK(same(predict_one_level(store, graph, query, item, w0, 0.0), predict_baseline(store, query, item)));
      }
    }
  }
}

TEST_CASE("scale invariance, bounds and coverage monotonicity") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> weight(0.01, 1.0);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto world = testing::random_world(seed, {.max_users = 12, .max_items = 8, .rating_density = 0.4});
    const RatingStore store = world.store();
    const TrustGraph graph = world.graph();
    TermBuilder builder(store, graph);
    const WeightVector w{weight(rng), weight(rng), weight(rng)};
    const double k = scale(rng);
    const WeightVector scaled{k * w.w0, k * w.w1, k * w.w2};
    for (std::size_t qi = 0; qi < world.n_users; ++qi) {
      for (std::size_t ti = 0; ti < world.n_items; ++ti) {
        const auto terms = builder.terms(user_id(qi), item_id(ti));
        const auto p = combine(terms, w);
        const auto ps = combine(terms, scaled);
        CHECK(p.defined() == ps.defined());
        if (p.defined()) CHECK(std::abs(*p.value - *ps.value) <= 1e-12 * std::max(1.0, std::abs(*p.value)));

        if (p.defined()) {
          double lo = 1e9;
          double hi = -1e9;
          for (const auto& s : store.scorers_of(item_id(ti))) {
            if (s.user == user_id(qi)) continue;
            lo = std::min(lo, s.value);
            hi = std::max(hi, s.value);
          }
          CHECK(*p.value >= lo - 1e-12);
          CHECK(*p.value <= hi + 1e-12);
        }

        if (combine(terms, {w.w0, 0.0, 0.0}).defined()) CHECK(p.defined());
      }
    }
  }
}

TEST_CASE("negative weights can leave the rating range and clip restores it") {
  const std::vector<ScorerTerms> terms{{5.0, {1.0, 0.0, 0.0}}, {1.0, {0.0, 1.0, 0.0}}};
  const auto raw = combine(terms, {1.0, -0.5, 0.0});
  REQUIRE(raw.defined());
  CHECK(*raw.value == 9.0);
  CHECK(*finalize(raw, RatingDomain::epinions(), false).value == 9.0);
  CHECK(*finalize(raw, RatingDomain::epinions(), true).value == 5.0);

  const auto cancelled = combine(terms, {1.0, -1.0, 0.0});
  CHECK_FALSE(cancelled.defined());
  CHECK_FALSE(combine(std::vector<ScorerTerms>{}, {1, 1, 1}).defined());
}

TEST_CASE("gradient special cases") {
  SUBCASE("single scorer") {
    const std::vector<ScorerTerms> terms{{3.5, {0.4, 0.7, 0.2}}};
    const auto g = prediction_gradient(terms, {0.3, 0.5, 0.9});
    for (double x : g.d) CHECK(std::abs(x) <= 1e-15);
  }
  SUBCASE("indirect term absent everywhere") {
    const std::vector<ScorerTerms> terms{{1.0, {0.4, 0.7, 0.0}}, {4.0, {0.9, 0.1, 0.0}}};
    const auto g = prediction_gradient(terms, {0.3, 0.5, 0.9});
    CHECK(g[Param::w2] == 0.0);
    CHECK(g[Param::w0] != 0.0);
  }
  SUBCASE("undefined prediction") {
    CHECK_THROWS_AS(prediction_gradient(std::vector<ScorerTerms>{}, {1, 1, 1}), ComputationError);
  }
}

TEST_CASE("gradient matches central finite differences") {
  // Relative error against the larger magnitude; near-zero partials fall back
  // to an absolute floor set by the finite-difference rounding error.
  const double h = 1e-6;
  const double rel = 1e-6;
  const double floor = 1e-8;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> weight(0.05, 1.0);
  std::size_t checked_instances = 0;
  for (std::uint64_t seed = 0; checked_instances < 150 && seed < 5000; ++seed) {
    const auto world = testing::random_world(seed, {.max_users = 6, .max_items = 6, .rating_density = 0.6, .trust_density = 0.4});
    const RatingStore store = world.store();
    const TrustGraph graph = world.graph();
    const WeightVector w{weight(rng), weight(rng), weight(rng)};
    bool any = false;
    for (std::size_t qi = 0; qi < world.n_users; ++qi) {
      for (std::size_t ti = 0; ti < world.n_items; ++ti) {
        const auto query = user_id(qi);
        const auto item = item_id(ti);
        if (!predict_two_level(store, graph, query, item, w).defined()) continue;
        any = true;
        const auto g = prediction_gradient(store, graph, query, item, w);
        for (Param p : {Param::w0, Param::w1, Param::w2}) {
          WeightVector up = w;
          WeightVector down = w;
          up[p] += h;
          down[p] -= h;
          const double numeric = (*predict_two_level(store, graph, query, item, up).value -
                                  *predict_two_level(store, graph, query, item, down).value) /
                                 (2 * h);
          const double err = std::abs(g[p] - numeric);
          CHECK(err <= std::max(floor, rel * std::max(std::abs(g[p]), std::abs(numeric))));
        }
      }
    }
    if (any) ++checked_instances;
  }
  CHECK(checked_instances >= 100);
}

TEST_CASE("excluding direct trustees from the indirect set") {
  // q -> a, q -> b, a -> b: b is both direct and indirect.
  const auto store = make_store({{q, item_id(0), 4}, {a, item_id(0), 4}, {b, item_id(0), 2}, {c, item_id(0), 3},
                                 {c, t, 5}});
  const std::vector<std::pair<UserId, UserId>> edges{{q, a}, {q, b}, {a, b}};
  const TrustGraph graph(edges);
  TermBuilder keep(store, graph);
  TermBuilder drop(store, graph, {.exclude_direct_from_indirect = true});
  const auto kept = keep.terms(q, t);
  const auto dropped = drop.terms(q, t);
  REQUIRE(kept.size() == 1);
  REQUIRE(dropped.size() == 1);
  // Sim(c, {b}) = 0.75
  CHECK(kept[0].sim[2] == 0.75);
  CHECK(dropped[0].sim[2] == 0.0);
  CHECK(members(indirect_trustees(graph, q)) == std::vector<UserId>{b});
}

TEST_CASE("TermTable is independent of the thread count") {
  const auto world = testing::taste_world(3, {.n_users = 120, .n_items = 80});
  const RatingStore store = world.store();
  const TrustGraph graph = world.graph();
  const auto one = TermTable::build(store, graph, store.ratings(), {}, 1);
  const auto many = TermTable::build(store, graph, store.ratings(), {}, 7);
  REQUIRE(one.size() == many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    const auto x = one.terms(i);
    const auto y = many.terms(i);
    REQUIRE(x.size() == y.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      CHECK(x[k].rating == y[k].rating);
      CHECK(x[k].sim == y[k].sim);
    }
  }
}
