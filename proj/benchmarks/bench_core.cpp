#include <benchmark/benchmark.h>

#include <algorithm>

#include "synthetic.hpp"
#include "trustcf/prediction.hpp"
#include "trustcf/similarity.hpp"
#include "trustcf/tuning.hpp"

namespace {

using namespace trustcf;

const testing::World& world() {
  static const testing::World w = testing::taste_world(3, {.n_users = 1000, .n_items = 500, .mean_ratings_per_user = 20});
  return w;
}

std::vector<Rating> targets(std::size_t n) {
  const auto& all = world().ratings;
  const std::size_t stride = std::max<std::size_t>(1, all.size() / n);
  std::vector<Rating> out;
  for (std::size_t i = 0; i < all.size() && out.size() < n; i += stride) out.push_back(all[i]);
  return out;
}

void BM_UserSimilarity(benchmark::State& state) {
  const RatingStore store = world().store();
  const std::size_t n = world().n_users;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(user_similarity(store, user_id(i % n), user_id((i * 7 + 1) % n)));
    ++i;
  }
}
BENCHMARK(BM_UserSimilarity);

void BM_DenseProfileSimilarity(benchmark::State& state) {
  const RatingStore store = world().store();
  DenseProfile profile(store);
  profile.load(user_id(0));
  const std::size_t n = world().n_users;
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(profile.similarity(user_id(i % n)));
    ++i;
  }
}
BENCHMARK(BM_DenseProfileSimilarity);

void BM_TermTableBuild(benchmark::State& state) {
  const RatingStore store = world().store();
  const TrustGraph graph = world().graph();
  const auto t = targets(500);
  for (auto _ : state) {
    auto table = TermTable::build(store, graph, t, {}, static_cast<std::size_t>(state.range(0)));
    benchmark::DoNotOptimize(table.size());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(t.size()));
}
BENCHMARK(BM_TermTableBuild)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_ObjectiveScore(benchmark::State& state) {
  const RatingStore store = world().store();
  const TrustGraph graph = world().graph();
  const auto t = targets(2000);
  const ValidationObjective objective(TermTable::build(store, graph, t, {}, 4));
  const WeightVector w{0.5, 0.3, 0.2};
  for (auto _ : state) benchmark::DoNotOptimize(objective.score(w));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(objective.size()));
}
BENCHMARK(BM_ObjectiveScore)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
