#include "trustcf/prediction.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "trustcf/errors.hpp"
#include "trustcf/parallel.hpp"

namespace trustcf {

std::string_view to_string(Param p) {
  switch (p) {
    case Param::w0: return "w0";
    case Param::w1: return "w1";
    case Param::w2: return "w2";
  }
  return "w0";
}

std::optional<Param> parse_param(std::string_view name) {
  if (name == "w0") return Param::w0;
  if (name == "w1") return Param::w1;
  if (name == "w2") return Param::w2;
  return std::nullopt;
}

bool WeightVector::finite() const noexcept { return std::isfinite(w0) && std::isfinite(w1) && std::isfinite(w2); }

namespace {

Prediction from_sums(double f, double g, bool any_scorer) {
  Prediction p;
  p.numerator = f;
  p.denominator = g;
  if (any_scorer && std::abs(g) >= kZeroDenominator) p.value = f / g;
  return p;
}

}  // namespace

Prediction combine(std::span<const ScorerTerms> terms, const WeightVector& w) {
  double f = 0.0;
  double g = 0.0;
  for (const ScorerTerms& s : terms) {
    const double a = w.w0 * s.sim[0] + w.w1 * s.sim[1] + w.w2 * s.sim[2];
    f += a * s.rating;
    g += a;
  }
  return from_sums(f, g, !terms.empty());
}

Gradient prediction_gradient(std::span<const ScorerTerms> terms, const WeightVector& w) {
  const Prediction p = combine(terms, w);
  if (!p.defined()) throw ComputationError("gradient requested for an unpredictable rating");
  // (g * sum S_k r - f * sum S_k) / g^2 written as sum S_k (r - f/g) / g
  const double value = *p.value;
  const double g = p.denominator;
  Gradient out;
  for (const ScorerTerms& s : terms)
    for (std::size_t k = 0; k < 3; ++k) out.d[k] += s.sim[k] * (s.rating - value);
  for (double& x : out.d) x /= g;
  return out;
}

TermBuilder::TermBuilder(const RatingStore& train, const TrustGraph& graph, PredictOptions options)
    : store_(&train), graph_(&graph), options_(options), profile_(train) {}

void TermBuilder::select_query(UserId q) {
  if (query_ == q) return;
  query_ = q;
  direct_ = direct_trustees(*graph_, q);
  indirect_ = indirect_trustees(*graph_, q, {.exclude_query = true, .exclude_direct = options_.exclude_direct_from_indirect});
  cache_.clear();
}

std::size_t TermBuilder::append(UserId q, ItemId t, std::vector<ScorerTerms>& out) {
  select_query(q);
  const std::optional<UserId> no_skip;
  std::size_t added = 0;
  for (const UserRating& scorer : store_->scorers_of(t)) {
    const UserId s = scorer.user;
    if (s == q) continue;
    auto it = cache_.find(s);
    if (it == cache_.end()) {
      profile_.load(s);
      const auto skip = options_.exclude_scorer_from_groups ? std::optional<UserId>(s) : no_skip;
      ScorerTerms terms{0.0, {profile_.similarity(q).value_or(0.0), profile_.group_similarity(direct_, skip).value_or(0.0),
                              profile_.group_similarity(indirect_, skip).value_or(0.0)}};
      it = cache_.emplace(s, terms).first;
    }
    const auto& sim = it->second.sim;
    if (sim[0] == 0.0 && sim[1] == 0.0 && sim[2] == 0.0) continue;
    out.push_back({scorer.value, sim});
    ++added;
  }
  return added;
}

TermTable TermTable::build(const RatingStore& train, const TrustGraph& graph, std::span<const Rating> targets,
                           const PredictOptions& options, std::size_t threads) {
  TermTable table;
  table.targets_.assign(targets.begin(), targets.end());
  const std::size_t n = targets.size();
  threads = std::max<std::size_t>(1, std::min(threads, n));

  std::vector<std::vector<ScorerTerms>> chunks(threads);
  std::vector<std::vector<std::size_t>> counts(threads);
  parallel_blocks(n, threads, [&](std::size_t begin, std::size_t end, std::size_t worker) {
    TermBuilder builder(train, graph, options);
    auto& chunk = chunks[worker];
    auto& count = counts[worker];
    for (std::size_t i = begin; i < end; ++i)
      count.push_back(builder.append(targets[i].user, targets[i].item, chunk));
  });

  table.offsets_.reserve(n + 1);
  table.offsets_.push_back(0);
  std::size_t total = 0;
  for (const auto& chunk : chunks) total += chunk.size();
  table.terms_.reserve(total);
  for (std::size_t w = 0; w < threads; ++w) {
    table.terms_.insert(table.terms_.end(), chunks[w].begin(), chunks[w].end());
    for (std::size_t c : counts[w]) table.offsets_.push_back(table.offsets_.back() + c);
  }
  return table;
}

TermTable TermTable::from_terms(std::span<const Rating> targets, const std::vector<std::vector<ScorerTerms>>& terms) {
  if (targets.size() != terms.size()) throw std::invalid_argument("one term list per target required");
  TermTable table;
  table.targets_.assign(targets.begin(), targets.end());
  table.offsets_.push_back(0);
  for (const auto& list : terms) {
    for (const ScorerTerms& s : list)
      if (s.sim[0] != 0.0 || s.sim[1] != 0.0 || s.sim[2] != 0.0) table.terms_.push_back(s);
    table.offsets_.push_back(table.terms_.size());
  }
  return table;
}

TermTable TermTable::masked(std::array<bool, 3> keep) const {
  TermTable table;
  table.targets_ = targets_;
  table.offsets_.push_back(0);
  for (std::size_t i = 0; i < size(); ++i) {
    for (ScorerTerms s : terms(i)) {
      for (std::size_t k = 0; k < 3; ++k)
        if (!keep[k]) s.sim[k] = 0.0;
      if (s.sim[0] != 0.0 || s.sim[1] != 0.0 || s.sim[2] != 0.0) table.terms_.push_back(s);
    }
    table.offsets_.push_back(table.terms_.size());
  }
  return table;
}

Prediction predict_baseline(const RatingStore& store, UserId q, ItemId t) {
  double f = 0.0;
  double g = 0.0;
  bool any = false;
  DenseProfile profile(store);
  profile.load(q);
  for (const UserRating& scorer : store.scorers_of(t)) {
    if (scorer.user == q) continue;
    const auto sim = profile.similarity(scorer.user);
    if (!sim || *sim == 0.0) continue;
    f += *sim * scorer.value;
    g += *sim;
    any = true;
  }
  return from_sums(f, g, any);
}

Prediction predict_clusters(const RatingStore& store, UserId q, ItemId t, std::span<const WeightedGroup> clusters,
                            const PredictOptions& options) {
  double f = 0.0;
  double g = 0.0;
  bool any = false;
  DenseProfile profile(store);
  for (const UserRating& scorer : store.scorers_of(t)) {
    const UserId s = scorer.user;
    if (s == q) continue;
    profile.load(s);
    const auto skip = options.exclude_scorer_from_groups ? std::optional<UserId>(s) : std::nullopt;
    double a = 0.0;
    bool contributes = false;
    for (const WeightedGroup& group : clusters) {
      if (auto sim = profile.group_similarity(group.members, skip)) {
        a += group.weight * *sim;
        contributes = contributes || *sim != 0.0;
      }
    }
    if (!contributes) continue;
    f += a * scorer.value;
    g += a;
    any = true;
  }
  return finalize(from_sums(f, g, any), store.domain(), options.clip);
}

Prediction predict_one_level(const RatingStore& store, const TrustGraph& graph, UserId q, ItemId t, double w0,
                             double w1, const PredictOptions& options) {
  return predict_two_level(store, graph, q, t, WeightVector{w0, w1, 0.0}, options);
}

Prediction predict_two_level(const RatingStore& store, const TrustGraph& graph, UserId q, ItemId t,
                             const WeightVector& w, const PredictOptions& options) {
  TermBuilder builder(store, graph, options);
  return finalize(combine(builder.terms(q, t), w), store.domain(), options.clip);
}

Gradient prediction_gradient(const RatingStore& store, const TrustGraph& graph, UserId q, ItemId t,
                             const WeightVector& w, const PredictOptions& options) {
  TermBuilder builder(store, graph, options);
  return prediction_gradient(builder.terms(q, t), w);
}

Prediction finalize(Prediction p, const RatingDomain& domain, bool clip) {
  if (clip && p.value) p.value = std::clamp(*p.value, domain.min(), domain.max());
  return p;
}

}  // namespace trustcf
