#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "trustcf/rating_store.hpp"
#include "trustcf/similarity.hpp"
#include "trustcf/trust_graph.hpp"
#include "trustcf/types.hpp"

namespace trustcf {

// Fusion coefficient index: own similarity, direct trust, indirect trust.
enum class Param : std::size_t { w0 = 0, w1 = 1, w2 = 2 };

constexpr std::size_t index(Param p) noexcept { return static_cast<std::size_t>(p); }
std::string_view to_string(Param p);
std::optional<Param> parse_param(std::string_view name);

struct WeightVector {
  double w0 = 0.0;
  double w1 = 0.0;
  double w2 = 0.0;

  double& operator[](Param p) noexcept { return p == Param::w0 ? w0 : p == Param::w1 ? w1 : w2; }
  double operator[](Param p) const noexcept { return p == Param::w0 ? w0 : p == Param::w1 ? w1 : w2; }

  bool finite() const noexcept;

  friend bool operator==(const WeightVector&, const WeightVector&) = default;
};

// Below this magnitude the fused denominator counts as zero.
inline constexpr double kZeroDenominator = 1e-12;

struct Prediction {
  std::optional<double> value;  // nullopt: unpredictable
  double numerator = 0.0;       // f
  double denominator = 0.0;     // g

  bool defined() const noexcept { return value.has_value(); }
};

// Partial derivatives of the fused prediction with respect to w0, w1, w2.
struct Gradient {
  std::array<double, 3> d{};

  double operator[](Param p) const noexcept { return d[index(p)]; }
};

struct PredictOptions {
  bool exclude_direct_from_indirect = false;
  bool exclude_scorer_from_groups = false;  // drop s from T_q / T'_q when scoring s
  bool clip = false;                        // clamp values to the rating domain
};

// Weight-independent contribution of one scorer s of the target item:
// sim[0] = sim(q, s), sim[1] = Sim(s, T_q), sim[2] = Sim(s, T'_q). Undefined
// similarities are stored as 0, which removes them from both sums.
struct ScorerTerms {
  double rating;
  std::array<double, 3> sim;
};

// Fuses per-scorer terms under the given weights. Scorers whose terms are all
// zero never appear in a term list.
Prediction combine(std::span<const ScorerTerms> terms, const WeightVector& w);

// Analytic partials of combine(terms, w). Throws ComputationError when the
// prediction is undefined.
Gradient prediction_gradient(std::span<const ScorerTerms> terms, const WeightVector& w);

// Computes scorer terms for (q, t) queries against one training store. Keeps a
// dense profile scratch buffer and a per-query-user cache of group
// similarities, so one builder per thread; queries grouped by user are fastest.
class TermBuilder {
 public:
  TermBuilder(const RatingStore& train, const TrustGraph& graph, PredictOptions options = {});

  // Appends the terms for (q, t) to `out`; returns the number appended.
  std::size_t append(UserId q, ItemId t, std::vector<ScorerTerms>& out);

  std::vector<ScorerTerms> terms(UserId q, ItemId t) {
    std::vector<ScorerTerms> out;
    append(q, t, out);
    return out;
  }

  const RatingStore& store() const noexcept { return *store_; }
  const PredictOptions& options() const noexcept { return options_; }

 private:
  void select_query(UserId q);

  const RatingStore* store_;
  const TrustGraph* graph_;
  PredictOptions options_;
  DenseProfile profile_;
  std::optional<UserId> query_;
  std::vector<UserId> direct_;
  std::vector<UserId> indirect_;
  std::unordered_map<UserId, ScorerTerms> cache_;  // scorer -> terms for the current query
};

// Scorer terms for a list of target ratings, stored flat.
class TermTable {
 public:
  static TermTable build(const RatingStore& train, const TrustGraph& graph, std::span<const Rating> targets,
                         const PredictOptions& options = {}, std::size_t threads = 1);

  // Table over explicit terms; terms[i] belongs to targets[i].
  static TermTable from_terms(std::span<const Rating> targets, const std::vector<std::vector<ScorerTerms>>& terms);

  // Copy with the similarity columns not in `keep` zeroed.
  TermTable masked(std::array<bool, 3> keep) const;

  std::size_t size() const noexcept { return targets_.size(); }
  const Rating& target(std::size_t i) const noexcept { return targets_[i]; }
  std::span<const Rating> targets() const noexcept { return targets_; }
  std::span<const ScorerTerms> terms(std::size_t i) const noexcept {
    return std::span<const ScorerTerms>(terms_).subspan(offsets_[i], offsets_[i + 1] - offsets_[i]);
  }

 private:
  std::vector<Rating> targets_;
  std::vector<std::size_t> offsets_;
  std::vector<ScorerTerms> terms_;
};

// Weighted-average prediction using only sim(q, s).
Prediction predict_baseline(const RatingStore& store, UserId q, ItemId t);

struct WeightedGroup {
  std::vector<UserId> members;
  double weight;
};

// General cluster-weighted prediction: each scorer s is weighted by
// sum_i weight_i * Sim(s, V_i).
Prediction predict_clusters(const RatingStore& store, UserId q, ItemId t, std::span<const WeightedGroup> clusters,
                            const PredictOptions& options = {});

// Own similarity fused with direct-trust similarity.
Prediction predict_one_level(const RatingStore& store, const TrustGraph& graph, UserId q, ItemId t, double w0,
                             double w1, const PredictOptions& options = {});

// Own similarity fused with direct and indirect trust similarity.
Prediction predict_two_level(const RatingStore& store, const TrustGraph& graph, UserId q, ItemId t,
                             const WeightVector& w, const PredictOptions& options = {});

Gradient prediction_gradient(const RatingStore& store, const TrustGraph& graph, UserId q, ItemId t,
                             const WeightVector& w, const PredictOptions& options = {});

// Applies PredictOptions::clip against the domain.
Prediction finalize(Prediction p, const RatingDomain& domain, bool clip);

}  // namespace trustcf
