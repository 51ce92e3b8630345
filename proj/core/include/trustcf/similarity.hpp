#pragma once

#include <optional>
#include <span>
#include <vector>

#include "trustcf/rating_domain.hpp"
#include "trustcf/rating_store.hpp"
#include "trustcf/trust_graph.hpp"
#include "trustcf/types.hpp"

namespace trustcf {

// 1 - |a - b| / (r_max - r_min). Throws std::invalid_argument when either
// rate lies outside the domain.
double rate_closeness(double a, double b, const RatingDomain& domain);

// Mean rate closeness over the items both users rated; nullopt when they
// share none.
std::optional<double> user_similarity(const RatingStore& store, UserId q, UserId s);

// Mean user_similarity(u, x) over group members x sharing at least one item
// with u; nullopt when no member qualifies (including the empty group).
std::optional<double> group_similarity(const RatingStore& store, UserId u, std::span<const UserId> group);

// Users q trusts directly.
std::vector<UserId> direct_trustees(const TrustGraph& graph, UserId q);

struct IndirectTrustOptions {
  bool exclude_query = true;    // drop q itself (reached via q -> x -> q)
  bool exclude_direct = false;  // drop members of q's direct trustee set
};

// Trustees of q's trustees: users at directed distance two, sorted.
std::vector<UserId> indirect_trustees(const TrustGraph& graph, UserId q, IndirectTrustOptions options = {});

// One user's ratings scattered into an item-indexed array, so similarity with
// another user costs O(|I_x|) instead of a merge. Not thread-safe.
class DenseProfile {
 public:
  explicit DenseProfile(const RatingStore& store);

  void load(UserId u);
  UserId owner() const noexcept { return owner_; }

  // user_similarity(owner, x); bit-identical to the merge-based version.
  std::optional<double> similarity(UserId x) const;

  // group_similarity(owner, group), optionally skipping one member.
  std::optional<double> group_similarity(std::span<const UserId> group,
                                         std::optional<UserId> skip = std::nullopt) const;

 private:
  const RatingStore* store_;
  std::vector<double> values_;  // NaN where the owner has no rating
  UserId owner_{};
  bool loaded_ = false;
  double span_;
};

}  // namespace trustcf
