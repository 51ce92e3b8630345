#include "trustcf/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace trustcf {

double rate_closeness(double a, double b, const RatingDomain& domain) {
  if (!domain.contains(a) || !domain.contains(b))
    throw std::invalid_argument("rate outside domain " + domain.to_string());
  return 1.0 - std::abs(a - b) / domain.span();
}

std::optional<double> user_similarity(const RatingStore& store, UserId q, UserId s) {
  const auto a = store.items_of(q);
  const auto b = store.items_of(s);
  const double span = store.domain().span();
  double sum = 0.0;
  std::size_t n = 0;
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (i->item < j->item) {
      ++i;
    } else if (j->item < i->item) {
      ++j;
    } else {
      sum += 1.0 - std::abs(i->value - j->value) / span;
      ++n;
      ++i;
      ++j;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> group_similarity(const RatingStore& store, UserId u, std::span<const UserId> group) {
  double sum = 0.0;
  std::size_t n = 0;
  for (UserId x : group) {
    if (auto sim = user_similarity(store, u, x)) {
      sum += *sim;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::vector<UserId> direct_trustees(const TrustGraph& graph, UserId q) {
  const auto t = graph.trustees(q);
  return {t.begin(), t.end()};
}

std::vector<UserId> indirect_trustees(const TrustGraph& graph, UserId q, IndirectTrustOptions options) {
  const auto direct = graph.trustees(q);
  std::vector<UserId> out;
  for (UserId x : direct) {
    const auto next = graph.trustees(x);
    out.insert(out.end(), next.begin(), next.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (options.exclude_query) std::erase(out, q);
  if (options.exclude_direct)
    std::erase_if(out, [&](UserId x) { return std::binary_search(direct.begin(), direct.end(), x); });
  return out;
}

DenseProfile::DenseProfile(const RatingStore& store)
    : store_(&store),
      values_(store.item_capacity(), std::numeric_limits<double>::quiet_NaN()),
      span_(store.domain().span()) {}

void DenseProfile::load(UserId u) {
  if (loaded_) {
    if (owner_ == u) return;
    for (const ItemRating& r : store_->items_of(owner_)) values_[index(r.item)] = std::numeric_limits<double>::quiet_NaN();
  }
  for (const ItemRating& r : store_->items_of(u)) values_[index(r.item)] = r.value;
  owner_ = u;
  loaded_ = true;
}

std::optional<double> DenseProfile::similarity(UserId x) const {
  const double span = span_;
  double sum = 0.0;
  std::size_t n = 0;
  for (const ItemRating& r : store_->items_of(x)) {
    const double v = values_[index(r.item)];
    if (std::isnan(v)) continue;
    // Same operand order as user_similarity so results match bit for bit.
    sum += 1.0 - std::abs(v - r.value) / span;
    ++n;
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::optional<double> DenseProfile::group_similarity(std::span<const UserId> group, std::optional<UserId> skip) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (UserId x : group) {
    if (skip && x == *skip) continue;
    if (auto sim = similarity(x)) {
      sum += *sim;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

}  // namespace trustcf
