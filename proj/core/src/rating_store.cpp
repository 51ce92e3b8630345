#include "trustcf/rating_store.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace trustcf {

RatingStore::RatingStore(RatingDomain domain, std::span<const Rating> ratings, std::shared_ptr<const IdTable> users,
                         std::shared_ptr<const IdTable> items)
    : domain_(domain), users_(std::move(users)), items_(std::move(items)) {
  std::size_t n_users = users_ ? users_->size() : 0;
  std::size_t n_items = items_ ? items_->size() : 0;
  for (const Rating& r : ratings) {
    n_users = std::max(n_users, index(r.user) + 1);
    n_items = std::max(n_items, index(r.item) + 1);
  }
  by_user_.resize(n_users);
  by_item_.resize(n_items);

  for (const Rating& r : ratings) {
    if (!domain_.is_legal(r.value))
      throw std::invalid_argument("rating " + std::to_string(r.value) + " outside domain " + domain_.to_string());
    by_user_[index(r.user)].push_back({r.item, r.value});
    by_item_[index(r.item)].push_back({r.user, r.value});
    sum_ += r.value;
  }
  n_ratings_ = ratings.size();

  for (auto& row : by_user_) {
    std::sort(row.begin(), row.end(), [](const ItemRating& a, const ItemRating& b) { return a.item < b.item; });
    auto dup = std::adjacent_find(row.begin(), row.end(),
                                  [](const ItemRating& a, const ItemRating& b) { return a.item == b.item; });
    if (dup != row.end())
      throw std::invalid_argument("duplicate rating for item index " + std::to_string(index(dup->item)));
    if (!row.empty()) ++active_users_;
  }
  for (auto& col : by_item_) {
    std::sort(col.begin(), col.end(), [](const UserRating& a, const UserRating& b) { return a.user < b.user; });
    if (!col.empty()) ++active_items_;
  }
}

RatingStore RatingStore::subset(std::span<const Rating> ratings) const {
  RatingStore out(domain_, ratings, users_, items_);
  // Keep the parent's index space so ids stay comparable across folds.
  out.by_user_.resize(std::max(out.by_user_.size(), by_user_.size()));
  out.by_item_.resize(std::max(out.by_item_.size(), by_item_.size()));
  return out;
}

const double* RatingStore::find(UserId u, ItemId t) const noexcept {
  const auto row = items_of(u);
  auto it = std::lower_bound(row.begin(), row.end(), t, [](const ItemRating& a, ItemId b) { return a.item < b; });
  if (it == row.end() || it->item != t) return nullptr;
  return &it->value;
}

std::vector<Rating> RatingStore::ratings() const {
  std::vector<Rating> out;
  out.reserve(n_ratings_);
  for (std::size_t u = 0; u < by_user_.size(); ++u)
    for (const ItemRating& r : by_user_[u]) out.push_back({user_id(u), r.item, r.value});
  return out;
}

}  // namespace trustcf
