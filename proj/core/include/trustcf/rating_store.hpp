#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "trustcf/id_table.hpp"
#include "trustcf/rating_domain.hpp"
#include "trustcf/types.hpp"

namespace trustcf {

struct ItemRating {
  ItemId item;
  double value;
};

struct UserRating {
  UserId user;
  double value;
};

// Immutable sparse rating set with a user -> items index and an inverted
// item -> scorers index. Both lists are sorted by id.
class RatingStore {
 public:
  // Throws std::invalid_argument on a duplicate (user, item) pair or an
  // illegal rating value.
  RatingStore(RatingDomain domain, std::span<const Rating> ratings,
              std::shared_ptr<const IdTable> users = nullptr, std::shared_ptr<const IdTable> items = nullptr);

  // A store over a subset of this store's ratings sharing the id tables.
  RatingStore subset(std::span<const Rating> ratings) const;

  const RatingDomain& domain() const noexcept { return domain_; }

  // Index spaces; ids beyond these bounds are valid and simply have no ratings.
  std::size_t user_capacity() const noexcept { return by_user_.size(); }
  std::size_t item_capacity() const noexcept { return by_item_.size(); }

  std::size_t size() const noexcept { return n_ratings_; }
  bool empty() const noexcept { return n_ratings_ == 0; }

  // Users / items with at least one rating.
  std::size_t active_users() const noexcept { return active_users_; }
  std::size_t active_items() const noexcept { return active_items_; }

  std::span<const ItemRating> items_of(UserId u) const noexcept {
    return index(u) < by_user_.size() ? std::span<const ItemRating>(by_user_[index(u)]) : std::span<const ItemRating>();
  }
  std::span<const UserRating> scorers_of(ItemId t) const noexcept {
    return index(t) < by_item_.size() ? std::span<const UserRating>(by_item_[index(t)]) : std::span<const UserRating>();
  }

  // Rating of (u, t) if present.
  const double* find(UserId u, ItemId t) const noexcept;

  // All ratings in (user, item) order.
  std::vector<Rating> ratings() const;

  double mean_rating() const noexcept { return n_ratings_ ? sum_ / static_cast<double>(n_ratings_) : 0.0; }

  const std::shared_ptr<const IdTable>& user_names() const noexcept { return users_; }
  const std::shared_ptr<const IdTable>& item_names() const noexcept { return items_; }

 private:
  RatingDomain domain_;
  std::vector<std::vector<ItemRating>> by_user_;
  std::vector<std::vector<UserRating>> by_item_;
  std::size_t n_ratings_ = 0;
  std::size_t active_users_ = 0;
  std::size_t active_items_ = 0;
  double sum_ = 0.0;
  std::shared_ptr<const IdTable> users_;
  std::shared_ptr<const IdTable> items_;
};

}  // namespace trustcf
