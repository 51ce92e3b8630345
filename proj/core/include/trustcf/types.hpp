#pragma once

#include <cstdint>
#include <functional>

namespace trustcf {

// Dense indices assigned at load time. Source identifiers are opaque strings
// kept in an IdTable.
enum class UserId : std::uint32_t {};
enum class ItemId : std::uint32_t {};

constexpr std::size_t index(UserId u) noexcept { return static_cast<std::size_t>(u); }
constexpr std::size_t index(ItemId i) noexcept { return static_cast<std::size_t>(i); }

constexpr UserId user_id(std::size_t i) noexcept { return static_cast<UserId>(i); }
constexpr ItemId item_id(std::size_t i) noexcept { return static_cast<ItemId>(i); }

struct Rating {
  UserId user;
  ItemId item;
  double value;

  friend bool operator==(const Rating&, const Rating&) = default;
};

// Canonical (user, item) ordering used for fold contents and reports.
struct RatingKeyLess {
  bool operator()(const Rating& a, const Rating& b) const noexcept {
    if (a.user != b.user) return a.user < b.user;
    return a.item < b.item;
  }
};

}  // namespace trustcf
