#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "trustcf/types.hpp"

namespace trustcf {

// Directed, unweighted trust relation. Adjacency lists are sorted and free of
// duplicates and self-loops.
class TrustGraph {
 public:
  TrustGraph() = default;

  // Self-loops are dropped; repeated edges are merged.
  explicit TrustGraph(std::span<const std::pair<UserId, UserId>> edges, std::size_t n_users = 0);

  std::span<const UserId> trustees(UserId u) const noexcept {
    return index(u) < out_.size() ? std::span<const UserId>(out_[index(u)]) : std::span<const UserId>();
  }

  std::size_t user_capacity() const noexcept { return out_.size(); }
  std::size_t edge_count() const noexcept { return n_edges_; }
  std::size_t dropped_self_loops() const noexcept { return self_loops_; }
  std::size_t merged_duplicates() const noexcept { return duplicates_; }

 private:
  std::vector<std::vector<UserId>> out_;
  std::size_t n_edges_ = 0;
  std::size_t self_loops_ = 0;
  std::size_t duplicates_ = 0;
};

}  // namespace trustcf
