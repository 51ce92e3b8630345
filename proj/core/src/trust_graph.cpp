#include "trustcf/trust_graph.hpp"

#include <algorithm>

namespace trustcf {

TrustGraph::TrustGraph(std::span<const std::pair<UserId, UserId>> edges, std::size_t n_users) {
  std::size_t n = n_users;
  for (const auto& [from, to] : edges) n = std::max({n, index(from) + 1, index(to) + 1});
  out_.resize(n);

  for (const auto& [from, to] : edges) {
    if (from == to) {
      ++self_loops_;
      continue;
    }
    out_[index(from)].push_back(to);
  }
  for (auto& row : out_) {
    std::sort(row.begin(), row.end());
    const auto before = row.size();
    row.erase(std::unique(row.begin(), row.end()), row.end());
    duplicates_ += before - row.size();
    n_edges_ += row.size();
  }
}

}  // namespace trustcf
