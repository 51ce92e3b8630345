#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trustcf {

// Interns opaque identifiers to dense indices in order of first appearance.
class IdTable {
 public:
  std::size_t intern(std::string_view name) {
    auto it = lookup_.find(std::string(name));
    if (it != lookup_.end()) return it->second;
    const std::size_t id = names_.size();
    names_.emplace_back(name);
    lookup_.emplace(names_.back(), id);
    return id;
  }

  // Returns size() when absent.
  std::size_t find(std::string_view name) const {
    auto it = lookup_.find(std::string(name));
    return it == lookup_.end() ? names_.size() : it->second;
  }

  bool contains(std::string_view name) const { return find(name) != names_.size(); }

  const std::string& name(std::size_t id) const { return names_.at(id); }
  std::size_t size() const noexcept { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> lookup_;
};

}  // namespace trustcf
