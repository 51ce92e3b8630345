#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "trustcf/id_table.hpp"
#include "trustcf/rating_domain.hpp"
#include "trustcf/rating_store.hpp"
#include "trustcf/trust_graph.hpp"
#include "trustcf/types.hpp"

namespace trustcf {

enum class DatasetFormat { generic, epinions, filmtrust };

std::optional<DatasetFormat> parse_dataset_format(std::string_view name);
std::string_view to_string(DatasetFormat f);

// Rating domain implied by a named dataset format; nullopt for `generic`.
std::optional<RatingDomain> format_domain(DatasetFormat f);

// Parses "<user> <item> <rating>" records separated by tabs or spaces.
// Blank lines and lines starting with '#' are skipped. Throws ParseError,
// DomainError or DuplicateRatingError naming `source` and the 1-based line.
std::vector<Rating> read_ratings(std::istream& in, const std::string& source, const RatingDomain& domain,
                                 IdTable& users, IdTable& items);

struct TrustRecords {
  std::vector<std::pair<UserId, UserId>> edges;
  std::size_t non_positive = 0;  // records with an explicit value <= 0, skipped
};

// Parses "<truster> <trustee> [value]" records. Edges with value <= 0 are
// skipped; self-loops are kept here and dropped by TrustGraph.
TrustRecords read_trust(std::istream& in, const std::string& source, IdTable& users);

RatingStore load_ratings(const std::filesystem::path& path, const RatingDomain& domain);

struct TrustLoad {
  TrustGraph graph;
  std::size_t dropped_self_loops = 0;
  std::size_t merged_duplicates = 0;
  std::size_t non_positive = 0;
};

TrustLoad load_trust(const std::filesystem::path& path, IdTable& users);

// Ratings and trust sharing one user id space.
struct Dataset {
  RatingDomain domain;
  std::shared_ptr<const IdTable> users;
  std::shared_ptr<const IdTable> items;
  std::vector<Rating> ratings;  // file order
  TrustLoad trust;

  RatingStore store() const { return RatingStore(domain, ratings, users, items); }
};

// `trust_path` may be empty, giving an empty graph.
Dataset load_dataset(const std::filesystem::path& ratings_path, const std::filesystem::path& trust_path,
                     const RatingDomain& domain);

struct DatasetStats {
  std::size_t n_users = 0;  // users with at least one rating
  std::size_t n_items = 0;  // items with at least one rating
  std::size_t n_ratings = 0;
  std::size_t n_trust_edges = 0;
  double density_index = 0;  // percent
  double mean_rating = 0;
  double mean_ratings_per_user = 0;
  double mean_trustees_per_user = 0;  // edges / rated users
};

// Throws std::invalid_argument on an empty store.
DatasetStats compute_stats(const RatingStore& store, const TrustGraph& graph);

struct FoldSplit {
  std::vector<Rating> train;
  std::vector<Rating> validation;
  std::vector<Rating> test;
};

// Seeded k-fold partition. Fold i tests on the i-th block of a shuffled order
// (block sizes differ by at most one). The remaining ratings, taken cyclically
// from block i+1 onward, give round(validation_fraction * remaining) validation
// ratings and the rest train; with k = 5 and fraction 0.25 the validation set is
// exactly the next block. Each set is returned in (user, item) order.
std::vector<FoldSplit> split_folds(std::span<const Rating> ratings, std::size_t k, double validation_fraction,
                                   std::uint64_t seed);

inline std::vector<FoldSplit> split_folds(const RatingStore& store, std::size_t k, double validation_fraction,
                                          std::uint64_t seed) {
  const auto all = store.ratings();
  return split_folds(all, k, validation_fraction, seed);
}

}  // namespace trustcf
