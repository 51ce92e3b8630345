#include "trustcf/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <unordered_set>

#include "trustcf/errors.hpp"
#include "trustcf/random.hpp"

namespace trustcf {

namespace {

// Splits on spaces/tabs; returns false for blank or comment lines.
bool tokenize(std::string_view line, std::vector<std::string_view>& fields) {
  fields.clear();
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    if (pos == line.size()) break;
    const std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    fields.push_back(line.substr(start, pos - start));
  }
  return !fields.empty() && fields.front().front() != '#';
}

std::optional<double> parse_number(std::string_view s) {
  double v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

}  // namespace

std::optional<DatasetFormat> parse_dataset_format(std::string_view name) {
  if (name == "generic") return DatasetFormat::generic;
  if (name == "epinions") return DatasetFormat::epinions;
  if (name == "filmtrust") return DatasetFormat::filmtrust;
  return std::nullopt;
}

std::string_view to_string(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::generic: return "generic";
    case DatasetFormat::epinions: return "epinions";
    case DatasetFormat::filmtrust: return "filmtrust";
  }
  return "generic";
}

std::optional<RatingDomain> format_domain(DatasetFormat f) {
  switch (f) {
    case DatasetFormat::epinions: return RatingDomain::epinions();
    case DatasetFormat::filmtrust: return RatingDomain::filmtrust();
    case DatasetFormat::generic: break;
  }
  return std::nullopt;
}

std::vector<Rating> read_ratings(std::istream& in, const std::string& source, const RatingDomain& domain,
                                 IdTable& users, IdTable& items) {
  std::vector<Rating> out;
  std::unordered_set<std::uint64_t> seen;
  std::vector<std::string_view> fields;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!tokenize(line, fields)) continue;
    if (fields.size() != 3)
      throw ParseError(source, line_no, "expected <user> <item> <rating>, got " + std::to_string(fields.size()) +
                                            " fields");
    const auto value = parse_number(fields[2]);
    if (!value) throw ParseError(source, line_no, "rating '" + std::string(fields[2]) + "' is not a number");
    if (!domain.is_legal(*value))
      throw DomainError(source, line_no,
                        "rating " + std::string(fields[2]) + " outside domain " + domain.to_string());
    const UserId u = user_id(users.intern(fields[0]));
    const ItemId t = item_id(items.intern(fields[1]));
    const std::uint64_t key = (static_cast<std::uint64_t>(index(u)) << 32) | index(t);
    if (!seen.insert(key).second)
      throw DuplicateRatingError(source, line_no,
                                 "duplicate rating for user '" + std::string(fields[0]) + "' and item '" +
                                     std::string(fields[1]) + "'");
    out.push_back({u, t, *value});
  }
  return out;
}

TrustRecords read_trust(std::istream& in, const std::string& source, IdTable& users) {
  TrustRecords out;
  std::vector<std::string_view> fields;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!tokenize(line, fields)) continue;
    if (fields.size() != 2 && fields.size() != 3)
      throw ParseError(source, line_no, "expected <truster> <trustee> [value], got " +
                                            std::to_string(fields.size()) + " fields");
    if (fields.size() == 3) {
      const auto value = parse_number(fields[2]);
      if (!value) throw ParseError(source, line_no, "trust value '" + std::string(fields[2]) + "' is not a number");
      if (*value <= 0) {
        ++out.non_positive;
        continue;
      }
    }
    const UserId from = user_id(users.intern(fields[0]));
    const UserId to = user_id(users.intern(fields[1]));
    out.edges.emplace_back(from, to);
  }
  return out;
}

RatingStore load_ratings(const std::filesystem::path& path, const RatingDomain& domain) {
  auto in = open_input(path);
  auto users = std::make_shared<IdTable>();
  auto items = std::make_shared<IdTable>();
  const auto ratings = read_ratings(in, path.string(), domain, *users, *items);
  return RatingStore(domain, ratings, users, items);
}

TrustLoad load_trust(const std::filesystem::path& path, IdTable& users) {
  auto in = open_input(path);
  auto records = read_trust(in, path.string(), users);
  TrustLoad out;
  out.graph = TrustGraph(records.edges, users.size());
  out.dropped_self_loops = out.graph.dropped_self_loops();
  out.merged_duplicates = out.graph.merged_duplicates();
  out.non_positive = records.non_positive;
  return out;
}

Dataset load_dataset(const std::filesystem::path& ratings_path, const std::filesystem::path& trust_path,
                     const RatingDomain& domain) {
  auto users = std::make_shared<IdTable>();
  auto items = std::make_shared<IdTable>();
  auto in = open_input(ratings_path);
  auto ratings = read_ratings(in, ratings_path.string(), domain, *users, *items);
  TrustLoad trust;
  if (!trust_path.empty()) trust = load_trust(trust_path, *users);
  return Dataset{domain, users, items, std::move(ratings), std::move(trust)};
}

DatasetStats compute_stats(const RatingStore& store, const TrustGraph& graph) {
  if (store.empty()) throw std::invalid_argument("cannot compute statistics of an empty rating store");
  DatasetStats s;
  s.n_users = store.active_users();
  s.n_items = store.active_items();
  s.n_ratings = store.size();
  s.n_trust_edges = graph.edge_count();
  s.density_index = static_cast<double>(s.n_ratings) /
                    (static_cast<double>(s.n_users) * static_cast<double>(s.n_items)) * 100.0;
  s.mean_rating = store.mean_rating();
  s.mean_ratings_per_user = static_cast<double>(s.n_ratings) / static_cast<double>(s.n_users);
  s.mean_trustees_per_user = static_cast<double>(s.n_trust_edges) / static_cast<double>(s.n_users);
  return s;
}

std::vector<FoldSplit> split_folds(std::span<const Rating> ratings, std::size_t k, double validation_fraction,
                                   std::uint64_t seed) {
  if (k < 2) throw std::invalid_argument("fold count must be at least 2");
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0))
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  if (ratings.size() < k)
    throw std::invalid_argument("fold count " + std::to_string(k) + " exceeds rating count " +
                                std::to_string(ratings.size()));

  std::vector<std::size_t> order(ratings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(seed);
  deterministic_shuffle(std::span<std::size_t>(order), rng);

  const std::size_t n = ratings.size();
  std::vector<std::size_t> begin(k + 1, 0);
  for (std::size_t f = 0; f < k; ++f) begin[f + 1] = begin[f] + n / k + (f < n % k ? 1 : 0);

  std::vector<FoldSplit> folds(k);
  for (std::size_t f = 0; f < k; ++f) {
    FoldSplit& split = folds[f];
    for (std::size_t p = begin[f]; p < begin[f + 1]; ++p) split.test.push_back(ratings[order[p]]);

    const std::size_t remaining = n - split.test.size();
    const auto n_validation = static_cast<std::size_t>(std::llround(validation_fraction * static_cast<double>(remaining)));
    std::size_t taken = 0;
    for (std::size_t step = 0; step < remaining; ++step) {
      const std::size_t p = (begin[f + 1] + step) % n;
      auto& dest = taken < n_validation ? split.validation : split.train;
      dest.push_back(ratings[order[p]]);
      ++taken;
    }
    std::sort(split.train.begin(), split.train.end(), RatingKeyLess{});
    std::sort(split.validation.begin(), split.validation.end(), RatingKeyLess{});
    std::sort(split.test.begin(), split.test.end(), RatingKeyLess{});
  }
  return folds;
}

}  // namespace trustcf
