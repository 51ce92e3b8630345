#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trustcf/prediction.hpp"

namespace trustcf {

struct GreedyConfig {
  std::size_t n_outer_passes = 3;
  std::size_t n_inner_iterations = 3;  // range-narrowing rounds per parameter
  std::size_t n_restarts = 1;          // each restart continues from the previous result
  double lower = 1e-4;
  double upper = 1.0;
  std::array<Param, 3> order{Param::w0, Param::w1, Param::w2};
  WeightVector init{0.5, 0.5, 0.5};
  bool tie_on_coverage = false;  // break exact MAE ties by higher coverage first

  void validate() const;
};

struct GradientConfig {
  double learning_rate = 1e-2;
  std::size_t batch_size = 50;
  std::size_t n_epochs = 30;
  WeightVector init{0.5, 0.5, 0.5};
  bool shuffle = true;  // reshuffle validation ratings every epoch
  std::uint64_t seed = 0;

  void validate() const;
};

// Validation error of one weight vector.
struct ValidationScore {
  std::optional<double> mae;        // nullopt when nothing is predictable
  std::optional<double> objective;  // 1/(2n) * sum of squared errors over predicted ratings
  double coverage = 0.0;
  std::size_t n_predicted = 0;
  std::size_t n_total = 0;
};

// Validation ratings with their scorer terms precomputed against the training
// store, so scoring a weight vector is a single pass with no similarity work.
class ValidationObjective {
 public:
  explicit ValidationObjective(TermTable terms, bool clip = false, std::optional<RatingDomain> domain = std::nullopt);

  static ValidationObjective build(const RatingStore& train, const TrustGraph& graph,
                                   std::span<const Rating> validation, const PredictOptions& options = {},
                                   std::size_t threads = 1);

  ValidationScore score(const WeightVector& w) const;

  const TermTable& table() const noexcept { return terms_; }
  std::size_t size() const noexcept { return terms_.size(); }

 private:
  TermTable terms_;
  bool clip_;
  std::optional<RatingDomain> domain_;
};

struct TraceRecord {
  std::string scheme;       // "greedy" or "gradient"
  std::size_t pass = 0;     // greedy: restart * n_outer_passes + pass; gradient: epoch
  std::size_t step = 0;     // greedy: narrowing round; gradient: batch index within the epoch
  std::optional<Param> param;
  double candidate = 0.0;   // greedy: candidate value of `param`
  WeightVector weights;
  ValidationScore score;
  std::size_t skipped = 0;  // gradient: unpredictable ratings skipped in the batch/epoch
  bool selected = false;    // greedy: best candidate of its round
};

struct TuningTrace {
  std::vector<TraceRecord> records;
  WeightVector final_weights;

  // One whitespace-separated record per line with a '#' header.
  void write(std::ostream& out) const;
};

// The 11 boundaries of ten equal sub-ranges of [l, u], endpoints exact.
std::array<double, 11> split_range(double l, double u);

// Range-narrowing search for one coefficient with the others held fixed.
// Throws ComputationError when no candidate of a round predicts anything.
double greedy_tune_one(const ValidationObjective& objective, const WeightVector& w, Param which,
                       const GreedyConfig& cfg, TuningTrace* trace = nullptr, std::size_t pass = 0);

struct TuningResult {
  WeightVector weights;
  ValidationScore score;
  TuningTrace trace;
};

TuningResult greedy_tune_all(const ValidationObjective& objective, const GreedyConfig& cfg);

// Mini-batch gradient descent on the squared validation error. Throws
// ComputationError when no validation rating is predictable at cfg.init.
TuningResult gradient_tune(const ValidationObjective& objective, const GradientConfig& cfg);

}  // namespace trustcf
