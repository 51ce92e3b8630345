#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "trustcf/dataset.hpp"
#include "trustcf/prediction.hpp"

namespace trustcf {

enum class Segment { all_users, cold_start };
std::string_view to_string(Segment s);

// Counts of |predicted - actual| at multiples of the domain step, from 0 to
// r_max - r_min. Errors round to the nearest multiple, halves rounding down.
struct Histogram {
  double bin_width = 1.0;
  std::vector<std::size_t> counts;
  std::size_t overflow = 0;  // beyond r_max - r_min (unclipped predictions)

  std::size_t total() const noexcept;
};

Histogram closeness_histogram(std::span<const double> errors, const RatingDomain& domain);

struct EvalReport {
  std::optional<double> mae;  // nullopt when nothing was predicted
  std::optional<double> rmse;
  double coverage = 0.0;
  std::optional<double> acc;
  std::optional<double> f1;
  std::size_t n_predicted = 0;
  std::size_t n_test = 0;
  Histogram histogram;
  Segment segment = Segment::all_users;
};

// One test rating and what the predictor made of it.
struct Outcome {
  Rating truth;
  std::optional<double> predicted;
};

// Metrics over a list of outcomes. Reports with no predictions carry
// coverage 0 and undefined error metrics.
EvalReport summarize(std::span<const Outcome> outcomes, const RatingDomain& domain,
                     Segment segment = Segment::all_users);

using Predictor = std::function<Prediction(UserId, ItemId)>;

// Runs `predictor` on every test rating. With threads > 1 the predictor must
// be safe to call concurrently; results do not depend on the thread count.
std::vector<Outcome> predict_all(const Predictor& predictor, std::span<const Rating> test, std::size_t threads = 1);

// Outcomes of fused predictions over precomputed scorer terms.
std::vector<Outcome> predict_all(const TermTable& table, const WeightVector& w, const RatingDomain& domain,
                                 bool clip = false);

EvalReport evaluate(const Predictor& predictor, std::span<const Rating> test, const RatingDomain& domain,
                    std::size_t threads = 1);

struct ColdStartRule {
  std::size_t max_train_ratings = 5;  // cold start: strictly fewer training ratings
};

std::vector<Rating> segment_cold_start(std::span<const Rating> test, const RatingStore& train, ColdStartRule rule);

// Per-fold reports plus the pooled report over all folds' outcomes.
struct CrossValidated {
  std::vector<EvalReport> per_fold;
  EvalReport pooled;

  // Mean and sample standard deviation of a per-fold metric over folds where
  // it is defined.
  struct Summary {
    std::optional<double> mean;
    std::optional<double> stddev;
  };
  Summary summary(std::optional<double> EvalReport::*metric) const;
  Summary coverage_summary() const;
};

CrossValidated cross_validate(const std::vector<std::vector<Outcome>>& fold_outcomes, const RatingDomain& domain,
                              Segment segment = Segment::all_users);

// Which ratings back test-time predictions.
enum class Backing { train, train_and_validation };
std::string_view to_string(Backing b);
std::optional<Backing> parse_backing(std::string_view name);

// Per-fold training store and precomputed test terms; the shared input of
// evaluation, ablation and sweeps.
struct FoldContext {
  RatingStore backing;
  TermTable test_terms;
  std::vector<bool> is_cold_start;  // parallel to test_terms targets
};

std::vector<FoldContext> prepare_folds(const RatingStore& store, const TrustGraph& graph,
                                       std::span<const FoldSplit> folds, Backing backing,
                                       const PredictOptions& options, ColdStartRule rule, std::size_t threads = 1);

struct SegmentedResult {
  CrossValidated all_users;
  CrossValidated cold_start;
};

// Evaluates one weight vector per fold (a single vector is broadcast).
SegmentedResult evaluate_folds(std::span<const FoldContext> folds, std::span<const WeightVector> weights,
                               const RatingDomain& domain, bool clip = false);

struct AblationRow {
  std::string configuration;
  WeightVector weights;  // fold 0's weights, for display
  SegmentedResult result;
};

// Rows: baseline (w1 = w2 = 0), only direct trust (w0 = w2 = 0), direct
// social (learned w0, w1; w2 = 0), and the full learned vector.
std::vector<AblationRow> ablation_table(std::span<const FoldContext> folds, std::span<const WeightVector> learned,
                                        const RatingDomain& domain, bool clip = false);

struct SweepPoint {
  double weight = 0.0;
  std::optional<double> mae;
  std::optional<double> rmse;
  std::size_t common_size = 0;  // ratings covered at every grid value
  double coverage = 0.0;        // over the full test sets at this grid value
};

struct SweepSpec {
  Param swept = Param::w1;
  std::optional<Param> complement;  // set to 1 - swept when given
  WeightVector fixed;
  std::vector<double> grid;
};

// Throws ComputationError when no rating is covered at every grid value.
std::vector<SweepPoint> weight_sweep(std::span<const FoldContext> folds, const SweepSpec& spec,
                                     const RatingDomain& domain, bool clip = false);

// "%.6g", or NA for undefined values.
std::string format_number(std::optional<double> v);

void write_report_csv_header(std::ostream& out);
void write_report_csv_row(std::ostream& out, std::string_view configuration, std::string_view mode,
                          const EvalReport& report);
void write_histogram_csv(std::ostream& out, const Histogram& h);

}  // namespace trustcf
