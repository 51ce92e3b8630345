#include "trustcf/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "trustcf/errors.hpp"
#include "trustcf/parallel.hpp"

namespace trustcf {

std::string_view to_string(Segment s) { return s == Segment::all_users ? "all_users" : "cold_start"; }

std::string_view to_string(Backing b) { return b == Backing::train ? "train" : "train+validation"; }

std::optional<Backing> parse_backing(std::string_view name) {
  if (name == "train") return Backing::train;
  if (name == "train+validation") return Backing::train_and_validation;
  return std::nullopt;
}

std::size_t Histogram::total() const noexcept {
  std::size_t n = overflow;
  for (std::size_t c : counts) n += c;
  return n;
}

Histogram closeness_histogram(std::span<const double> errors, const RatingDomain& domain) {
  Histogram h;
  h.bin_width = domain.step();
  h.counts.assign(domain.difference_levels(), 0);
  for (double e : errors) {
    if (!(e >= 0.0)) throw std::invalid_argument("closeness histogram needs non-negative errors");
    const double k = std::ceil(e / h.bin_width - 0.5);
    if (k >= static_cast<double>(h.counts.size()))
      ++h.overflow;
    else
      ++h.counts[static_cast<std::size_t>(k)];
  }
  return h;
}

EvalReport summarize(std::span<const Outcome> outcomes, const RatingDomain& domain, Segment segment) {
  EvalReport r;
  r.segment = segment;
  r.n_test = outcomes.size();
  std::vector<double> errors;
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (const Outcome& o : outcomes) {
    if (!o.predicted) continue;
    const double e = std::abs(o.truth.value - *o.predicted);
    errors.push_back(e);
    abs_sum += e;
    sq_sum += e * e;
  }
  r.n_predicted = errors.size();
  r.coverage = r.n_test ? static_cast<double>(r.n_predicted) / static_cast<double>(r.n_test) : 0.0;
  r.histogram = closeness_histogram(errors, domain);
  if (r.n_predicted == 0) return r;

  const double n = static_cast<double>(r.n_predicted);
  r.mae = abs_sum / n;
  r.rmse = std::sqrt(sq_sum / n);
  r.acc = 1.0 - abs_sum / (n * domain.span());
  if (*r.acc + r.coverage > 0.0) r.f1 = 2.0 * *r.acc * r.coverage / (*r.acc + r.coverage);
  return r;
}

std::vector<Outcome> predict_all(const Predictor& predictor, std::span<const Rating> test, std::size_t threads) {
  std::vector<Outcome> out(test.size());
  parallel_blocks(test.size(), threads, [&](std::size_t begin, std::size_t end, std::size_t) {
    for (std::size_t i = begin; i < end; ++i) out[i] = {test[i], predictor(test[i].user, test[i].item).value};
  });
  return out;
}

std::vector<Outcome> predict_all(const TermTable& table, const WeightVector& w, const RatingDomain& domain, bool clip) {
  std::vector<Outcome> out;
  out.reserve(table.size());
  for (std::size_t i = 0; i < table.size(); ++i)
    out.push_back({table.target(i), finalize(combine(table.terms(i), w), domain, clip).value});
  return out;
}

EvalReport evaluate(const Predictor& predictor, std::span<const Rating> test, const RatingDomain& domain,
                    std::size_t threads) {
  const auto outcomes = predict_all(predictor, test, threads);
  return summarize(outcomes, domain);
}

std::vector<Rating> segment_cold_start(std::span<const Rating> test, const RatingStore& train, ColdStartRule rule) {
  if (rule.max_train_ratings < 1) throw std::invalid_argument("cold-start threshold must be at least 1");
  std::vector<Rating> out;
  for (const Rating& r : test)
    if (train.items_of(r.user).size() < rule.max_train_ratings) out.push_back(r);
  return out;
}

CrossValidated::Summary CrossValidated::summary(std::optional<double> EvalReport::*metric) const {
  std::vector<double> values;
  for (const EvalReport& r : per_fold)
    if (const auto& v = r.*metric) values.push_back(*v);
  Summary s;
  if (values.empty()) return s;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  s.mean = mean;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

CrossValidated::Summary CrossValidated::coverage_summary() const {
  Summary s;
  if (per_fold.empty()) return s;
  double mean = 0.0;
  for (const EvalReport& r : per_fold) mean += r.coverage;
  mean /= static_cast<double>(per_fold.size());
  s.mean = mean;
  if (per_fold.size() > 1) {
    double ss = 0.0;
    for (const EvalReport& r : per_fold) ss += (r.coverage - mean) * (r.coverage - mean);
    s.stddev = std::sqrt(ss / static_cast<double>(per_fold.size() - 1));
  }
  return s;
}

CrossValidated cross_validate(const std::vector<std::vector<Outcome>>& fold_outcomes, const RatingDomain& domain,
                              Segment segment) {
  CrossValidated cv;
  std::vector<Outcome> pooled;
  for (const auto& fold : fold_outcomes) {
    cv.per_fold.push_back(summarize(fold, domain, segment));
    pooled.insert(pooled.end(), fold.begin(), fold.end());
  }
  cv.pooled = summarize(pooled, domain, segment);
  return cv;
}

std::vector<FoldContext> prepare_folds(const RatingStore& store, const TrustGraph& graph,
                                       std::span<const FoldSplit> folds, Backing backing,
                                       const PredictOptions& options, ColdStartRule rule, std::size_t threads) {
  std::vector<FoldContext> out;
  out.reserve(folds.size());
  for (const FoldSplit& split : folds) {
    std::vector<Rating> known = split.train;
    if (backing == Backing::train_and_validation) known.insert(known.end(), split.validation.begin(), split.validation.end());
    RatingStore train = store.subset(known);
    TermTable terms = TermTable::build(train, graph, split.test, options, threads);
    std::vector<bool> cold;
    cold.reserve(split.test.size());
    for (const Rating& r : split.test) cold.push_back(train.items_of(r.user).size() < rule.max_train_ratings);
    out.push_back({std::move(train), std::move(terms), std::move(cold)});
  }
  return out;
}

namespace {

const WeightVector& weights_for(std::span<const WeightVector> weights, std::size_t fold) {
  if (weights.empty()) throw std::invalid_argument("no weight vector given");
  if (weights.size() == 1) return weights.front();
  return weights[fold];
}

void check_weight_count(std::span<const FoldContext> folds, std::span<const WeightVector> weights) {
  if (weights.size() != 1 && weights.size() != folds.size())
    throw std::invalid_argument("need one weight vector or one per fold");
}

}  // namespace

SegmentedResult evaluate_folds(std::span<const FoldContext> folds, std::span<const WeightVector> weights,
                               const RatingDomain& domain, bool clip) {
  check_weight_count(folds, weights);
  std::vector<std::vector<Outcome>> all(folds.size());
  std::vector<std::vector<Outcome>> cold(folds.size());
  for (std::size_t f = 0; f < folds.size(); ++f) {
    all[f] = predict_all(folds[f].test_terms, weights_for(weights, f), domain, clip);
    for (std::size_t i = 0; i < all[f].size(); ++i)
      if (folds[f].is_cold_start[i]) cold[f].push_back(all[f][i]);
  }
  return {cross_validate(all, domain, Segment::all_users), cross_validate(cold, domain, Segment::cold_start)};
}

std::vector<AblationRow> ablation_table(std::span<const FoldContext> folds, std::span<const WeightVector> learned,
                                        const RatingDomain& domain, bool clip) {
  check_weight_count(folds, learned);
  std::vector<AblationRow> rows;
  auto add = [&](std::string name, auto&& make) {
    std::vector<WeightVector> per_fold;
    for (std::size_t f = 0; f < folds.size(); ++f) per_fold.push_back(make(weights_for(learned, f)));
    rows.push_back({std::move(name), per_fold.front(), evaluate_folds(folds, per_fold, domain, clip)});
  };
  add("baseline", [](const WeightVector&) { return WeightVector{1.0, 0.0, 0.0}; });
  add("only_direct", [](const WeightVector&) { return WeightVector{0.0, 1.0, 0.0}; });
  add("direct_social", [](const WeightVector& w) { return WeightVector{w.w0, w.w1, 0.0}; });
  add("final", [](const WeightVector& w) { return w; });
  return rows;
}

std::vector<SweepPoint> weight_sweep(std::span<const FoldContext> folds, const SweepSpec& spec,
                                     const RatingDomain& domain, bool clip) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep grid is empty");
  if (spec.complement && *spec.complement == spec.swept)
    throw std::invalid_argument("complement parameter must differ from the swept one");

  // outcomes[g][f][i]
  std::vector<std::vector<std::vector<Outcome>>> outcomes(spec.grid.size());
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    WeightVector w = spec.fixed;
    w[spec.swept] = spec.grid[g];
    if (spec.complement) w[*spec.complement] = 1.0 - spec.grid[g];
    for (const FoldContext& fold : folds) outcomes[g].push_back(predict_all(fold.test_terms, w, domain, clip));
  }

  std::vector<std::vector<bool>> common(folds.size());
  std::size_t common_size = 0;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    common[f].assign(folds[f].test_terms.size(), true);
    for (std::size_t i = 0; i < common[f].size(); ++i) {
      for (std::size_t g = 0; g < spec.grid.size() && common[f][i]; ++g)
        common[f][i] = outcomes[g][f][i].predicted.has_value();
      common_size += common[f][i] ? 1 : 0;
    }
  }
  if (common_size == 0)
    throw ComputationError("no test rating is predictable at every sweep value; the common subset is empty");

  std::vector<SweepPoint> points;
  for (std::size_t g = 0; g < spec.grid.size(); ++g) {
    std::vector<Outcome> subset;
    std::size_t covered = 0;
    std::size_t total = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
      for (std::size_t i = 0; i < common[f].size(); ++i) {
        const Outcome& o = outcomes[g][f][i];
        ++total;
        covered += o.predicted ? 1 : 0;
        if (common[f][i]) subset.push_back(o);
      }
    }
    const EvalReport r = summarize(subset, domain);
    points.push_back({spec.grid[g], r.mae, r.rmse, common_size,
                      total ? static_cast<double>(covered) / static_cast<double>(total) : 0.0});
  }
  return points;
}

std::string format_number(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  return buf;
}

void write_report_csv_header(std::ostream& out) {
  out << "configuration,segment,mode,mae,rmse,coverage,acc,f1,n_predicted,n_test\n";
}

void write_report_csv_row(std::ostream& out, std::string_view configuration, std::string_view mode,
                          const EvalReport& r) {
  out << configuration << ',' << to_string(r.segment) << ',' << mode << ',' << format_number(r.mae) << ','
      << format_number(r.rmse) << ',' << (r.n_test ? format_number(r.coverage) : "NA") << ','
      << format_number(r.acc) << ',' << format_number(r.f1) << ',' << r.n_predicted << ',' << r.n_test << '\n';
}

void write_histogram_csv(std::ostream& out, const Histogram& h) {
  out << "bin,count,fraction\n";
  const std::size_t total = h.total();
  for (std::size_t k = 0; k < h.counts.size(); ++k) {
    out << format_number(h.bin_width * static_cast<double>(k)) << ',' << h.counts[k] << ','
        << (total ? format_number(static_cast<double>(h.counts[k]) / static_cast<double>(total)) : "NA") << '\n';
  }
  out << "overflow," << h.overflow << ','
      << (total ? format_number(static_cast<double>(h.overflow) / static_cast<double>(total)) : "NA") << '\n';
}

}  // namespace trustcf
