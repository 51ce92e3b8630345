#include "trustcf/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <random>
#include <stdexcept>

#include "trustcf/errors.hpp"
#include "trustcf/random.hpp"

namespace trustcf {

void GreedyConfig::validate() const {
  if (!(lower > 0.0)) throw std::invalid_argument("greedy lower bound must be positive");
  if (!(lower < upper)) throw std::invalid_argument("greedy range requires lower < upper");
  if (n_inner_iterations == 0) throw std::invalid_argument("greedy needs at least one narrowing round");
  if (!init.finite()) throw std::invalid_argument("initial weights must be finite");
  std::array<bool, 3> seen{};
  for (Param p : order) seen[index(p)] = true;
  if (!(seen[0] && seen[1] && seen[2])) throw std::invalid_argument("greedy order must be a permutation of w0,w1,w2");
}

void GradientConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be a finite non-negative number");
  if (batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
  if (!init.finite()) throw std::invalid_argument("initial weights must be finite");
}

ValidationObjective::ValidationObjective(TermTable terms, bool clip, std::optional<RatingDomain> domain)
    : terms_(std::move(terms)), clip_(clip), domain_(domain) {
  if (clip_ && !domain_) throw std::invalid_argument("clipping needs a rating domain");
}

ValidationObjective ValidationObjective::build(const RatingStore& train, const TrustGraph& graph,
                                               std::span<const Rating> validation, const PredictOptions& options,
                                               std::size_t threads) {
  return ValidationObjective(TermTable::build(train, graph, validation, options, threads), options.clip,
                             train.domain());
}

ValidationScore ValidationObjective::score(const WeightVector& w) const {
  ValidationScore s;
  s.n_total = terms_.size();
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    Prediction p = combine(terms_.terms(i), w);
    if (!p.defined()) continue;
    if (clip_) p = finalize(p, *domain_, true);
    const double err = terms_.target(i).value - *p.value;
    abs_sum += std::abs(err);
    sq_sum += err * err;
    ++s.n_predicted;
  }
  s.coverage = s.n_total ? static_cast<double>(s.n_predicted) / static_cast<double>(s.n_total) : 0.0;
  if (s.n_predicted) {
    const double n = static_cast<double>(s.n_predicted);
    s.mae = abs_sum / n;
    s.objective = sq_sum / (2.0 * n);
  }
  return s;
}

std::array<double, 11> split_range(double l, double u) {
  if (!(l < u)) throw std::invalid_argument("split_range requires l < u");
  std::array<double, 11> out{};
  const double width = u - l;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = l + width * static_cast<double>(i) / 10.0;
  out.front() = l;
  out.back() = u;
  return out;
}

namespace {

// a better than b: lower MAE, then (optionally) higher coverage, then smaller value.
bool better(const ValidationScore& a, double va, const ValidationScore& b, double vb, bool tie_on_coverage) {
  if (*a.mae != *b.mae) return *a.mae < *b.mae;
  if (tie_on_coverage && a.coverage != b.coverage) return a.coverage > b.coverage;
  return va < vb;
}

}  // namespace

double greedy_tune_one(const ValidationObjective& objective, const WeightVector& w, Param which,
                       const GreedyConfig& cfg, TuningTrace* trace, std::size_t pass) {
  cfg.validate();
  double lo = cfg.lower;
  double hi = cfg.upper;
  std::optional<double> incumbent;

  for (std::size_t round = 0; round < cfg.n_inner_iterations; ++round) {
    auto candidates = split_range(lo, hi);
    // The previous best sits on the new grid in exact arithmetic; pin it so
    // rounding cannot drop it and the incumbent MAE never gets worse.
    if (incumbent) {
      auto nearest = std::min_element(candidates.begin(), candidates.end(), [&](double a, double b) {
        return std::abs(a - *incumbent) < std::abs(b - *incumbent);
      });
      if (std::abs(*nearest - *incumbent) <= 1e-9 * (hi - lo)) *nearest = *incumbent;
    }

    std::optional<std::size_t> best;
    std::array<ValidationScore, 11> scores;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      WeightVector trial = w;
      trial[which] = candidates[c];
      scores[c] = objective.score(trial);
      if (!scores[c].mae) continue;
      if (!best || better(scores[c], candidates[c], scores[*best], candidates[*best], cfg.tie_on_coverage)) best = c;
    }
    if (trace) {
      for (std::size_t c = 0; c < candidates.size(); ++c) {
        WeightVector trial = w;
        trial[which] = candidates[c];
        trace->records.push_back({.scheme = "greedy",
                                  .pass = pass,
                                  .step = round,
                                  .param = which,
                                  .candidate = candidates[c],
                                  .weights = trial,
                                  .score = scores[c],
                                  .selected = best && *best == c});
      }
    }
    if (!best)
      throw ComputationError("no validation rating is predictable for any candidate of " +
                             std::string(to_string(which)));

    incumbent = candidates[*best];
    lo = candidates[*best == 0 ? 0 : *best - 1];
    hi = candidates[std::min<std::size_t>(*best + 1, candidates.size() - 1)];
  }
  return *incumbent;
}

TuningResult greedy_tune_all(const ValidationObjective& objective, const GreedyConfig& cfg) {
  cfg.validate();
  TuningResult result;
  WeightVector w = cfg.init;
  for (std::size_t restart = 0; restart < std::max<std::size_t>(1, cfg.n_restarts); ++restart) {
    for (std::size_t pass = 0; pass < cfg.n_outer_passes; ++pass) {
      for (Param p : cfg.order)
        w[p] = greedy_tune_one(objective, w, p, cfg, &result.trace, restart * cfg.n_outer_passes + pass);
    }
  }
  result.weights = w;
  result.score = objective.score(w);
  result.trace.final_weights = w;
  return result;
}

TuningResult gradient_tune(const ValidationObjective& objective, const GradientConfig& cfg) {
  cfg.validate();
  TuningResult result;
  WeightVector w = cfg.init;
  const TermTable& table = objective.table();

  const ValidationScore initial = objective.score(w);
  if (initial.n_predicted == 0) throw ComputationError("no validation rating is predictable at the initial weights");
  result.trace.records.push_back({.scheme = "gradient", .pass = 0, .step = 0, .param = std::nullopt, .weights = w, .score = initial});

  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(cfg.seed);

  for (std::size_t epoch = 1; epoch <= cfg.n_epochs; ++epoch) {
    if (cfg.shuffle) deterministic_shuffle(std::span<std::size_t>(order), rng);
    std::size_t skipped = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      std::array<double, 3> step{};
      std::size_t used = 0;
      for (std::size_t k = start; k < end; ++k) {
        const auto terms = table.terms(order[k]);
        const Prediction p = combine(terms, w);
        if (!p.defined()) {
          ++skipped;
          continue;
        }
        const Gradient d = prediction_gradient(terms, w);
        const double err = table.target(order[k]).value - *p.value;
        for (std::size_t j = 0; j < 3; ++j) step[j] += err * d.d[j];
        ++used;
      }
      if (used == 0) continue;
      const double scale = cfg.learning_rate / static_cast<double>(used);
      w.w0 += scale * step[0];
      w.w1 += scale * step[1];
      w.w2 += scale * step[2];
    }
    result.trace.records.push_back(
        {.scheme = "gradient", .pass = epoch, .step = 0, .param = std::nullopt, .candidate = 0.0, .weights = w, .score = objective.score(w), .skipped = skipped});
  }

  result.weights = w;
  result.score = objective.score(w);
  result.trace.final_weights = w;
  return result;
}

namespace {

void put_number(std::ostream& out, std::optional<double> v) {
  if (!v) {
    out << "NA";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", *v);
  out << buf;
}

}  // namespace

void TuningTrace::write(std::ostream& out) const {
  out << "# scheme pass step param candidate w0 w1 w2 validation_mae coverage skipped selected\n";
  for (const TraceRecord& r : records) {
    out << r.scheme << ' ' << r.pass << ' ' << r.step << ' ' << (r.param ? to_string(*r.param) : "-") << ' ';
    if (r.param)
      put_number(out, r.candidate);
    else
      out << '-';
    out << ' ';
    put_number(out, r.weights.w0);
    out << ' ';
    put_number(out, r.weights.w1);
    out << ' ';
    put_number(out, r.weights.w2);
    out << ' ';
    put_number(out, r.score.mae);
    out << ' ';
    put_number(out, r.score.coverage);
    out << ' ' << r.skipped << ' ' << (r.selected ? 1 : 0) << '\n';
  }
  out << "# final ";
  put_number(out, final_weights.w0);
  out << ' ';
  put_number(out, final_weights.w1);
  out << ' ';
  put_number(out, final_weights.w2);
  out << '\n';
}

}  // namespace trustcf
