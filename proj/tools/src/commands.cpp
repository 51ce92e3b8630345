#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "app.hpp"
#include "trustcf/errors.hpp"

namespace trustcf::cli {

namespace {

struct Loaded {
  Dataset data;
  RatingStore store;
};

Loaded load(const RunConfig& cfg, const Resolved& r, std::ostream& err) {
  if (cfg.ratings.empty()) throw UsageError("--ratings is required");
  Dataset data = load_dataset(cfg.ratings, cfg.trust, r.domain);
  if (data.trust.dropped_self_loops)
    err << "note: dropped " << data.trust.dropped_self_loops << " self-trust statements\n";
  if (data.trust.merged_duplicates)
    err << "note: merged " << data.trust.merged_duplicates << " duplicate trust statements\n";
  if (data.trust.non_positive)
    err << "note: skipped " << data.trust.non_positive << " trust statements with value <= 0\n";
  RatingStore store = data.store();
  if (store.empty()) throw UsageError(cfg.ratings.string() + ": no ratings");
  return {std::move(data), std::move(store)};
}

const std::filesystem::path& require_out(const RunConfig& cfg) {
  if (cfg.out.empty()) throw UsageError("`" + cfg.command + "` needs --out DIR");
  std::error_code ec;
  std::filesystem::create_directories(cfg.out, ec);
  if (ec) throw IoError("cannot create output directory " + cfg.out.string() + ": " + ec.message());
  return cfg.out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  return f;
}

void write_manifest(const RunConfig& cfg) {
  auto f = open_out(cfg.out / "manifest");
  f << "# trustcf " << cfg.command << '\n';
  f << cfg.echoed;
  if (!cfg.echoed.empty() && cfg.echoed.back() != '\n') f << '\n';
  f << "# sha256 ratings " << sha256_file(cfg.ratings) << '\n';
  if (!cfg.trust.empty()) f << "# sha256 trust " << sha256_file(cfg.trust) << '\n';
  if (!cfg.weights_file.empty()) f << "# sha256 weights-file " << sha256_file(cfg.weights_file) << '\n';
  if (!cfg.clusters.empty()) f << "# sha256 clusters " << sha256_file(cfg.clusters) << '\n';
}

std::string fmt(double v) { return format_number(v); }

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * fraction);
  return buf;
}

std::string fixed4(std::optional<double> v) {
  if (!v) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", *v);
  return buf;
}

std::vector<FoldSplit> make_folds(const RunConfig& cfg, const RatingStore& store) {
  if (cfg.folds > store.size()) throw UsageError("--folds exceeds the number of ratings");
  return split_folds(store, cfg.folds, cfg.val_fraction, cfg.seed);
}

constexpr std::array<bool, 3> kOneLevelColumns{true, true, false};

// ---- weights -----------------------------------------------------------

struct Tuned {
  std::vector<TuningResult> per_fold;
};

Tuned tune_folds(const RunConfig& cfg, const Resolved& r, const Loaded& d, std::span<const FoldSplit> folds,
                 std::ostream& out) {
  if (cfg.scheme != "greedy" && cfg.scheme != "gradient")
    throw UsageError("--scheme must be greedy or gradient");
  if (r.predictor != PredictorKind::one_level && r.predictor != PredictorKind::two_level)
    throw UsageError("tuning needs --predictor one-level or two-level");
  Tuned t;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const RatingStore train = d.store.subset(folds[f].train);
    auto objective = ValidationObjective::build(train, d.data.trust.graph, folds[f].validation, r.options, r.threads);
    if (r.predictor == PredictorKind::one_level)
      objective = ValidationObjective(objective.table().masked(kOneLevelColumns), r.options.clip, r.domain);
    TuningResult result = cfg.scheme == "greedy" ? greedy_tune_all(objective, r.greedy)
                                                 : gradient_tune(objective, r.gradient);
    if (r.predictor == PredictorKind::one_level) {
      result.weights.w2 = 0.0;
      result.trace.final_weights.w2 = 0.0;
    }
    out << "fold " << f + 1 << ": w0=" << fmt(result.weights.w0) << " w1=" << fmt(result.weights.w1)
        << " w2=" << fmt(result.weights.w2) << " validation MAE=" << format_number(result.score.mae)
        << " coverage=" << percent(result.score.coverage) << "%\n";
    t.per_fold.push_back(std::move(result));
  }
  return t;
}

std::pair<double, double> mean_std(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return {m, v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0};
}

void write_tuned(const RunConfig& cfg, const Tuned& t, std::ostream& out) {
  const auto& dir = cfg.out;
  auto f = open_out(dir / "weights.csv");
  f << "fold,w0,w1,w2,validation_mae,validation_coverage\n";
  std::array<std::vector<double>, 3> w;
  std::vector<double> mae;
  std::vector<double> cov;
  for (std::size_t i = 0; i < t.per_fold.size(); ++i) {
    const auto& r = t.per_fold[i];
    f << i + 1 << ',' << fmt(r.weights.w0) << ',' << fmt(r.weights.w1) << ',' << fmt(r.weights.w2) << ','
      << format_number(r.score.mae) << ',' << fmt(r.score.coverage) << '\n';
    for (std::size_t k = 0; k < 3; ++k) w[k].push_back(r.weights[static_cast<Param>(k)]);
    if (r.score.mae) mae.push_back(*r.score.mae);
    cov.push_back(r.score.coverage);
  }
  const auto s0 = mean_std(w[0]);
  const auto s1 = mean_std(w[1]);
  const auto s2 = mean_std(w[2]);
  const auto sc = mean_std(cov);
  std::optional<std::pair<double, double>> sm;
  if (!mae.empty()) sm = mean_std(mae);
  f << "mean," << fmt(s0.first) << ',' << fmt(s1.first) << ',' << fmt(s2.first) << ','
    << format_number(sm ? std::optional(sm->first) : std::nullopt) << ',' << fmt(sc.first) << '\n';
  f << "std," << fmt(s0.second) << ',' << fmt(s1.second) << ',' << fmt(s2.second) << ','
    << format_number(sm ? std::optional(sm->second) : std::nullopt) << ',' << fmt(sc.second) << '\n';

  for (std::size_t i = 0; i < t.per_fold.size(); ++i) {
    auto trace = open_out(dir / ("trace_fold" + std::to_string(i + 1) + ".txt"));
    t.per_fold[i].trace.write(trace);
  }

  char line[160];
  std::snprintf(line, sizeof line, "weights over %zu folds: w0 = %.4f +-%.4f  w1 = %.4f +-%.4f  w2 = %.4f +-%.4f\n",
                t.per_fold.size(), s0.first, s0.second, s1.first, s1.second, s2.first, s2.second);
  out << line;
}

// Weights for the non-baseline configurations, one per fold or broadcast.
std::vector<WeightVector> learned_weights(const RunConfig& cfg, const Resolved& r, const Loaded& d,
                                          std::span<const FoldSplit> folds, std::ostream& out) {
  const int sources = !cfg.weights.empty() + !cfg.weights_file.empty() + !cfg.scheme.empty();
  if (r.predictor == PredictorKind::baseline) {
    if (sources) throw UsageError("--predictor baseline takes no weights");
    return {WeightVector{1.0, 0.0, 0.0}};
  }
  if (sources != 1) throw UsageError("give exactly one of --weights, --weights-file, --scheme");

  std::vector<WeightVector> ws;
  if (!cfg.weights.empty()) {
    ws.push_back(parse_weights(cfg.weights, "--weights"));
  } else if (!cfg.weights_file.empty()) {
    ws = read_weights_file(cfg.weights_file);
    if (ws.size() != 1 && ws.size() != folds.size())
      throw UsageError(cfg.weights_file.string() + ": has " + std::to_string(ws.size()) + " weight rows for " +
                       std::to_string(folds.size()) + " folds");
  } else {
    const Tuned t = tune_folds(cfg, r, d, folds, out);
    write_tuned(cfg, t, out);
    for (const auto& x : t.per_fold) ws.push_back(x.weights);
  }
  if (r.predictor == PredictorKind::one_level)
    for (const auto& w : ws)
      if (w.w2 != 0.0) throw UsageError("--predictor one-level needs w2 = 0");
  return ws;
}

std::vector<FoldContext> contexts(const Resolved& r, const Loaded& d, std::span<const FoldSplit> folds) {
  auto ctx = prepare_folds(d.store, d.data.trust.graph, folds, r.backing, r.options, r.cold_start, r.threads);
  if (r.predictor == PredictorKind::one_level)
    for (auto& c : ctx) c.test_terms = c.test_terms.masked(kOneLevelColumns);
  return ctx;
}

// ---- clusters ------------------------------------------------------------

struct ClusterSpec {
  double weight = 0.0;
  bool self = false;
  bool direct = false;
  bool indirect = false;
  std::vector<UserId> users;
};

std::vector<ClusterSpec> read_clusters(const std::filesystem::path& path, const IdTable& users) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open cluster file " + path.string());
  std::vector<ClusterSpec> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream fields(line);
    std::string token;
    if (!(fields >> token) || token[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    ClusterSpec c;
    try {
      std::size_t used = 0;
      c.weight = std::stod(token, &used);
      if (used != token.size()) throw std::invalid_argument(token);
    } catch (const std::exception&) {
      throw UsageError(where + ": expected a weight, got '" + token + "'");
    }
    while (fields >> token) {
      if (token == "@self") {
        c.self = true;
      } else if (token == "@direct") {
        c.direct = true;
      } else if (token == "@indirect") {
        c.indirect = true;
      } else {
        const std::size_t id = users.find(token);
        if (id == users.size()) throw UsageError(where + ": unknown user '" + token + "'");
        c.users.push_back(user_id(id));
      }
    }
    out.push_back(std::move(c));
  }
  if (out.empty()) throw UsageError(path.string() + ": no clusters");
  return out;
}

SegmentedResult evaluate_clusters(const Resolved& r, const Loaded& d, std::span<const FoldContext> folds,
                                  const std::vector<ClusterSpec>& specs) {
  const TrustGraph& graph = d.data.trust.graph;
  std::vector<std::vector<Outcome>> all;
  std::vector<std::vector<Outcome>> cold;
  for (const FoldContext& fold : folds) {
    const Predictor predictor = [&](UserId q, ItemId t) {
      std::vector<WeightedGroup> groups;
      const auto direct = direct_trustees(graph, q);
      const auto indirect =
          indirect_trustees(graph, q, {.exclude_query = true, .exclude_direct = r.options.exclude_direct_from_indirect});
      for (const ClusterSpec& c : specs) {
        WeightedGroup g{c.users, c.weight};
        if (c.self) g.members.push_back(q);
        if (c.direct) g.members.insert(g.members.end(), direct.begin(), direct.end());
        if (c.indirect) g.members.insert(g.members.end(), indirect.begin(), indirect.end());
        std::sort(g.members.begin(), g.members.end());
        g.members.erase(std::unique(g.members.begin(), g.members.end()), g.members.end());
        groups.push_back(std::move(g));
      }
      return predict_clusters(fold.backing, q, t, groups, r.options);
    };
    auto outcomes = predict_all(predictor, fold.test_terms.targets(), r.threads);
    std::vector<Outcome> c;
    for (std::size_t i = 0; i < outcomes.size(); ++i)
      if (fold.is_cold_start[i]) c.push_back(outcomes[i]);
    all.push_back(std::move(outcomes));
    cold.push_back(std::move(c));
  }
  return {cross_validate(all, r.domain, Segment::all_users), cross_validate(cold, r.domain, Segment::cold_start)};
}

// ---- reports ---------------------------------------------------------------

void write_rows(std::ostream& f, std::string_view configuration, const CrossValidated& cv) {
  write_report_csv_row(f, configuration, "pooled", cv.pooled);
  for (std::size_t i = 0; i < cv.per_fold.size(); ++i)
    write_report_csv_row(f, configuration, "fold" + std::to_string(i + 1), cv.per_fold[i]);
}

void write_summary_rows(std::ostream& f, std::string_view configuration, Segment segment, const CrossValidated& cv) {
  const std::pair<const char*, std::optional<double> EvalReport::*> metrics[] = {
      {"mae", &EvalReport::mae}, {"rmse", &EvalReport::rmse}, {"acc", &EvalReport::acc}, {"f1", &EvalReport::f1}};
  for (const auto& [name, member] : metrics) {
    const auto s = cv.summary(member);
    f << configuration << ',' << to_string(segment) << ',' << name << ',' << format_number(s.mean) << ','
      << format_number(s.stddev) << '\n';
  }
  const auto s = cv.coverage_summary();
  f << configuration << ',' << to_string(segment) << ",coverage," << format_number(s.mean) << ','
    << format_number(s.stddev) << '\n';
}

void print_table_header(std::ostream& out) {
  char line[160];
  std::snprintf(line, sizeof line, "%-14s %-10s %8s %8s %10s %8s %8s %9s\n", "configuration", "segment", "MAE", "RMSE",
                "coverage%", "Acc", "F1", "predicted");
  out << line;
}

void print_table_row(std::ostream& out, std::string_view configuration, const EvalReport& rep) {
  char line[200];
  std::snprintf(line, sizeof line, "%-14.*s %-10.*s %8s %8s %10s %8s %8s %9zu\n", static_cast<int>(configuration.size()),
                configuration.data(), static_cast<int>(to_string(rep.segment).size()), to_string(rep.segment).data(),
                fixed4(rep.mae).c_str(), fixed4(rep.rmse).c_str(), rep.n_test ? percent(rep.coverage).c_str() : "NA",
                fixed4(rep.acc).c_str(), fixed4(rep.f1).c_str(), rep.n_predicted);
  out << line;
}

void warn_empty_cold_start(const SegmentedResult& res, const Resolved& r, std::ostream& err) {
  if (res.cold_start.pooled.n_test == 0)
    err << "warning: no test rating belongs to a user with fewer than " << r.cold_start.max_train_ratings
        << " training ratings; cold-start rows are NA\n";
}

}  // namespace

int cmd_stats(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err) {
  const Loaded d = load(cfg, r, err);
  const DatasetStats s = compute_stats(d.store, d.data.trust.graph);
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "domain          %s\nusers           %zu\nitems           %zu\nratings         %zu\n"
                "trust edges     %zu\ndensity         %.4f%%\nmean rating     %.4f\nratings/user    %.2f\n"
                "trustees/user   %.2f\n",
                r.domain.to_string().c_str(), s.n_users, s.n_items, s.n_ratings, s.n_trust_edges, s.density_index,
                s.mean_rating, s.mean_ratings_per_user, s.mean_trustees_per_user);
  out << buf;
  if (!cfg.out.empty()) {
    require_out(cfg);
    auto f = open_out(cfg.out / "stats.csv");
    f << "users,items,ratings,trust_edges,density_percent,mean_rating,ratings_per_user,trustees_per_user\n";
    f << s.n_users << ',' << s.n_items << ',' << s.n_ratings << ',' << s.n_trust_edges << ',' << fmt(s.density_index)
      << ',' << fmt(s.mean_rating) << ',' << fmt(s.mean_ratings_per_user) << ',' << fmt(s.mean_trustees_per_user)
      << '\n';
    write_manifest(cfg);
  }
  return kExitOk;
}

int cmd_split(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err) {
  const Loaded d = load(cfg, r, err);
  require_out(cfg);
  const auto folds = make_folds(cfg, d.store);
  const IdTable& users = *d.data.users;
  const IdTable& items = *d.data.items;
  auto summary = open_out(cfg.out / "splits.csv");
  summary << "fold,train,validation,test\n";
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const auto dir = cfg.out / ("fold" + std::to_string(f + 1));
    std::filesystem::create_directories(dir);
    const std::pair<const char*, const std::vector<Rating>*> parts[] = {
        {"train.tsv", &folds[f].train}, {"validation.tsv", &folds[f].validation}, {"test.tsv", &folds[f].test}};
    for (const auto& [name, ratings] : parts) {
      auto file = open_out(dir / name);
      for (const Rating& x : *ratings)
        file << users.name(index(x.user)) << '\t' << items.name(index(x.item)) << '\t' << fmt(x.value) << '\n';
    }
    summary << f + 1 << ',' << folds[f].train.size() << ',' << folds[f].validation.size() << ','
            << folds[f].test.size() << '\n';
    out << "fold " << f + 1 << ": train " << folds[f].train.size() << ", validation " << folds[f].validation.size()
        << ", test " << folds[f].test.size() << '\n';
  }
  write_manifest(cfg);
  return kExitOk;
}

int cmd_tune(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err) {
  if (cfg.scheme.empty()) throw UsageError("`tune` needs --scheme greedy or --scheme gradient");
  if (!cfg.weights.empty() || !cfg.weights_file.empty())
    throw UsageError("`tune` takes --scheme, not --weights or --weights-file");
  const Loaded d = load(cfg, r, err);
  require_out(cfg);
  const auto folds = make_folds(cfg, d.store);
  const Tuned t = tune_folds(cfg, r, d, folds, out);
  write_tuned(cfg, t, out);
  write_manifest(cfg);
  return kExitOk;
}

int cmd_evaluate(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err) {
  const Loaded d = load(cfg, r, err);
  require_out(cfg);
  const auto folds = make_folds(cfg, d.store);
  const auto ctx = contexts(r, d, folds);

  SegmentedResult res;
  if (r.predictor == PredictorKind::clusters) {
    if (cfg.clusters.empty()) throw UsageError("--predictor clusters needs --clusters FILE");
    if (!cfg.weights.empty() || !cfg.weights_file.empty() || !cfg.scheme.empty())
      throw UsageError("--predictor clusters takes its weights from the cluster file");
    res = evaluate_clusters(r, d, ctx, read_clusters(cfg.clusters, *d.data.users));
  } else {
    const auto ws = learned_weights(cfg, r, d, folds, out);
    res = evaluate_folds(ctx, ws, r.domain, r.options.clip);
  }
  warn_empty_cold_start(res, r, err);

  const std::string name(to_string(r.predictor));
  auto report = open_out(cfg.out / "report.csv");
  write_report_csv_header(report);
  write_rows(report, name, res.all_users);
  write_rows(report, name, res.cold_start);

  auto summary = open_out(cfg.out / "summary.csv");
  summary << "configuration,segment,metric,mean,std\n";
  write_summary_rows(summary, name, Segment::all_users, res.all_users);
  write_summary_rows(summary, name, Segment::cold_start, res.cold_start);

  auto h_all = open_out(cfg.out / "histogram_all_users.csv");
  write_histogram_csv(h_all, res.all_users.pooled.histogram);
  auto h_cold = open_out(cfg.out / "histogram_cold_start.csv");
  write_histogram_csv(h_cold, res.cold_start.pooled.histogram);

  print_table_header(out);
  print_table_row(out, name, res.all_users.pooled);
  print_table_row(out, name, res.cold_start.pooled);
  write_manifest(cfg);
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err) {
  SweepSpec spec;
  const auto swept = parse_param(cfg.param);
  if (!swept) throw UsageError("--param must be w0, w1 or w2");
  spec.swept = *swept;
  if (!cfg.complement.empty()) {
    const auto c = parse_param(cfg.complement);
    if (!c) throw UsageError("--complement must be w0, w1 or w2");
    if (*c == *swept) throw UsageError("--complement must differ from --param");
    spec.complement = *c;
  }
  spec.fixed = cfg.weights.empty() ? WeightVector{} : parse_weights(cfg.weights, "--weights");
  spec.grid = parse_grid(cfg.grid);

  const Loaded d = load(cfg, r, err);
  require_out(cfg);
  const auto folds = make_folds(cfg, d.store);
  const auto ctx = contexts(r, d, folds);
  const auto points = weight_sweep(ctx, spec, r.domain, r.options.clip);

  auto f = open_out(cfg.out / "sweep.csv");
  f << "weight,mae,rmse,common_size,coverage\n";
  char line[160];
  std::snprintf(line, sizeof line, "%8s %8s %8s %10s\n", cfg.param.c_str(), "MAE", "RMSE", "coverage%");
  out << line;
  for (const SweepPoint& p : points) {
    f << fmt(p.weight) << ',' << format_number(p.mae) << ',' << format_number(p.rmse) << ',' << p.common_size << ','
      << fmt(p.coverage) << '\n';
    std::snprintf(line, sizeof line, "%8.4g %8s %8s %10s\n", p.weight, fixed4(p.mae).c_str(), fixed4(p.rmse).c_str(),
                  percent(p.coverage).c_str());
    out << line;
  }
  out << "common subset: " << points.front().common_size << " ratings\n";
  write_manifest(cfg);
  return kExitOk;
}

int cmd_ablation(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err) {
  if (r.predictor != PredictorKind::two_level) throw UsageError("`ablation` uses --predictor two-level");
  const Loaded d = load(cfg, r, err);
  require_out(cfg);
  const auto folds = make_folds(cfg, d.store);
  const auto ws = learned_weights(cfg, r, d, folds, out);
  const auto ctx = contexts(r, d, folds);
  const auto rows = ablation_table(ctx, ws, r.domain, r.options.clip);

  auto f = open_out(cfg.out / "ablation.csv");
  write_report_csv_header(f);
  for (const AblationRow& row : rows) {
    write_rows(f, row.configuration, row.result.all_users);
    write_rows(f, row.configuration, row.result.cold_start);
  }
  print_table_header(out);
  for (const AblationRow& row : rows) print_table_row(out, row.configuration, row.result.all_users.pooled);
  for (const AblationRow& row : rows) print_table_row(out, row.configuration, row.result.cold_start.pooled);
  if (!rows.empty()) warn_empty_cold_start(rows.front().result, r, err);
  write_manifest(cfg);
  return kExitOk;
}

}  // namespace trustcf::cli
