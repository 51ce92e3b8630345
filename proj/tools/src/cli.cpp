#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "app.hpp"
#include "trustcf/errors.hpp"

namespace trustcf::cli {

namespace {

std::vector<std::string> split_list(const std::string& text, char sep = ',') {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, sep)) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v))
    throw UsageError(what + ": '" + text + "' is not a finite number");
  return v;
}

std::vector<double> parse_numbers(const std::string& text, std::size_t n, const std::string& flag) {
  const auto parts = split_list(text);
  if (parts.size() != n) throw UsageError(flag + " expects " + std::to_string(n) + " comma-separated numbers");
  std::vector<double> out;
  for (const auto& p : parts) out.push_back(parse_number(p, flag));
  return out;
}

}  // namespace

std::optional<PredictorKind> parse_predictor(std::string_view name) {
  if (name == "baseline") return PredictorKind::baseline;
  if (name == "one-level") return PredictorKind::one_level;
  if (name == "two-level") return PredictorKind::two_level;
  if (name == "clusters") return PredictorKind::clusters;
  return std::nullopt;
}

std::string_view to_string(PredictorKind k) {
  switch (k) {
    case PredictorKind::baseline: return "baseline";
    case PredictorKind::one_level: return "one-level";
    case PredictorKind::two_level: return "two-level";
    case PredictorKind::clusters: return "clusters";
  }
  return "two-level";
}

WeightVector parse_weights(const std::string& text, const std::string& flag) {
  const auto v = parse_numbers(text, 3, flag);
  return {v[0], v[1], v[2]};
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    const auto parts = split_list(text, ':');
    if (parts.size() != 3) throw UsageError("--grid expects START:STOP:STEP or a comma-separated list");
    const double start = parse_number(parts[0], "--grid");
    const double stop = parse_number(parts[1], "--grid");
    const double step = parse_number(parts[2], "--grid");
    if (!(step > 0.0) || stop < start) throw UsageError("--grid needs STEP > 0 and STOP >= START");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    for (std::size_t i = 0; i < n; ++i) {
      // snap to 12 significant digits so 0.1 * 3 prints as 0.3
      const double v = start + step * static_cast<double>(i);
      out.push_back(std::stod((std::ostringstream() << std::setprecision(12) << v).str()));
    }
  } else {
    for (const auto& p : split_list(text)) out.push_back(parse_number(p, "--grid"));
  }
  if (out.empty()) throw UsageError("--grid is empty");
  return out;
}

std::vector<WeightVector> read_weights_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open weights file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw UsageError(path.string() + ": empty weights file");
  const auto header = split_list(line);
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw UsageError(path.string() + ": missing column " + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c0 = column("w0");
  const std::size_t c1 = column("w1");
  const std::size_t c2 = column("w2");
  std::vector<WeightVector> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split_list(line);
    if (cells.empty() || cells[0].empty() || !std::isdigit(static_cast<unsigned char>(cells[0][0]))) continue;
    if (cells.size() < header.size()) throw UsageError(path.string() + ":" + std::to_string(line_no) + ": short row");
    const std::string where = path.string() + ":" + std::to_string(line_no);
    out.push_back({parse_number(cells[c0], where), parse_number(cells[c1], where), parse_number(cells[c2], where)});
  }
  if (out.empty()) throw UsageError(path.string() + ": no weight rows");
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

Resolved resolve(const RunConfig& cfg) {
  Resolved r;

  const auto format = parse_dataset_format(cfg.format);
  if (!format) throw UsageError("unknown --format '" + cfg.format + "' (generic, epinions, filmtrust)");
  if (!cfg.domain.empty()) {
    const auto d = parse_numbers(cfg.domain, 3, "--domain");
    try {
      r.domain = RatingDomain(d[0], d[1], d[2]);
    } catch (const std::invalid_argument& e) {
      throw UsageError(std::string("--domain: ") + e.what());
    }
  } else if (const auto implied = format_domain(*format)) {
    r.domain = *implied;
  } else {
    throw UsageError("--format generic needs --domain MIN,MAX,STEP");
  }

  const auto predictor = parse_predictor(cfg.predictor);
  if (!predictor) throw UsageError("unknown --predictor '" + cfg.predictor + "'");
  r.predictor = *predictor;

  const auto backing = parse_backing(cfg.backing);
  if (!backing) throw UsageError("unknown --backing '" + cfg.backing + "' (train, train+validation)");
  r.backing = *backing;

  r.options.exclude_direct_from_indirect = cfg.exclude_direct;
  r.options.exclude_scorer_from_groups = cfg.exclude_scorer;
  r.options.clip = cfg.clip;

  if (cfg.cold_start_threshold < 1) throw UsageError("--cold-start-threshold must be at least 1");
  r.cold_start.max_train_ratings = cfg.cold_start_threshold;

  if (cfg.folds < 2) throw UsageError("--folds must be at least 2");
  if (!(cfg.val_fraction > 0.0 && cfg.val_fraction < 1.0)) throw UsageError("--val-fraction must lie in (0, 1)");

  const WeightVector init = parse_weights(cfg.init, "--init");
  const auto range = parse_numbers(cfg.range, 2, "--range");
  r.greedy.lower = range[0];
  r.greedy.upper = range[1];
  r.greedy.init = init;
  r.greedy.n_outer_passes = cfg.outer_passes;
  r.greedy.n_inner_iterations = cfg.inner_iterations;
  r.greedy.n_restarts = cfg.restarts;
  r.greedy.tie_on_coverage = cfg.tie_on_coverage;
  const auto order = split_list(cfg.order);
  if (order.size() != 3) throw UsageError("--order expects a permutation of w0,w1,w2");
  for (std::size_t i = 0; i < 3; ++i) {
    const auto p = parse_param(order[i]);
    if (!p) throw UsageError("--order: unknown parameter '" + order[i] + "'");
    r.greedy.order[i] = *p;
  }

  r.gradient.learning_rate = cfg.lr;
  r.gradient.batch_size = cfg.batch_size;
  r.gradient.n_epochs = cfg.epochs;
  r.gradient.init = init;
  r.gradient.shuffle = !cfg.no_shuffle;
  r.gradient.seed = cfg.seed;

  try {
    r.greedy.validate();
    r.gradient.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  r.threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  return r;
}

namespace {

void add_options(CLI::App& app, RunConfig& c) {
  const std::string data = "Data";
  app.add_option("--ratings", c.ratings, "Rating file: <user> <item> <rating> per line")->group(data);
  app.add_option("--trust", c.trust, "Trust file: <truster> <trustee> [value] per line")->group(data);
  app.add_option("--format", c.format, "generic, epinions or filmtrust")->capture_default_str()->group(data);
  app.add_option("--domain", c.domain, "Rating domain MIN,MAX,STEP (overrides --format)")->group(data);
  app.add_option("--out", c.out, "Output directory")->group(data);

  const std::string proto = "Protocol";
  app.add_option("--folds", c.folds, "Number of cross-validation folds")->capture_default_str()->group(proto);
  app.add_option("--seed", c.seed, "Seed for fold splits and batch shuffling")->capture_default_str()->group(proto);
  app.add_option("--val-fraction", c.val_fraction, "Share of non-test ratings held out for validation")
      ->capture_default_str()
      ->group(proto);
  app.add_option("--threads", c.threads, "Worker threads (0: all cores)")->capture_default_str()->group(proto);
  app.add_option("--backing", c.backing, "Ratings backing test predictions: train or train+validation")
      ->capture_default_str()
      ->group(proto);
  app.add_option("--cold-start-threshold", c.cold_start_threshold,
                 "Cold-start users have fewer training ratings than this")
      ->capture_default_str()
      ->group(proto);

  const std::string model = "Model";
  app.add_option("--predictor", c.predictor, "baseline, one-level, two-level or clusters")
      ->capture_default_str()
      ->group(model);
  app.add_option("--clusters", c.clusters, "Cluster file for --predictor clusters")->group(model);
  app.add_option("--weights", c.weights, "Fixed weights W0,W1,W2")->group(model);
  app.add_option("--weights-file", c.weights_file, "weights.csv written by `tune`")->group(model);
  app.add_option("--scheme", c.scheme, "Tune weights per fold: greedy or gradient")->group(model);
  app.add_flag("--clip", c.clip, "Clamp predictions to the rating domain")->group(model);
  app.add_flag("--exclude-direct", c.exclude_direct, "Drop direct trustees from the indirect set")->group(model);
  app.add_flag("--exclude-scorer", c.exclude_scorer, "Drop the scorer from trust groups when scoring it")
      ->group(model);

  const std::string tuning = "Tuning";
  app.add_option("--init", c.init, "Initial weights W0,W1,W2")->capture_default_str()->group(tuning);
  app.add_option("--order", c.order, "Greedy parameter order")->capture_default_str()->group(tuning);
  app.add_option("--range", c.range, "Greedy search range LOWER,UPPER")->capture_default_str()->group(tuning);
  app.add_option("--outer-passes", c.outer_passes, "Greedy passes over all parameters")
      ->capture_default_str()
      ->group(tuning);
  app.add_option("--inner-iterations", c.inner_iterations, "Greedy narrowing rounds per parameter")
      ->capture_default_str()
      ->group(tuning);
  app.add_option("--restarts", c.restarts, "Greedy restarts, each continuing from the last")
      ->capture_default_str()
      ->group(tuning);
  app.add_flag("--tie-on-coverage", c.tie_on_coverage, "Break greedy MAE ties by coverage")->group(tuning);
  app.add_option("--lr", c.lr, "Gradient learning rate")->capture_default_str()->group(tuning);
  app.add_option("--batch-size", c.batch_size, "Gradient mini-batch size")->capture_default_str()->group(tuning);
  app.add_option("--epochs", c.epochs, "Gradient epochs")->capture_default_str()->group(tuning);
  app.add_flag("--no-shuffle", c.no_shuffle, "Keep validation order fixed across epochs")->group(tuning);

  const std::string sweep = "Sweep";
  app.add_option("--param", c.param, "Swept weight: w0, w1 or w2")->capture_default_str()->group(sweep);
  app.add_option("--complement", c.complement, "Weight set to 1 - swept value")->group(sweep);
  app.add_option("--grid", c.grid, "START:STOP:STEP or a comma-separated list")->capture_default_str()->group(sweep);
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Trust-aware collaborative filtering experiments"};
  app.name("trustcf");
  app.set_config("--config", "", "Read options from a TOML file; command-line flags win");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig cfg;
  add_options(app, cfg);
  app.add_subcommand("stats", "Dataset statistics");
  app.add_subcommand("split", "Write the cross-validation folds");
  app.add_subcommand("tune", "Tune the weights on every fold");
  app.add_subcommand("evaluate", "Cross-validated evaluation, all users and cold start");
  app.add_subcommand("sweep", "Vary one weight over a grid");
  app.add_subcommand("ablation", "Baseline, trust-only, one-level and two-level rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "trustcf: " << e.what() << '\n';
    return kExitUsage;
  }

  cfg.command = app.get_subcommands().front()->get_name();
  cfg.echoed = app.config_to_str(true, false);

  try {
    const Resolved r = resolve(cfg);
    if (cfg.command == "stats") return cmd_stats(cfg, r, out, err);
    if (cfg.command == "split") return cmd_split(cfg, r, out, err);
    if (cfg.command == "tune") return cmd_tune(cfg, r, out, err);
    if (cfg.command == "evaluate") return cmd_evaluate(cfg, r, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, r, out, err);
    return cmd_ablation(cfg, r, out, err);
  } catch (const UsageError& e) {
    err << "trustcf: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    err << "trustcf: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    err << "trustcf: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ComputationError& e) {
    err << "trustcf: " << e.what() << '\n';
    return kExitComputation;
  } catch (const std::invalid_argument& e) {
    err << "trustcf: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "trustcf: " << e.what() << '\n';
    return kExitComputation;
  }
}

}  // namespace trustcf::cli
