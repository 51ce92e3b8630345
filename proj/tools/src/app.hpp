#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "trustcf/dataset.hpp"
#include "trustcf/evaluation.hpp"
#include "trustcf/tuning.hpp"

namespace trustcf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitUsage = 2;

// Raised for bad flag combinations or unreadable side files; maps to exit 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flag values as given, before resolution.
struct RunConfig {
  std::string command;

  std::filesystem::path ratings;
  std::filesystem::path trust;
  std::string format = "generic";
  std::string domain;  // MIN,MAX,STEP
  std::filesystem::path out;

  std::size_t folds = 5;
  std::uint64_t seed = 1;
  double val_fraction = 0.25;
  std::size_t threads = 1;

  std::string predictor = "two-level";
  std::filesystem::path clusters;

  std::string weights;  // W0,W1,W2
  std::filesystem::path weights_file;
  std::string scheme;  // greedy | gradient

  std::string order = "w0,w1,w2";
  std::string init = "0.5,0.5,0.5";
  std::string range = "1e-4,1";
  std::size_t outer_passes = 3;
  std::size_t inner_iterations = 3;
  std::size_t restarts = 1;
  bool tie_on_coverage = false;

  double lr = 1e-2;
  std::size_t batch_size = 50;
  std::size_t epochs = 30;
  bool no_shuffle = false;

  std::size_t cold_start_threshold = 5;
  bool clip = false;
  std::string backing = "train+validation";
  bool exclude_direct = false;
  bool exclude_scorer = false;

  std::string param = "w1";
  std::string complement;
  std::string grid = "0:1:0.1";

  std::string echoed;  // every option as key = value, for the manifest
};

enum class PredictorKind { baseline, one_level, two_level, clusters };

// Everything a command needs, parsed and checked.
struct Resolved {
  RatingDomain domain = RatingDomain::epinions();
  PredictorKind predictor = PredictorKind::two_level;
  PredictOptions options;
  Backing backing = Backing::train_and_validation;
  ColdStartRule cold_start;
  GreedyConfig greedy;
  GradientConfig gradient;
  std::size_t threads = 1;
};

Resolved resolve(const RunConfig& cfg);

std::optional<PredictorKind> parse_predictor(std::string_view name);
std::string_view to_string(PredictorKind k);

// "a,b,c" -> three finite numbers.
WeightVector parse_weights(const std::string& text, const std::string& flag);
std::vector<double> parse_grid(const std::string& text);

// Rows whose first column is a fold number; a single row is broadcast.
std::vector<WeightVector> read_weights_file(const std::filesystem::path& path);

std::string sha256_file(const std::filesystem::path& path);

int cmd_stats(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err);
int cmd_split(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err);
int cmd_tune(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err);
int cmd_evaluate(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err);
int cmd_ablation(const RunConfig& cfg, const Resolved& r, std::ostream& out, std::ostream& err);

// Full entry point; never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace trustcf::cli
