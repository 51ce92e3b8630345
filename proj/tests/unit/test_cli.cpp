#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "app.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = TRUSTCF_TEST_DATA_DIR;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "trustcf");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = trustcf::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("trustcf_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

// Synthetic FilmTrust-like dataset written once per test binary run.
const TempDir& world_dir() {
  static TempDir dir;
  static bool written = [] {
    const auto w = trustcf::testing::taste_world(11, {.n_users = 150, .n_items = 100});
    trustcf::testing::write_world(w, dir.path / "ratings.txt", dir.path / "trust.txt");
    return true;
  }();
  (void)written;
  return dir;
}

std::vector<std::string> world_args() {
  const auto& d = world_dir();
  return {"--ratings", d / "ratings.txt", "--trust", d / "trust.txt", "--format", "filmtrust"};
}

std::vector<std::string> with(std::vector<std::string> a, const std::vector<std::string>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

}  // namespace

TEST_CASE("cli: stats on the tiny fixture") {
  const auto r = run({"stats", "--ratings", (kData / "tiny_ratings.txt").string(), "--trust",
                      (kData / "tiny_trust.txt").string(), "--domain", "1,5,0.5"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("users           4\n") != std::string::npos);
  CHECK(r.out.find("items           3\n") != std::string::npos);
  CHECK(r.out.find("ratings         7\n") != std::string::npos);
  CHECK(r.out.find("trust edges     3\n") != std::string::npos);
  CHECK(r.out.find("density         58.3333%\n") != std::string::npos);
  CHECK(r.err.find("dropped 1 self-trust") != std::string::npos);
  CHECK(r.err.find("merged 1 duplicate") != std::string::npos);
}

TEST_CASE("cli: stats csv and manifest") {
  TempDir out;
  const auto r = run({"stats", "--ratings", (kData / "tiny_ratings.txt").string(), "--domain", "1,5,0.5", "--out",
                      out.path.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(out.path / "stats.csv") ==
        "users,items,ratings,trust_edges,density_percent,mean_rating,ratings_per_user,trustees_per_user\n"
        "4,3,7,0,58.3333,3.21429,1.75,0\n");
  const auto manifest = slurp(out.path / "manifest");
  CHECK(manifest.rfind("# trustcf stats\n", 0) == 0);
  CHECK(manifest.find("seed=1") != std::string::npos);
  CHECK(manifest.find("# sha256 ratings ") != std::string::npos);
}

TEST_CASE("cli: usage and input errors exit with 2") {
  SUBCASE("missing file names the path") {
    const auto r = run({"stats", "--ratings", "/no/such/ratings.txt", "--format", "epinions"});
    CHECK(r.code == 2);
    CHECK(r.err.find("/no/such/ratings.txt") != std::string::npos);
  }
  SUBCASE("unknown flag") { CHECK(run({"stats", "--bogus"}).code == 2); }
  SUBCASE("no command") { CHECK(run({}).code == 2); }
  SUBCASE("generic format needs a domain") {
    const auto r = run({"stats", "--ratings", (kData / "tiny_ratings.txt").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("--domain") != std::string::npos);
  }
  SUBCASE("rating outside the domain reports its line") {
    const auto r = run({"stats", "--ratings", (kData / "tiny_ratings.txt").string(), "--format", "filmtrust"});
    CHECK(r.code == 2);
    CHECK(r.err.find("tiny_ratings.txt:4") != std::string::npos);
  }
  SUBCASE("conflicting weight sources") {
    TempDir out;
    const auto r = run(with(world_args(), {"evaluate", "--weights", "1,1,1", "--scheme", "greedy", "--out", out.path}));
    CHECK(r.code == 2);
  }
  SUBCASE("one-level with an indirect weight") {
    TempDir out;
    CHECK(run(with(world_args(), {"evaluate", "--predictor", "one-level", "--weights", "1,1,1", "--out", out.path}))
              .code == 2);
  }
  SUBCASE("evaluate without --out") { CHECK(run(with(world_args(), {"evaluate", "--weights", "1,1,1"})).code == 2); }
  SUBCASE("help") { CHECK(run({"--help"}).code == 0); }
}

TEST_CASE("cli: computation errors exit with 1") {
  TempDir out;
  const auto r = run(with(world_args(), {"sweep", "--param", "w2", "--grid", "0", "--out", out.path}));
  CHECK(r.code == 1);
  CHECK(r.err.find("common subset is empty") != std::string::npos);
}

TEST_CASE("cli: exact fixture gives an all-zero error row") {
  TempDir out;
  const auto r = run({"evaluate", "--ratings", (kData / "uniform_ratings.txt").string(), "--trust",
                      (kData / "uniform_trust.txt").string(), "--format", "epinions", "--weights", "0.5,0.3,0.2",
                      "--out", out.path.string()});
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(out.path / "report.csv"));
  REQUIRE(rows.size() >= 2);
  CHECK(rows[1] == "two-level,all_users,pooled,0,0,1,1,1,48,48");
}

TEST_CASE("cli: cold-start segments with nothing to score") {
  SUBCASE("empty segment is NA with a warning") {
    TempDir out;
    const auto r = run({"evaluate", "--ratings", (kData / "uniform_ratings.txt").string(), "--trust",
                        (kData / "uniform_trust.txt").string(), "--format", "epinions", "--weights", "0.5,0.3,0.2",
                        "--cold-start-threshold", "1", "--out", out.path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.err.find("warning:") != std::string::npos);
    CHECK(slurp(out.path / "report.csv").find("two-level,cold_start,pooled,NA,NA,NA,NA,NA,0,0\n") !=
          std::string::npos);
  }
  SUBCASE("users without training ratings are never covered by the baseline") {
    TempDir out;
    const auto r = run(with(world_args(), {"evaluate", "--predictor", "baseline", "--cold-start-threshold", "1",
                                           "--out", out.path}));
    REQUIRE(r.code == 0);
    CHECK(slurp(out.path / "report.csv").find("baseline,cold_start,pooled,NA,NA,0,NA,NA,0,") != std::string::npos);
  }
  SUBCASE("threshold 0 is rejected") {
    TempDir out;
    CHECK(run(with(world_args(), {"evaluate", "--predictor", "baseline", "--cold-start-threshold", "0", "--out",
                                  out.path}))
              .code == 2);
  }
}

TEST_CASE("cli: gradient with zero learning rate keeps the initial weights") {
  TempDir out;
  const auto r = run(with(world_args(), {"tune", "--scheme", "gradient", "--lr", "0", "--init", "0.3,0.2,0.1",
                                         "--epochs", "2", "--out", out.path}));
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(out.path / "weights.csv"));
  REQUIRE(rows.size() == 1 + 5 + 2);
  for (std::size_t i = 1; i <= 5; ++i) CHECK(rows[i].rfind(std::to_string(i) + ",0.3,0.2,0.1,", 0) == 0);
  for (int i = 1; i <= 5; ++i) CHECK(fs::exists(out.path / ("trace_fold" + std::to_string(i) + ".txt")));
}

TEST_CASE("cli: greedy stays inside its range") {
  TempDir out;
  const auto r = run(with(world_args(), {"tune", "--scheme", "greedy", "--init", "0.5,0.5,0.5", "--range", "0.2,0.7",
                                         "--outer-passes", "1", "--out", out.path}));
  REQUIRE(r.code == 0);
  const auto ws = trustcf::cli::read_weights_file(out.path / "weights.csv");
  REQUIRE(ws.size() == 5);
  for (const auto& w : ws) {
    for (double v : {w.w0, w.w1, w.w2}) {
      CHECK(v >= 0.2);
      CHECK(v <= 0.7);
    }
  }
}

TEST_CASE("cli: sweep shapes") {
  TempDir out;
  auto r = run(with(world_args(), {"sweep", "--param", "w1", "--complement", "w0", "--grid", "0:1:0.1", "--out",
                                   out.path}));
  REQUIRE(r.code == 0);
  auto rows = lines(slurp(out.path / "sweep.csv"));
  REQUIRE(rows.size() == 12);
  CHECK(rows[0] == "weight,mae,rmse,common_size,coverage");
  CHECK(rows[4].rfind("0.3,", 0) == 0);

  r = run(with(world_args(), {"sweep", "--param", "w1", "--complement", "w0", "--grid", "0.6", "--out", out.path}));
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(out.path / "sweep.csv")).size() == 2);
}

TEST_CASE("cli: tuned weights round-trip through --weights-file") {
  TempDir a;
  TempDir b;
  REQUIRE(run(with(world_args(), {"evaluate", "--scheme", "greedy", "--outer-passes", "1", "--out", a.path})).code == 0);
  REQUIRE(run(with(world_args(), {"evaluate", "--weights-file", a / "weights.csv", "--out", b.path})).code == 0);
  CHECK(slurp(a.path / "report.csv") == slurp(b.path / "report.csv"));
}

TEST_CASE("cli: cluster file with only the query user equals the baseline") {
  TempDir dir;
  {
    std::ofstream f(dir.path / "clusters.txt");
    f << "# weight members\n1.0 @self\n";
  }
  TempDir base;
  TempDir clus;
  REQUIRE(run(with(world_args(), {"evaluate", "--predictor", "baseline", "--out", base.path})).code == 0);
  const auto r = run(with(world_args(), {"evaluate", "--predictor", "clusters", "--clusters", dir / "clusters.txt",
                                         "--out", clus.path}));
  REQUIRE(r.code == 0);
  const auto x = lines(slurp(base.path / "report.csv"));
  const auto y = lines(slurp(clus.path / "report.csv"));
  REQUIRE(x.size() == y.size());
  for (std::size_t i = 1; i < x.size(); ++i) CHECK(x[i].substr(x[i].find(',')) == y[i].substr(y[i].find(',')));
}

TEST_CASE("cli: config file supplies options and flags win") {
  TempDir dir;
  const auto& w = world_dir();
  {
    std::ofstream f(dir.path / "run.toml");
    f << "ratings = \"" << (w / "ratings.txt") << "\"\n"
      << "trust = \"" << (w / "trust.txt") << "\"\n"
      << "format = \"filmtrust\"\nfolds = 4\nseed = 7\n";
  }
  TempDir out;
  auto r = run({"split", "--config", dir / "run.toml", "--out", out.path.string()});
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(out.path / "splits.csv")).size() == 1 + 4);

  TempDir out2;
  r = run({"split", "--config", dir / "run.toml", "--folds", "3", "--out", out2.path.string()});
  REQUIRE(r.code == 0);
  CHECK(lines(slurp(out2.path / "splits.csv")).size() == 1 + 3);

  // The manifest is itself a usable config.
  TempDir out3;
  r = run({"split", "--config", (out.path / "manifest").string(), "--out", out3.path.string()});
  REQUIRE(r.code == 0);
  CHECK(slurp(out.path / "splits.csv") == slurp(out3.path / "splits.csv"));
  CHECK(slurp(out.path / "fold2" / "test.tsv") == slurp(out3.path / "fold2" / "test.tsv"));
}

TEST_CASE("cli: outputs are byte-identical across thread counts") {
  const std::vector<std::string> files{"weights.csv", "trace_fold1.txt", "trace_fold5.txt", "report.csv",
                                       "summary.csv", "histogram_all_users.csv", "histogram_cold_start.csv"};
  for (const std::string scheme : {"greedy", "gradient"}) {
    TempDir one;
    TempDir many;
    const std::vector<std::string> common{"evaluate", "--scheme", scheme, "--seed", "5", "--outer-passes", "1"};
    REQUIRE(run(with(with(world_args(), common), {"--threads", "1", "--out", one.path})).code == 0);
    REQUIRE(run(with(with(world_args(), common), {"--threads", "5", "--out", many.path})).code == 0);
    for (const auto& f : files) CHECK_MESSAGE(slurp(one.path / f) == slurp(many.path / f), scheme << ' ' << f);
  }
  TempDir s1;
  TempDir s2;
  REQUIRE(run(with(world_args(), {"split", "--seed", "9", "--out", s1.path})).code == 0);
  REQUIRE(run(with(world_args(), {"split", "--seed", "9", "--threads", "3", "--out", s2.path})).code == 0);
  for (int f = 1; f <= 5; ++f)
    for (const char* part : {"train.tsv", "validation.tsv", "test.tsv"})
      CHECK(slurp(s1.path / ("fold" + std::to_string(f)) / part) == slurp(s2.path / ("fold" + std::to_string(f)) / part));
}
