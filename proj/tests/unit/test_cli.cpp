#include <doctest.h>

#include <fstream>
#include <sstream>

#include "polishsense/io.hpp"
#include "polishsense/model.hpp"
#include "polishsense/pipeline.hpp"
#include "support/temp_dir.hpp"

using namespace polishsense;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome cli(std::vector<std::string> args) {
  args.insert(args.begin(), "polishsense");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

// Small campaign: 4 short runs of 130 s and 2 long runs.
struct Campaign {
  testing::TempDir tmp{"polishsense-cli"};
  fs::path data = tmp.path() / "data";

  Campaign() {
    io::write_atomic(tmp.path() / "scenario.json",
                     R"({"n_short": 4, "n_long": 2, "short_run_seconds": 130, "texture_size": 16})");
    const Outcome g = cli({"gen", "--config", (tmp.path() / "scenario.json").string(), "--out",
                           data.string(), "--seed", "5"});
    REQUIRE_MESSAGE(g.code == 0, g.err);
  }
};

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(cli({"--help"}).code == 0);
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  const Outcome bad = cli({"evaluate", "--models", "tree,knn"});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("linear, ridge, gp, tree, forest, svr, gbr") != std::string::npos);
}

TEST_CASE("invalid band file is a usage error naming the file") {
  testing::TempDir tmp;
  io::write_atomic(tmp.path() / "bands.json", "{not json");
  const Outcome o = cli({"gen", "--bands", (tmp.path() / "bands.json").string(), "--out",
                         (tmp.path() / "d").string()});
  CHECK(o.code == 2);
  CHECK(o.err.find("bands.json") != std::string::npos);
}

TEST_CASE("gen with run counts") {
  testing::TempDir tmp;
  io::write_atomic(tmp.path() / "s.json", R"({"short_run_seconds": 121, "texture_size": 8})");
  const Outcome o = cli({"gen", "--config", (tmp.path() / "s.json").string(), "--n-short", "2",
                         "--n-long", "0", "--out", (tmp.path() / "d").string()});
  REQUIRE(o.code == 0);
  CHECK(load_dataset_manifest(tmp.path() / "d").runs.size() == 2);
}

TEST_CASE("extract, evaluate and predict end to end") {
  Campaign c;
  const Outcome ex = cli({"extract", "--data", c.data.string(), "--mode", "both"});
  REQUIRE_MESSAGE(ex.code == 0, ex.err);
  const std::string sep = io::read_text(c.data / "features_separate.csv");
  const std::string tog = io::read_text(c.data / "features_together.csv");
  CHECK(count_lines(sep) == 7);
  CHECK(count_lines(tog) == 7);
  CHECK(io::split(sep.substr(0, sep.find('\n')), ',').size() == 54);
  CHECK(io::split(tog.substr(0, tog.find('\n')), ',').size() == 6);

  REQUIRE(cli({"extract", "--data", c.data.string()}).code == 0);
  CHECK(io::read_text(c.data / "features_separate.csv") == sep);

  const Outcome ev = cli({"evaluate", "--features", c.data.string(), "--models", "all", "--modes",
                          "both"});
  REQUIRE_MESSAGE(ev.code == 0, ev.err);
  CHECK(count_lines(io::read_text(c.data / "results.csv")) == 8);
  CHECK(fs::exists(c.data / "reports" / "svr_together.json"));
  CHECK(ev.out.find("Decision Tree") != std::string::npos);

  const fs::path out = c.tmp.path() / "tree_only";
  const Outcome one = cli({"evaluate", "--features", c.data.string(), "--models", "tree",
                           "--modes", "separate", "--out", out.string()});
  REQUIRE(one.code == 0);
  CHECK(count_lines(io::read_text(out / "results.csv")) == 2);
  CHECK(one.out.find("importance (tree, separate)") != std::string::npos);

  // Run-directory input equals predicting on the extracted row.
  const fs::path model = out / "models" / "tree_separate.json";
  const FeatureTable table = load_feature_csv(c.data / "features_separate.csv");
  std::string row;
  for (double v : table.rows[2].values) row += (row.empty() ? "" : ",") + io::format_double(v);
  const Outcome by_row = cli({"predict", "--model", model.string(), "--features", row});
  const Outcome by_run = cli({"predict", "--model", model.string(), "--run",
                              (c.data / "runs" / table.rows[2].run_id).string(), "--bands",
                              (c.data / "bands.json").string()});
  REQUIRE_MESSAGE(by_row.code == 0, by_row.err);
  REQUIRE_MESSAGE(by_run.code == 0, by_run.err);
  CHECK(by_row.out == by_run.out);
  CHECK(by_row.out.find("prediction_nm") == 0);
  CHECK(by_row.out.find("feature band") != std::string::npos);

  const Outcome mismatch = cli({"predict", "--model", model.string(), "--features", "1,2,3"});
  CHECK(mismatch.code == 2);
  CHECK(mismatch.err.find("dimension mismatch") != std::string::npos);
  CHECK(cli({"predict", "--model", (out / "missing.json").string(), "--features", "1"}).code == 1);
}

TEST_CASE("extract reports failing runs by id") {
  Campaign c;
  fs::resize_file(c.data / "runs" / "short_02" / "samples.f64le", 800);
  const Outcome o = cli({"extract", "--data", c.data.string()});
  CHECK(o.code == 1);
  CHECK(o.err.find("short_02") != std::string::npos);
  CHECK_FALSE(fs::exists(c.data / "features_separate.csv"));
}

TEST_CASE("missing feature files are runtime failures") {
  testing::TempDir tmp;
  CHECK(cli({"evaluate", "--features", tmp.path().string()}).code == 1);
  CHECK(cli({"extract", "--data", tmp.path().string()}).code == 1);
}

TEST_CASE("predict with a constant-target model") {
  testing::TempDir tmp;
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(6, 2);
  const TrainedModel m = fit(ModelSpec::defaults(ModelKind::GBR), x, Eigen::VectorXd::Constant(6, 0.75),
                             {"all_mean", "all_variance"});
  save_model(m, tmp.path() / "m.json");
  const Outcome o = cli({"predict", "--model", (tmp.path() / "m.json").string(), "--features", "3,-8"});
  REQUIRE(o.code == 0);
  CHECK(o.out.rfind("prediction_nm 0.75\n", 0) == 0);
}
